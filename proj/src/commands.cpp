#include "surfmix/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "surfmix/coupling.hpp"
#include "surfmix/exact.hpp"
#include "surfmix/metrics.hpp"
#include "surfmix/slow.hpp"

namespace surfmix {

namespace {

struct Context {
    Json config;
    std::string hash;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::filesystem::path out_dir;
    std::uint64_t cap = default_enumeration_cap;
    std::ostream& out;
};

void write_file(const std::filesystem::path& file, const std::string& text)
{
    std::ofstream f(file, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + file.string());
    f << text;
}

void write_json(const std::filesystem::path& file, const Json& j) { write_file(file, j.dump(2) + "\n"); }

Json report_header(const Context& ctx, const std::string& command)
{
    return Json{{"command", command}, {"config_hash", ctx.hash}, {"version", tool_version}};
}

std::string fraction(const Rational& r) { return to_fraction_string(r); }

Json time_summary_json(const TimeSummary& s)
{
    std::vector<std::uint64_t> done;
    for (const auto& t : s.times)
        if (t) done.push_back(*t);
    std::sort(done.begin(), done.end());
    Json quantiles = Json::object();
    for (const double q : {0.1, 0.25, 0.5, 0.75, 0.9}) {
        if (done.empty()) break;
        const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(done.size())));
        quantiles[format_double(q)] = done[std::max<std::size_t>(rank, 1) - 1];
    }
    return Json{{"runs", s.times.size()}, {"timeouts", s.timeouts}, {"max_steps", s.max_steps}, {"mean", s.mean},
                {"median", s.median}, {"max", s.max}, {"quantiles", quantiles}};
}

std::string times_csv(const TimeSummary& s)
{
    std::ostringstream csv;
    csv << "seed,T,timeout\n";
    for (std::size_t i = 0; i < s.seeds.size(); ++i)
        csv << s.seeds[i] << ',' << (s.times[i] ? std::to_string(*s.times[i]) : std::string()) << ',' << (s.times[i] ? 0 : 1) << '\n';
    return csv.str();
}

std::vector<Downset> all_states(const RegionPtr& region, std::uint64_t cap)
{
    std::vector<Downset> states;
    for (auto& counts : enumerate_downsets(*region, cap)) states.push_back(Downset::from_counts(region, std::move(counts)));
    return states;
}

std::string counts_text(std::span<const int> counts)
{
    std::string s;
    for (std::size_t i = 0; i < counts.size(); ++i) s += (i ? " " : "") + std::to_string(counts[i]);
    return s;
}

int cmd_sample(const Context& ctx)
{
    const Json& c = ctx.config;
    const RegionPtr region = region_from_json(require(c, "region", ""));
    ChainConfig chain{region, bias_from_json(require(c, "bias", ""), region),
                      c.contains("initial") ? downset_from_json(c["initial"], region, "/initial") : Downset::empty(region), ctx.seed,
                      get_u64(c, "steps", "", 0), get_u64(c, "stride", "", 1)};
    if (chain.stride == 0) throw ConfigError("/stride", "must be positive");

    std::vector<Observer> observers;
    if (c.contains("observers")) {
        const ExpMetricParams params = ExpMetricParams::for_bias(*region, chain.bias);
        const Downset full = Downset::full(region);
        for (std::size_t i = 0; i < c["observers"].size(); ++i) {
            const Json& name = c["observers"][i];
            if (name == "hamming_to_full") observers.push_back({"hamming_to_full", [full](const Downset& s) { return double(hamming(s, full)); }});
            else if (name == "log_phi_to_full")
                observers.push_back({"log_phi_to_full", [full, params](const Downset& s) { return log_exp_metric(s, full, params); }});
            else throw ConfigError("/observers/" + std::to_string(i), "unknown observer (hamming_to_full, log_phi_to_full)");
        }
    }

    const TrajectorySummary summary = run(chain, observers);
    std::ostringstream csv;
    csv << "step,size,peaks,valleys";
    for (const auto& name : summary.extra_columns) csv << ',' << name;
    csv << '\n';
    for (std::size_t i = 0; i < summary.steps.size(); ++i) {
        csv << summary.steps[i] << ',' << summary.sizes[i] << ',' << summary.peak_counts[i] << ',' << summary.valley_counts[i];
        for (const double v : summary.extra[i]) csv << ',' << format_double(v);
        csv << '\n';
    }
    write_file(ctx.out_dir / "trajectory.csv", csv.str());

    Json footer = report_header(ctx, "sample");
    footer["seed"] = ctx.seed;
    footer["steps"] = chain.steps;
    footer["final_state"] = downset_to_json(summary.final_state);
    footer["metadata"] = {{"timestamp", utc_timestamp()}};
    write_json(ctx.out_dir / "trajectory.json", footer);
    ctx.out << "sample: " << summary.steps.size() << " rows, final |sigma| = " << summary.final_state.size() << '\n';
    return exit_ok;
}

int cmd_couple(const Context& ctx)
{
    const Json& c = ctx.config;
    const RegionPtr region = region_from_json(require(c, "region", ""));
    const BiasField bias = bias_from_json(require(c, "bias", ""), region);
    const auto seeds = seeds_from_json(c, ctx.seed);
    std::optional<CoupledPair> start;
    if (c.contains("start")) {
        const Json& s = c["start"];
        start = CoupledPair{downset_from_json(require(s, "sigma", "/start"), region, "/start/sigma"),
                            downset_from_json(require(s, "rho", "/start"), region, "/start/rho")};
    }
    const TimeSummary summary = coupling_time(region, bias, seeds, get_u64(c, "max_steps", "", 10'000'000), ctx.threads, start);
    write_file(ctx.out_dir / "couple.csv", times_csv(summary));
    Json report = report_header(ctx, "couple");
    report["summary"] = time_summary_json(summary);
    write_json(ctx.out_dir / "couple.json", report);
    ctx.out << "couple: mean T = " << summary.mean << " over " << seeds.size() << " seeds, " << summary.timeouts << " timeouts\n";
    return exit_ok;
}

int cmd_hit(const Context& ctx)
{
    const Json& c = ctx.config;
    const RegionPtr region = region_from_json(require(c, "region", ""));
    const BiasField bias = bias_from_json(require(c, "bias", ""), region);
    const auto seeds = seeds_from_json(c, ctx.seed);
    const std::uint64_t max_steps = get_u64(c, "max_steps", "", 10'000'000);
    const TimeSummary summary = hitting_time_to_full(region, bias, seeds, max_steps, ctx.threads);
    write_file(ctx.out_dir / "hit.csv", times_csv(summary));
    Json report = report_header(ctx, "hit");
    report["summary"] = time_summary_json(summary);
    int code = exit_ok;
    if (c.contains("compare_bias")) {
        const BiasField low = bias_from_json(c["compare_bias"], region, "/compare_bias");
        const DominationReport dom = hitting_domination(region, bias, low, seeds, max_steps, ctx.threads);
        report["domination"] = {{"order_violations", dom.order_violations}, {"time_violations", dom.time_violations}, {"pass", dom.pass()}};
        if (!dom.pass()) code = exit_verification_failure;
    }
    write_json(ctx.out_dir / "hit.json", report);
    ctx.out << "hit: mean T = " << summary.mean << " over " << seeds.size() << " seeds, " << summary.timeouts << " timeouts\n";
    return code;
}

int cmd_drift(const Context& ctx)
{
    const Json& c = ctx.config;
    const RegionPtr region = region_from_json(require(c, "region", ""));
    const BiasField bias = bias_from_json(require(c, "bias", ""), region);
    if (!bias.is_exact()) throw ConfigError("/bias", "drift needs rational biases");
    const ExpMetricParams params = ExpMetricParams::for_bias(*region, bias);
    const auto states = all_states(region, ctx.cap);

    std::ostringstream csv;
    csv << "sigma,rho,phi,expected_change,uniform_bound,fluctuating_bound,bad_choices,pass\n";
    std::size_t pairs = 0, violations = 0;
    int worst_bad = 0;
    double worst_ratio = -std::numeric_limits<double>::infinity();
    Json worst;
    for (const auto& sigma : states) {
        for (int r = 0; r < region->span(); ++r) {
            if (!can_add(sigma, r)) continue;
            Downset rho = sigma;
            rho.push(r);
            const DriftReport d = exact_pair_drift(sigma, rho, bias, params);
            const bool ok = d.pass() && d.bad_choices <= region->dim();
            ++pairs;
            violations += !ok;
            worst_bad = std::max(worst_bad, d.bad_choices);
            const double ratio = to_double(d.expected_change) / to_double(d.phi);
            csv << counts_text(d.sigma) << ',' << counts_text(d.rho) << ',' << format_double(to_double(d.phi)) << ','
                << format_double(to_double(d.expected_change)) << ',' << (d.uniform_bound_holds ? format_double(d.uniform_bound) : "")
                << ',' << (d.fluctuating_bound_holds ? format_double(d.fluctuating_bound) : "") << ',' << d.bad_choices << ','
                << (ok ? 1 : 0) << '\n';
            if (ratio > worst_ratio) {
                worst_ratio = ratio;
                worst = {{"sigma", d.sigma},
                         {"rho", d.rho},
                         {"phi", to_string(d.phi)},
                         {"expected_change", to_string(d.expected_change)},
                         {"pass", ok}};
            }
        }
    }
    write_file(ctx.out_dir / "drift.csv", csv.str());
    Json report = report_header(ctx, "drift");
    report["pairs"] = pairs;
    report["violations"] = violations;
    report["max_bad_choices"] = worst_bad;
    report["worst_relative_drift"] = worst_ratio;
    report["worst_pair"] = worst;
    if (bias.is_uniform()) report["chi_uniform"] = chi_uniform(region->dim(), bias.lower());
    report["chi_fluctuating"] = chi_fluctuating(region->dim(), bias.lower(), bias.upper());
    report["pass"] = violations == 0;
    write_json(ctx.out_dir / "drift.json", report);
    ctx.out << "drift: " << pairs << " adjacent pairs, " << violations << " violations\n";
    return violations == 0 ? exit_ok : exit_verification_failure;
}

int cmd_mix_exact(const Context& ctx)
{
    const Json& c = ctx.config;
    const RegionPtr region = region_from_json(require(c, "region", ""));
    const BiasField bias = bias_from_json(require(c, "bias", ""), region);
    if (!bias.is_exact()) throw ConfigError("/bias", "exact mixing needs rational biases");
    const double eps = c.contains("eps") ? to_double(rational_from_json(c["eps"], "/eps")) : 0.25;
    if (!(eps > 0.0)) throw ConfigError("/eps", "must be positive");
    const ExactModel model = ExactModel::build(region, bias, ctx.cap);
    const MixingTime mix = tv_mixing_time(model, eps, get_u64(c, "budget", "", 10'000'000), ctx.threads);

    std::vector<std::size_t> starts;
    if (model.size() <= 2000) {
        for (std::size_t i = 0; i < model.size(); ++i) starts.push_back(i);
    } else {
        starts = {model.empty_index(), model.full_index()};
    }
    const auto curve = tv_curve<double>(model, starts, mix.tau);
    std::ostringstream csv;
    csv << "t,tv\n";
    for (std::size_t t = 0; t < curve.size(); ++t) csv << t << ',' << format_double(curve[t]) << '\n';
    write_file(ctx.out_dir / "tv.csv", csv.str());

    Json report = report_header(ctx, "mix-exact");
    report["states"] = model.size();
    report["eps"] = eps;
    report["tau"] = mix.tau;
    report["tv_at_tau"] = mix.tv;
    report["lower_bound_only"] = mix.lower_bound_only;
    report["curve_starts"] = starts.size() == model.size() ? "all" : "empty,full";
    write_json(ctx.out_dir / "mix.json", report);
    ctx.out << "mix-exact: tau(" << eps << ") = " << mix.tau << " over " << model.size() << " states\n";
    return exit_ok;
}

Json bottleneck_json(const BottleneckReport& r, const XiTuning& t)
{
    Json j{{"n", r.n},
           {"M", r.m},
           {"eps", fraction(r.eps)},
           {"xi", fraction(r.xi)},
           {"xi_decimal", to_double(r.xi)},
           {"g_low", t.g_low},
           {"g_high", t.g_high},
           {"tuning_residual", t.relative_residual},
           {"states", r.states},
           {"pi_s1", fraction(r.pi_s1)},
           {"pi_s2", fraction(r.pi_s2)},
           {"pi_s3", fraction(r.pi_s3)},
           {"cut_ratio", r.cut_ratio},
           {"phi_s1", fraction(r.cut.conductance)},
           {"phi_s1_decimal", to_double(r.cut.conductance)},
           {"s1_to_s3_blocked", r.s1_to_s3_blocked},
           {"cut_bound_holds", r.cut_bound_holds}};
    if (r.cut.mixing_lower_bound) j["mixing_lower_bound"] = *r.cut.mixing_lower_bound;
    if (r.mixing) j["tau_quarter"] = r.mixing->tau;
    return j;
}

int cmd_slow(const Context& ctx)
{
    const Json& c = ctx.config;
    std::vector<int> ns;
    if (c.contains("ns")) {
        const Json& list = c["ns"];
        if (!list.is_array()) throw ConfigError("/ns", "expected an array of sizes");
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (!list[i].is_number_integer()) throw ConfigError("/ns/" + std::to_string(i), "expected an integer");
            ns.push_back(list[i].get<int>());
        }
    } else {
        require(c, "n", "");
        ns.push_back(static_cast<int>(get_u64(c, "n", "", 4)));
    }
    const double tol = get_double(c, "tol", "", 1e-9);
    Json report = report_header(ctx, "slow");
    Json instances = Json::array();
    std::ostringstream series;
    series << "n,M,xi,pi_s1,pi_s2,pi_s3,cut_ratio,phi_s1,lower_bound,tau\n";
    bool ok = true;
    for (const int n : ns) {
        if (n < 4) throw ConfigError("/n", "slow-mixing instances need n >= 4");
        const SlowCounts counts = slow_counts(n);
        XiTuning tuning;
        try {
            tuning = tune_xi(counts, tol);
        } catch (const BracketFailure& e) {
            instances.push_back({{"n", n}, {"bracket_failure", true}, {"g_low", e.g_low()}, {"g_high", e.g_high()}});
            continue;
        }
        const SlowInstance instance = build_slow_instance(n, tuning.xi);
        if (n > 10) {
            const std::vector<std::uint64_t> seeds = c.contains("seeds") ? seeds_from_json(c, ctx.seed) : std::vector<std::uint64_t>{ctx.seed};
            const SlowSimulation sim = simulate_slow(instance, seeds, get_u64(c, "steps", "", 1'000'000), ctx.threads);
            instances.push_back({{"n", n},
                                 {"mode", "simulation (evidence, not proof)"},
                                 {"xi", fraction(sim.xi)},
                                 {"steps", sim.steps},
                                 {"seeds", sim.seeds},
                                 {"class_fractions_from_empty", sim.from_empty},
                                 {"class_fractions_from_full", sim.from_full},
                                 {"mean_size_from_empty", sim.mean_size_empty},
                                 {"mean_size_from_full", sim.mean_size_full}});
            continue;
        }
        const bool with_mixing = c.contains("mixing") ? c["mixing"].get<bool>() : n <= 7;
        const BottleneckReport r = bottleneck_report(instance, with_mixing, ctx.cap, ctx.threads);
        Json j = bottleneck_json(r, tuning);
        j["mode"] = "exact";
        if (r.mixing && r.cut.mixing_lower_bound) {
            const bool holds = *r.cut.mixing_lower_bound <= static_cast<double>(r.mixing->tau);
            j["lower_bound_le_tau"] = holds;
            ok = ok && holds;
        }
        ok = ok && r.s1_to_s3_blocked && r.cut_bound_holds;
        instances.push_back(j);
        series << n << ',' << r.m << ',' << format_double(to_double(r.xi)) << ',' << format_double(to_double(r.pi_s1)) << ','
               << format_double(to_double(r.pi_s2)) << ',' << format_double(to_double(r.pi_s3)) << ',' << format_double(r.cut_ratio)
               << ',' << format_double(to_double(r.cut.conductance)) << ','
               << (r.cut.mixing_lower_bound ? format_double(*r.cut.mixing_lower_bound) : "") << ','
               << (r.mixing ? std::to_string(r.mixing->tau) : "") << '\n';
    }
    report["instances"] = instances;
    report["pass"] = ok;
    write_json(ctx.out_dir / "slow.json", report);
    write_file(ctx.out_dir / "slow_series.csv", series.str());
    ctx.out << "slow: " << instances.size() << " instance(s) written\n";
    return ok ? exit_ok : exit_verification_failure;
}

int cmd_lemmas(const Context& ctx)
{
    const Json& c = ctx.config;
    const RegionPtr region = region_from_json(require(c, "region", ""));
    const int d = region->dim();
    const BiasField bias = c.contains("bias") ? bias_from_json(c["bias"], region) : BiasField::uniform(region, Rational(d));
    if (!bias.is_exact()) throw ConfigError("/bias", "lemma checks need rational biases");
    Json report = report_header(ctx, "lemmas");
    Json checks = Json::object();
    bool ok = true;
    auto record = [&](const std::string& name, bool pass, Json detail, bool asserted = true) {
        detail["pass"] = pass;
        detail["asserted"] = asserted;
        checks[name] = std::move(detail);
        if (asserted) ok = ok && pass;
    };

    const PeakValleyReport pv = lemma_peak_valley_check(region, ctx.cap);
    record("peak_valley", pv.pass(), {{"states", pv.states_checked}, {"max_excess", pv.max_excess}, {"violations", pv.violations.size()}});

    const ExactModel model = ExactModel::build(region, bias, ctx.cap);
    const ExpMetricParams params = ExpMetricParams::for_bias(*region, bias);
    int worst_bad = 0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < model.size(); ++i) {
        const Downset sigma = model.state(i);
        for (int r = 0; r < region->span(); ++r) {
            if (!can_add(sigma, r)) continue;
            Downset rho = sigma;
            rho.push(r);
            worst_bad = std::max(worst_bad, exact_pair_drift(sigma, rho, bias, params).bad_choices);
            ++pairs;
        }
    }
    record("bad_moves", worst_bad <= d, {{"pairs", pairs}, {"max_bad_choices", worst_bad}, {"limit", d}});

    Rational min_stay = 1;
    for (std::size_t i = 0; i < model.size(); ++i) min_stay = std::min(min_stay, model.self_loop(i));
    record("laziness", 2 * min_stay >= 1, {{"min_self_loop", fraction(min_stay)}});

    const StationaryReport st = stationary_check(model);
    record("stationarity", st.pass(), {{"rows_sum_to_one", st.rows_sum_to_one}, {"invariant", st.invariant}, {"detailed_balance", st.detailed_balance}});

    bool connected = true;
    for (std::size_t i = 0; i < model.size(); ++i) {
        Downset sigma = model.state(i);
        for (int guard = 0; !sigma.is_empty() && guard <= region->volume(); ++guard) {
            const auto ps = peaks(sigma);
            const CubeId top = *std::max_element(ps.begin(), ps.end(), [&](CubeId a, CubeId b) { return region->l1_norm(a) < region->l1_norm(b); });
            sigma.pop(region->ray_of(top));
        }
        connected = connected && sigma.is_empty();
    }
    record("connectivity", connected, {{"states", model.size()}});

    const MonotonicityReport mono = monotonicity_exhaustive(region, bias, std::min<std::uint64_t>(ctx.cap, 2000));
    record("monotonicity", mono.pass(), {{"pairs", mono.pairs}, {"draws", mono.draws}, {"violations", mono.violations}});

    const bool above_d = bias.exact_lower() >= d;
    const MaxDriftReport mdr = drift_toward_max_check(region, bias, ctx.cap);
    record("drift_toward_max", mdr.pass(), {{"states", mdr.states_checked}, {"min_gap", fraction(mdr.min_gap)}}, above_d);

    const PotentialDriftReport pdr = potential_drift_check(region, bias, ctx.cap);
    Json offenders = Json::array();
    for (const auto& [counts, drift] : pdr.violations) offenders.push_back({{"counts", counts}, {"drift", fraction(drift)}});
    record("potential_drift", pdr.pass(),
           {{"states", pdr.states_checked}, {"target", fraction(pdr.target)}, {"max_drift", fraction(pdr.max_drift)},
            {"violations", pdr.violations.size()}, {"violating_states", offenders}},
           false);

    report["checks"] = checks;
    report["pass"] = ok;
    write_json(ctx.out_dir / "lemmas.json", report);
    ctx.out << "lemmas: " << (ok ? "all asserted checks pass" : "verification failure") << '\n';
    return ok ? exit_ok : exit_verification_failure;
}

const std::map<std::string, std::function<int(const Context&)>>& dispatch()
{
    static const std::map<std::string, std::function<int(const Context&)>> table{
        {"sample", cmd_sample}, {"couple", cmd_couple},       {"hit", cmd_hit},       {"drift", cmd_drift},
        {"mix-exact", cmd_mix_exact}, {"slow", cmd_slow}, {"lemmas", cmd_lemmas},
    };
    return table;
}

} // namespace

const std::vector<std::string>& command_names()
{
    static const std::vector<std::string> names{"sample", "couple", "hit", "drift", "mix-exact", "slow", "lemmas"};
    return names;
}

std::uint64_t enumeration_cap(const Json& config)
{
    if (const char* env = std::getenv("SURFMIX_ENUM_CAP"); env && *env) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw ConfigError("$SURFMIX_ENUM_CAP", "expected a nonnegative integer");
        }
    }
    return get_u64(config, "cap", "", default_enumeration_cap);
}

int run_command(const std::string& name, const CommandOptions& options, std::ostream& out, std::ostream& err)
{
    const auto it = dispatch().find(name);
    if (it == dispatch().end()) {
        err << "unknown subcommand " << name << '\n';
        return exit_config_error;
    }
    try {
        Json config = load_json(options.config);
        if (!config.is_object()) throw ConfigError("", "config must be a JSON object");
        std::filesystem::create_directories(options.out_dir);
        const Context ctx{config,
                          config_hash(config),
                          options.seed.value_or(get_u64(config, "seed", "", 0)),
                          options.threads,
                          options.out_dir,
                          enumeration_cap(config),
                          out};
        return it->second(ctx);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config_error;
    } catch (const Json::exception& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config_error;
    } catch (const EnumerationTooLarge& e) {
        err << "resource cap: " << e.what() << '\n';
        return exit_resource_cap;
    } catch (const BudgetExceeded& e) {
        err << "resource cap: " << e.what() << '\n';
        return exit_resource_cap;
    } catch (const std::invalid_argument& e) {
        err << "invalid input: " << e.what() << '\n';
        return exit_config_error;
    } catch (const std::domain_error& e) {
        err << "invalid input: " << e.what() << '\n';
        return exit_config_error;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return exit_internal_error;
    }
}

} // namespace surfmix
