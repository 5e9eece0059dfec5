#include "surfmix/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "surfmix/parallel.hpp"

namespace surfmix {

namespace {

std::optional<std::uint64_t> first_coalescence(CoupledPair pair, const BiasField& bias, std::uint64_t seed, std::uint64_t max_steps)
{
    const int alpha = pair.sigma.region().span();
    for (std::uint64_t t = 0; t < max_steps; ++t) {
        if (pair.coalesced()) return t;
        coupled_advance(pair, draw_move(seed, t, alpha), bias);
    }
    if (pair.coalesced()) return max_steps;
    return std::nullopt;
}

} // namespace

TimeSummary summarize_times(std::vector<std::uint64_t> seeds, std::vector<std::optional<std::uint64_t>> times, std::uint64_t max_steps)
{
    TimeSummary s;
    s.seeds = std::move(seeds);
    s.times = std::move(times);
    s.max_steps = max_steps;
    std::vector<std::uint64_t> done;
    for (const auto& t : s.times) {
        if (t) done.push_back(*t);
        else ++s.timeouts;
    }
    if (!done.empty()) {
        std::sort(done.begin(), done.end());
        s.mean = std::accumulate(done.begin(), done.end(), 0.0) / static_cast<double>(done.size());
        const std::size_t m = done.size() / 2;
        s.median = done.size() % 2 ? static_cast<double>(done[m]) : 0.5 * static_cast<double>(done[m - 1] + done[m]);
        s.max = done.back();
    }
    return s;
}

TimeSummary coupling_time(const RegionPtr& region, const BiasField& bias, std::span<const std::uint64_t> seeds,
                          std::uint64_t max_steps, unsigned threads, const std::optional<CoupledPair>& start)
{
    const CoupledPair initial = start.value_or(CoupledPair{Downset::empty(region), Downset::full(region)});
    if (&initial.sigma.region() != region.get() || &initial.rho.region() != region.get())
        throw std::invalid_argument("start pair lives on a different region");
    std::vector<std::optional<std::uint64_t>> times(seeds.size());
    parallel_for(seeds.size(), threads, [&](std::size_t i) { times[i] = first_coalescence(initial, bias, seeds[i], max_steps); });
    return summarize_times({seeds.begin(), seeds.end()}, std::move(times), max_steps);
}

TimeSummary hitting_time_to_full(const RegionPtr& region, const BiasField& bias, std::span<const std::uint64_t> seeds,
                                 std::uint64_t max_steps, unsigned threads)
{
    const int alpha = region->span();
    std::vector<std::optional<std::uint64_t>> times(seeds.size());
    parallel_for(seeds.size(), threads, [&](std::size_t i) {
        Downset sigma = Downset::empty(region);
        for (std::uint64_t t = 0; t <= max_steps; ++t) {
            if (sigma.is_full()) {
                times[i] = t;
                return;
            }
            if (t == max_steps) return;
            apply_step(sigma, draw_move(seeds[i], t, alpha), bias);
        }
    });
    return summarize_times({seeds.begin(), seeds.end()}, std::move(times), max_steps);
}

DominationReport hitting_domination(const RegionPtr& region, const BiasField& high, const BiasField& low,
                                    std::span<const std::uint64_t> seeds, std::uint64_t max_steps, unsigned threads)
{
    if (high.volume() != region->volume() || low.volume() != region->volume())
        throw std::invalid_argument("bias fields do not match the region");
    for (CubeId c = 0; c < region->volume(); ++c)
        if (low.lambda(c) > high.lambda(c)) throw std::invalid_argument("low bias field exceeds the high one at some site");

    const int alpha = region->span();
    DominationReport report;
    report.seeds.assign(seeds.begin(), seeds.end());
    report.high_times.resize(seeds.size());
    report.low_times.resize(seeds.size());
    std::vector<char> order_broken(seeds.size(), 0);
    parallel_for(seeds.size(), threads, [&](std::size_t i) {
        Downset upper = Downset::empty(region), lower = Downset::empty(region);
        for (std::uint64_t t = 0; t <= max_steps; ++t) {
            if (!report.high_times[i] && upper.is_full()) report.high_times[i] = t;
            if (!report.low_times[i] && lower.is_full()) report.low_times[i] = t;
            if (report.low_times[i] || t == max_steps) break;
            const MoveDraw draw = draw_move(seeds[i], t, alpha);
            apply_step(upper, draw, high);
            apply_step(lower, draw, low);
            if (!lower.is_subset_of(upper)) order_broken[i] = 1;
        }
    });
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        report.order_violations += order_broken[i];
        const auto& h = report.high_times[i];
        const auto& l = report.low_times[i];
        if (l && (!h || *h > *l)) ++report.time_violations;
    }
    return report;
}

SandwichReport sandwich_check(const RegionPtr& region, const BiasField& bias, const CoupledPair& inner,
                              std::span<const std::uint64_t> seeds, std::uint64_t max_steps)
{
    if (!inner.sigma.is_subset_of(inner.rho)) throw std::invalid_argument("sandwich check needs sigma subset of rho");
    const CoupledPair outer{Downset::empty(region), Downset::full(region)};
    SandwichReport report;
    for (const auto seed : seeds) {
        const auto t_outer = first_coalescence(outer, bias, seed, max_steps);
        const auto t_inner = first_coalescence(inner, bias, seed, max_steps);
        ++report.runs;
        if (t_outer && (!t_inner || *t_inner > *t_outer)) ++report.violations;
    }
    return report;
}

MaxDrift drift_toward_max(const Downset& sigma, const BiasField& bias)
{
    const Rational choice(1, 2 * sigma.region().span());
    MaxDrift out{Rational(valley_count(sigma)) * choice, 0};
    for (const CubeId v : peaks(sigma)) out.down += choice / bias.exact_lambda(v);
    return out;
}

MaxDriftReport drift_toward_max_check(const RegionPtr& region, const BiasField& bias, std::uint64_t cap)
{
    MaxDriftReport report;
    for (auto& counts : enumerate_downsets(*region, cap)) {
        const Downset sigma = Downset::from_counts(region, counts);
        if (sigma.is_full()) continue;
        const Rational gap = drift_toward_max(sigma, bias).gap();
        ++report.states_checked;
        report.min_gap = std::min(report.min_gap, gap);
        if (gap < 0) report.violations.push_back(std::move(counts));
    }
    return report;
}

DriftClass drift_class(const Downset& sigma)
{
    if (sigma.is_full()) return DriftClass::C1;
    return peak_count(sigma) == sigma.region().dim() * valley_count(sigma) ? DriftClass::C2 : DriftClass::C1;
}

Rational hitting_potential(const Downset& sigma)
{
    Rational h(sigma.region().volume() - sigma.size());
    if (drift_class(sigma) == DriftClass::C2) h += Rational(1, 2 * sigma.region().dim());
    return h;
}

PotentialDriftReport potential_drift_check(const RegionPtr& region, const BiasField& bias, std::uint64_t cap)
{
    const int alpha = region->span();
    const int d = region->dim();
    const Rational choice(1, 2 * alpha);
    PotentialDriftReport report;
    report.target = Rational(-1, 4 * alpha * d);
    bool first = true;
    for (auto& counts : enumerate_downsets(*region, cap)) {
        const Downset sigma = Downset::from_counts(region, counts);
        if (sigma.is_full()) continue;
        const Rational here = hitting_potential(sigma);
        Rational drift = 0;
        for (int r = 0; r < alpha; ++r) {
            if (can_add(sigma, r)) {
                Downset tau = sigma;
                tau.push(r);
                drift += choice * (hitting_potential(tau) - here);
            }
            if (auto v = can_remove(sigma, r)) {
                Downset tau = sigma;
                tau.pop(r);
                drift += choice / bias.exact_lambda(*v) * (hitting_potential(tau) - here);
            }
        }
        ++report.states_checked;
        if (first || drift > report.max_drift) report.max_drift = drift;
        first = false;
        if (drift > report.target) report.violations.emplace_back(std::move(counts), drift);
    }
    return report;
}

std::vector<double> threshold_grid(const BiasField& bias)
{
    std::set<double> grid{0.5};
    for (CubeId c = 0; c < bias.volume(); ++c) {
        const double v = bias.inverse(c);
        for (const double p : {v, std::nextafter(v, 0.0), std::nextafter(v, 2.0)})
            if (p > 0.0 && p < 1.0) grid.insert(p);
    }
    return {grid.begin(), grid.end()};
}

MonotonicityReport monotonicity_exhaustive(const RegionPtr& region, const BiasField& bias, std::uint64_t cap)
{
    std::vector<Downset> states;
    for (auto& counts : enumerate_downsets(*region, cap)) states.push_back(Downset::from_counts(region, std::move(counts)));
    const auto grid = threshold_grid(bias);
    const int alpha = region->span();

    MonotonicityReport report;
    for (const auto& sigma : states) {
        for (const auto& rho : states) {
            if (!sigma.is_subset_of(rho)) continue;
            ++report.pairs;
            for (int r = 0; r < alpha; ++r) {
                for (const int b : {1, -1}) {
                    for (const double p : grid) {
                        const MoveDraw draw{r, b, p};
                        ++report.draws;
                        if (!step(sigma, draw, bias).is_subset_of(step(rho, draw, bias))) ++report.violations;
                    }
                }
            }
        }
    }
    return report;
}

MonotonicityReport monotonicity_random(const RegionPtr& region, const BiasField& bias, std::uint64_t draws, std::uint64_t seed)
{
    const int alpha = region->span();
    const BiasField flat = BiasField::uniform(region, 1.0);
    const std::uint64_t seed_a = replica_seed(seed, 0), seed_b = replica_seed(seed, 1), seed_c = replica_seed(seed, 2);
    const auto grid = threshold_grid(bias);

    Downset a = Downset::empty(region), b = Downset::full(region);
    const std::uint64_t warmup = 50ull * static_cast<std::uint64_t>(region->volume());
    for (std::uint64_t t = 0; t < warmup; ++t) {
        apply_step(a, draw_move(seed_a, t, alpha), flat);
        apply_step(b, draw_move(seed_b, t, alpha), flat);
    }

    MonotonicityReport report;
    std::vector<int> meet(alpha);
    for (std::uint64_t k = 0; k < draws; ++k) {
        apply_step(a, draw_move(seed_a, warmup + k, alpha), flat);
        apply_step(b, draw_move(seed_b, warmup + k, alpha), flat);
        for (int r = 0; r < alpha; ++r) meet[r] = std::min(a.count(r), b.count(r));
        const Downset sigma = Downset::from_counts(region, meet);

        MoveDraw draw = draw_move(seed_c, k, alpha);
        // every other draw lands exactly on a decision threshold
        if (k % 2 == 1) draw.p = grid[bounded(counter_hash(seed_c ^ 0x9E3779B97F4A7C15ull, k), static_cast<int>(grid.size()))];
        ++report.pairs;
        ++report.draws;
        if (!step(sigma, draw, bias).is_subset_of(step(a, draw, bias))) ++report.violations;
    }
    return report;
}

} // namespace surfmix
