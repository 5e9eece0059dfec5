#include "surfmix/slow.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "surfmix/parallel.hpp"

namespace surfmix {

namespace {

using Float = boost::multiprecision::cpp_bin_float_50;

Float to_float(const Rational& r) { return Float(numerator(r)) / Float(denominator(r)); }
Float to_float(const BigInt& b) { return Float(b); }

/// Column heights c_1 >= ... >= c_n of a downset of the n x n square.
std::vector<int> column_heights(const Downset& sigma)
{
    const Region& region = sigma.region();
    if (region.dim() != 2 || !region.is_rectangle() || region.dims()[0] != region.dims()[1])
        throw std::invalid_argument("slow-mixing walks need a downset of an n x n square");
    const int n = region.dims()[0];
    std::vector<int> heights(n, 0);
    for (const CubeId c : sigma.cubes()) {
        const auto p = region.coords(c);
        heights[p[0] - 1] = std::max(heights[p[0] - 1], p[1]);
    }
    return heights;
}

} // namespace

int slow_threshold(int n)
{
    if (n < 1) throw std::invalid_argument("n must be positive");
    int root = static_cast<int>(std::sqrt(static_cast<double>(n)));
    while (root * root < n) ++root;
    while (root > 0 && (root - 1) * (root - 1) >= n) --root;
    return n - root;
}

double xi_upper_bracket() { return 4.0 * std::exp(2.5); }

bool SlowInstance::is_high(CubeId c) const { return region->l1_norm(c) > n + m; }

SlowInstance build_slow_instance(int n, std::optional<Rational> xi)
{
    if (n < 4) throw std::invalid_argument("slow-mixing instances need n >= 4");
    const int m = slow_threshold(n);
    const Rational eps(1, 4 * n);
    const Rational high = xi.value_or(rational_from_double((to_double(1 + eps) + xi_upper_bracket()) / 2.0));
    if (high < 1 + eps) throw std::invalid_argument("xi must be at least 1 + eps");
    RegionPtr region = make_rectangle({n, n});
    std::vector<Rational> lambdas(region->volume());
    for (CubeId c = 0; c < region->volume(); ++c) lambdas[c] = region->l1_norm(c) > n + m ? high : 1 + eps;
    BiasField bias = BiasField::per_site(region, std::move(lambdas));
    return SlowInstance{n, m, eps, high, std::move(region), std::move(bias)};
}

std::vector<int> staircase_walk(const Downset& sigma)
{
    const auto heights = column_heights(sigma);
    const int n = static_cast<int>(heights.size());
    std::vector<int> walk;
    walk.reserve(2 * n);
    int previous = n;
    for (const int c : heights) {
        walk.insert(walk.end(), previous - c, -1);
        walk.push_back(+1);
        previous = c;
    }
    walk.insert(walk.end(), previous, -1);
    return walk;
}

int max_height(std::span<const int> walk)
{
    int h = 0, best = 0;
    for (const int s : walk) best = std::max(best, h += s);
    return best;
}

int max_height(const Downset& sigma) { return max_height(staircase_walk(sigma)); }

WalkClass classify(const Downset& sigma, int threshold)
{
    const int h = max_height(sigma);
    if (h < threshold) return WalkClass::S1;
    return h == threshold ? WalkClass::S2 : WalkClass::S3;
}

BigInt SlowCounts::total() const
{
    BigInt t = 0;
    for (const auto& c : s1) t += c;
    for (const auto& c : s2) t += c;
    for (const auto& [key, c] : s3) t += c;
    return t;
}

SlowCounts slow_counts(int n)
{
    if (n < 1) throw std::invalid_argument("n must be positive");
    const int m = slow_threshold(n);
    // state: previous column height, low cubes, high cubes, some column top at x + c == n + M
    using Key = std::array<int, 4>;
    std::map<Key, BigInt> layer{{Key{n, 0, 0, 0}, BigInt(1)}};
    for (int x = 1; x <= n; ++x) {
        const int low_limit = std::clamp(n + m - x, 0, n);
        std::map<Key, BigInt> next;
        for (const auto& [key, ways] : layer) {
            for (int c = 0; c <= key[0]; ++c) {
                const int a = std::min(c, low_limit);
                const int touched = key[3] || (c > 0 && x + c == n + m);
                next[Key{c, key[1] + a, key[2] + (c - a), touched}] += ways;
            }
        }
        layer = std::move(next);
    }
    SlowCounts out;
    out.n = n;
    out.m = m;
    out.s1.assign(static_cast<std::size_t>(n) * n + 1, BigInt(0));
    out.s2.assign(static_cast<std::size_t>(n) * n + 1, BigInt(0));
    for (const auto& [key, ways] : layer) {
        const int low = key[1], high = key[2];
        if (high > 0) out.s3[{low, high}] += ways;
        else if (key[3]) out.s2[low] += ways;
        else out.s1[low] += ways;
    }
    return out;
}

ClassMass class_mass(const SlowCounts& counts, const Rational& eps, const Rational& xi)
{
    const Rational base = 1 + eps;
    ClassMass out{0, 0, 0};
    Rational power = 1;
    for (std::size_t k = 0; k < counts.s1.size(); ++k) {
        out.s1 += Rational(counts.s1[k]) * power;
        out.s2 += Rational(counts.s2[k]) * power;
        power *= base;
    }
    for (const auto& [key, ways] : counts.s3)
        out.s3 += Rational(ways) * rational_pow(base, static_cast<unsigned>(key.first)) * rational_pow(xi, static_cast<unsigned>(key.second));
    return out;
}

BracketFailure::BracketFailure(double g_low, double g_high)
    : std::runtime_error("g(xi) does not change sign on the bracket: g(1+eps) = " + std::to_string(g_low) +
                         ", g(4e^2.5) = " + std::to_string(g_high)),
      g_low_(g_low), g_high_(g_high)
{
}

namespace {

Float g_value(const SlowCounts& counts, const Rational& eps, const Float& xi)
{
    const Float base = to_float(1 + eps);
    Float s1 = 0, s3 = 0, power = 1;
    for (const auto& c : counts.s1) {
        s1 += to_float(c) * power;
        power *= base;
    }
    for (const auto& [key, ways] : counts.s3) s3 += to_float(ways) * pow(base, key.first) * pow(xi, key.second);
    return s3 - exp(Float(1)) * s1;
}

} // namespace

double slow_g(const SlowCounts& counts, const Rational& eps, double xi) { return g_value(counts, eps, Float(xi)).convert_to<double>(); }

XiTuning tune_xi(int n, double tol) { return tune_xi(slow_counts(n), tol); }

XiTuning tune_xi(const SlowCounts& counts, double tol)
{
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    const Rational eps(1, 4 * counts.n);
    Float lo = to_float(1 + eps);
    Float hi = 4 * exp(Float(2.5));
    XiTuning out;
    out.n = counts.n;
    const Float g_lo = g_value(counts, eps, lo);
    const Float g_hi = g_value(counts, eps, hi);
    out.g_low = g_lo.convert_to<double>();
    out.g_high = g_hi.convert_to<double>();
    if (!(g_lo < 0 && g_hi > 0)) throw BracketFailure(out.g_low, out.g_high);

    while (hi - lo > tol * lo) {
        const Float mid = (lo + hi) / 2;
        if (g_value(counts, eps, mid) < 0) lo = mid;
        else hi = mid;
        ++out.iterations;
    }
    out.xi = rational_from_double(((lo + hi) / 2).convert_to<double>());
    const ClassMass mass = class_mass(counts, eps, out.xi);
    const Float ratio = to_float(mass.s3 / mass.s1);
    out.relative_residual = abs(ratio - exp(Float(1))).convert_to<double>();
    return out;
}

BottleneckReport bottleneck_report(const SlowInstance& instance, bool with_mixing, std::uint64_t cap, unsigned threads)
{
    const ExactModel model = ExactModel::build(instance.region, instance.bias, cap);
    BottleneckReport r;
    r.n = instance.n;
    r.m = instance.m;
    r.eps = instance.eps;
    r.xi = instance.xi;
    r.states = model.size();

    std::vector<WalkClass> cls(model.size());
    std::vector<bool> in_s1(model.size());
    Rational w1 = 0, w2 = 0, w3 = 0;
    for (std::size_t i = 0; i < model.size(); ++i) {
        cls[i] = classify(model.state(i), instance.m);
        in_s1[i] = cls[i] == WalkClass::S1;
        (cls[i] == WalkClass::S1 ? w1 : cls[i] == WalkClass::S2 ? w2 : w3) += model.weight(i);
    }
    const Rational& z = model.partition_function();
    r.pi_s1 = w1 / z;
    r.pi_s2 = w2 / z;
    r.pi_s3 = w3 / z;
    r.cut_ratio = to_double(r.pi_s2 / std::min(r.pi_s1, r.pi_s3));

    for (std::size_t i = 0; i < model.size(); ++i) {
        if (cls[i] != WalkClass::S1) continue;
        for (const auto& t : model.transitions(i))
            if (cls[t.to] == WalkClass::S3) r.s1_to_s3_blocked = false;
    }
    r.cut = conductance_of_cut(model, in_s1);
    r.cut_bound_holds = r.cut.conductance <= r.pi_s2 / r.pi_s1;
    if (with_mixing) r.mixing = tv_mixing_time(model, 0.25, 10'000'000, threads);
    return r;
}

SlowSimulation simulate_slow(const SlowInstance& instance, std::span<const std::uint64_t> seeds, std::uint64_t steps, unsigned threads)
{
    if (steps < 2) throw std::invalid_argument("simulation needs at least 2 steps");
    const int alpha = instance.region->span();
    const std::uint64_t half = steps / 2;
    const std::uint64_t stride = std::max<std::uint64_t>(1, half / 1000);

    struct Tally {
        std::array<double, 3> classes{};
        double size = 0.0;
        double samples = 0.0;
    };
    std::vector<std::array<Tally, 2>> tallies(seeds.size());
    parallel_for(seeds.size(), threads, [&](std::size_t i) {
        for (int which = 0; which < 2; ++which) {
            Downset sigma = which == 0 ? Downset::empty(instance.region) : Downset::full(instance.region);
            Tally& t = tallies[i][which];
            for (std::uint64_t s = 0; s < steps; ++s) {
                apply_step(sigma, draw_move(seeds[i], s, alpha), instance.bias);
                if (s >= half && (s - half) % stride == 0) {
                    t.classes[static_cast<int>(classify(sigma, instance.m))] += 1.0;
                    t.size += sigma.size();
                    t.samples += 1.0;
                }
            }
        }
    });

    SlowSimulation out;
    out.n = instance.n;
    out.xi = instance.xi;
    out.steps = steps;
    out.seeds = seeds.size();
    double samples[2] = {0.0, 0.0};
    for (const auto& pair : tallies) {
        for (int k = 0; k < 3; ++k) {
            out.from_empty[k] += pair[0].classes[k];
            out.from_full[k] += pair[1].classes[k];
        }
        out.mean_size_empty += pair[0].size;
        out.mean_size_full += pair[1].size;
        samples[0] += pair[0].samples;
        samples[1] += pair[1].samples;
    }
    for (int k = 0; k < 3; ++k) {
        out.from_empty[k] /= samples[0];
        out.from_full[k] /= samples[1];
    }
    out.mean_size_empty /= samples[0];
    out.mean_size_full /= samples[1];
    return out;
}

} // namespace surfmix
