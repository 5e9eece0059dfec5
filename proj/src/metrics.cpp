#include "surfmix/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace surfmix {

namespace {

using ExtendedNumber = Surd<QuadraticNumber>;

/// Calls f(cube) for every cube of sigma (+) rho.
template <class F>
void for_each_difference(const Downset& sigma, const Downset& rho, F&& f)
{
    const Region& region = sigma.region();
    for (int r = 0; r < region.span(); ++r) {
        const int lo = std::min(sigma.count(r), rho.count(r));
        const int hi = std::max(sigma.count(r), rho.count(r));
        for (int k = lo; k < hi; ++k) f(region.cube_at(r, k));
    }
}

ExtendedNumber lift(const QuadraticNumber& q, const Rational& inner_radicand)
{
    return ExtendedNumber(QuadraticNumber(q.rational_part(), 0, inner_radicand), QuadraticNumber(q.root_part(), 0, inner_radicand),
                          q.radicand());
}

} // namespace

int hamming(const Downset& sigma, const Downset& rho)
{
    int h = 0;
    for (int r = 0; r < sigma.region().span(); ++r) h += std::abs(sigma.count(r) - rho.count(r));
    return h;
}

ExpMetricParams ExpMetricParams::uniform(const Region& region, const Rational& lambda)
{
    if (lambda < 1) throw DomainError("metric base mu^2 must be at least 1");
    return {lambda, std::sqrt(to_double(lambda)), region.max_l1_norm()};
}

ExpMetricParams ExpMetricParams::for_bias(const Region& region, const BiasField& bias)
{
    if (bias.is_exact()) return uniform(region, bias.exact_lower());
    return from_double(region, bias.lower());
}

ExpMetricParams ExpMetricParams::from_double(const Region& region, double mu_squared)
{
    if (!(mu_squared >= 1.0)) throw DomainError("metric base mu^2 must be at least 1");
    return {rational_from_double(mu_squared), std::sqrt(mu_squared), region.max_l1_norm()};
}

QuadraticNumber mu_power(const ExpMetricParams& params, int k)
{
    if (k < 0) throw DomainError("negative metric exponent");
    const Rational half = rational_pow(params.mu_squared, static_cast<unsigned>(k / 2));
    if (k % 2 == 0) return QuadraticNumber(half, 0, params.mu_squared);
    return QuadraticNumber(0, half, params.mu_squared);
}

double exp_metric(const Downset& sigma, const Downset& rho, const ExpMetricParams& params)
{
    const Region& region = sigma.region();
    double phi = 0.0;
    for_each_difference(sigma, rho, [&](CubeId c) { phi += std::pow(params.mu, metric_exponent(region, c, params)); });
    return phi;
}

double log_exp_metric(const Downset& sigma, const Downset& rho, const ExpMetricParams& params)
{
    const Region& region = sigma.region();
    const double log_mu = std::log(params.mu);
    int top = std::numeric_limits<int>::min();
    for_each_difference(sigma, rho, [&](CubeId c) { top = std::max(top, metric_exponent(region, c, params)); });
    if (top == std::numeric_limits<int>::min()) return -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for_each_difference(sigma, rho, [&](CubeId c) { sum += std::exp((metric_exponent(region, c, params) - top) * log_mu); });
    return top * log_mu + std::log(sum);
}

QuadraticNumber exact_exp_metric(const Downset& sigma, const Downset& rho, const ExpMetricParams& params)
{
    const Region& region = sigma.region();
    // sum even and odd exponents separately: mu^(2j) = (mu^2)^j, mu^(2j+1) = (mu^2)^j mu
    std::vector<int> multiplicity;
    for_each_difference(sigma, rho, [&](CubeId c) {
        const int k = metric_exponent(region, c, params);
        if (k < 0) throw DomainError("negative metric exponent");
        if (static_cast<int>(multiplicity.size()) <= k) multiplicity.resize(k + 1, 0);
        ++multiplicity[k];
    });
    Rational even = 0, odd = 0, power = 1;
    for (std::size_t k = 0; k < multiplicity.size(); k += 2) {
        even += power * multiplicity[k];
        if (k + 1 < multiplicity.size()) odd += power * multiplicity[k + 1];
        power *= params.mu_squared;
    }
    return QuadraticNumber(even, odd, params.mu_squared);
}

double metric_upper_bound(const Region& region, const ExpMetricParams& params)
{
    int lowest = std::numeric_limits<int>::max();
    for (CubeId c = 0; c < region.volume(); ++c) lowest = std::min(lowest, region.l1_norm(c));
    return region.volume() * std::pow(params.mu, params.x0_norm - lowest);
}

double contraction_root(int d)
{
    if (d < 2) throw DomainError("contraction root needs d >= 2");
    return (d - std::sqrt(static_cast<double>(d) * d - 4.0)) / 2.0;
}

double chi_uniform(int d, double lambda)
{
    if (!(lambda >= 1.0)) throw DomainError("lambda must be at least 1");
    return contraction_root(d) - 1.0 / std::sqrt(lambda);
}

double chi_2d(double lambda)
{
    if (!(lambda >= 1.0)) throw DomainError("lambda must be at least 1");
    return std::sqrt(lambda) - 1.0;
}

double chi_fluctuating(int d, double lambda_low, double lambda_high)
{
    return 1.0 + 1.0 / lambda_high - d / std::sqrt(lambda_low);
}

double psi(double phi)
{
    if (phi == 0.0) return -2.0 * std::log(2.0);
    if (phi < 1.0) throw DomainError("metric value " + std::to_string(phi) + " lies in the forbidden gap (0, 1)");
    return std::log(phi);
}

DriftReport exact_pair_drift(const Downset& sigma, const Downset& rho, const BiasField& bias, const ExpMetricParams& params)
{
    if (const int h = hamming(sigma, rho); h != 1) throw NotAdjacent(h);
    const Region& region = sigma.region();
    const int alpha = region.span();
    const int d = region.dim();

    DriftReport report;
    report.sigma.assign(sigma.counts().begin(), sigma.counts().end());
    report.rho.assign(rho.counts().begin(), rho.counts().end());
    report.span = alpha;
    report.phi = exact_exp_metric(sigma, rho, params);
    report.expected_change = QuadraticNumber(0, 0, params.mu_squared);

    int last_bad_ray = -1, last_bad_dir = 0;
    for (const auto& outcome : coupled_outcomes(sigma, rho, bias)) {
        const QuadraticNumber change = exact_exp_metric(outcome.sigma, outcome.rho, params) - report.phi;
        report.expected_change += change * outcome.probability;
        if (exact_sign(change) > 0) {
            report.increasing_moves.push_back({outcome.ray, outcome.direction, outcome.probability, change});
            if (outcome.ray != last_bad_ray || outcome.direction != last_bad_dir) ++report.bad_choices;
            last_bad_ray = outcome.ray;
            last_bad_dir = outcome.direction;
        }
    }

    const Rational two_alpha(2 * alpha);
    const QuadraticNumber scaled = report.expected_change * two_alpha; // 2 alpha E[dphi]

    // uniform case: chi = r - 1/mu, r = (d - sqrt(d^2 - 4)) / 2
    if (d >= 2 && bias.is_exact() && bias.is_uniform() && bias.exact_lower() == params.mu_squared) {
        const Rational lambda = params.mu_squared;
        const Rational disc(d * d - 4);
        const QuadraticNumber root(Rational(d, 2), Rational(-1, 2), disc);
        const ExtendedNumber chi(root, QuadraticNumber(-1 / lambda, 0, disc), lambda);
        const double chi_value = chi_uniform(d, to_double(lambda));
        if (exact_sign(chi) >= 0) {
            const ExtendedNumber chi_sq = chi * chi;
            const ExtendedNumber lhs = lift(scaled, disc) + lift(report.phi, disc) * chi_sq;
            report.uniform_bound_holds = exact_sign(lhs) <= 0;
            report.uniform_bound = -to_double(report.phi) * chi_value * chi_value / (2.0 * alpha);
        }
    }

    // fluctuating case: chi = 1 + 1/lambda_U - d/mu with mu^2 = lambda_L
    if (bias.is_exact() && bias.exact_lower() == params.mu_squared) {
        const QuadraticNumber chi(1 + 1 / bias.exact_upper(), Rational(-d) / params.mu_squared, params.mu_squared);
        if (exact_sign(chi) >= 0) {
            report.fluctuating_bound_holds = exact_sign(scaled + report.phi * chi) <= 0;
            report.fluctuating_bound = -to_double(report.phi) * to_double(chi) / (2.0 * alpha);
        }
    }
    return report;
}

VarianceReport variance_condition_check(const RegionPtr& region, const BiasField& bias, const ExpMetricParams& params,
                                        const Rational& eta, const Rational& kappa, std::uint64_t state_cap,
                                        std::uint64_t pair_cap, std::uint64_t seed)
{
    const auto states = enumerate_downsets(*region, state_cap);
    const std::uint64_t n = states.size();
    VarianceReport report;
    report.eta = eta;
    report.kappa = kappa;

    auto check_pair = [&](std::size_t i, std::size_t j) {
        const Downset sigma = Downset::from_counts(region, states[i]);
        const Downset rho = Downset::from_counts(region, states[j]);
        const QuadraticNumber phi = exact_exp_metric(sigma, rho, params);
        const QuadraticNumber threshold = phi * eta;
        Rational mass = 0;
        for (const auto& outcome : coupled_outcomes(sigma, rho, bias)) {
            const QuadraticNumber change = exact_exp_metric(outcome.sigma, outcome.rho, params) - phi;
            if (exact_sign(change - threshold) >= 0 || exact_sign(-change - threshold) >= 0) mass += outcome.probability;
        }
        ++report.pairs_checked;
        report.min_probability = std::min(report.min_probability, mass);
        if (mass < kappa) report.violations.emplace_back(states[i], states[j]);
    };

    const std::uint64_t all_pairs = n * (n - 1) / 2;
    if (all_pairs <= pair_cap) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) check_pair(i, j);
    } else {
        report.sampled = true;
        for (std::uint64_t k = 0; k < pair_cap; ++k) {
            const auto i = static_cast<std::size_t>(bounded(counter_hash(seed, 2 * k), static_cast<int>(n)));
            auto j = static_cast<std::size_t>(bounded(counter_hash(seed, 2 * k + 1), static_cast<int>(n - 1)));
            if (j >= i) ++j;
            check_pair(i, j);
        }
    }
    return report;
}

} // namespace surfmix
