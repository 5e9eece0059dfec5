#ifndef SURFMIX_METRICS_HPP
#define SURFMIX_METRICS_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "surfmix/dynamics.hpp"
#include "surfmix/region.hpp"
#include "surfmix/surd.hpp"

namespace surfmix {

class NotAdjacent : public std::invalid_argument {
public:
    explicit NotAdjacent(int distance)
        : std::invalid_argument("downsets differ in " + std::to_string(distance) + " cubes, expected exactly 1") {}
};

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// |sigma (+) rho|
int hamming(const Downset& sigma, const Downset& rho);

/// Parameters of the exponential metric: cube x weighs mu^(||x0||_1 - ||x||_1).
struct ExpMetricParams {
    /// mu^2, exact. lambda for a uniform field, lambda_L for a fluctuating one.
    Rational mu_squared = 1;
    double mu = 1.0;
    int x0_norm = 0;

    static ExpMetricParams uniform(const Region& region, const Rational& lambda);
    /// mu^2 = lambda_L of the field (exact when the field is).
    static ExpMetricParams for_bias(const Region& region, const BiasField& bias);
    /// Simulation-only parameters; mu_squared is the exact value of the double.
    static ExpMetricParams from_double(const Region& region, double mu_squared);
};

/// Exponent ||x0||_1 - ||x||_1 of cube c.
inline int metric_exponent(const Region& region, CubeId c, const ExpMetricParams& params)
{
    return params.x0_norm - region.l1_norm(c);
}

/// Exact mu^k in Q(sqrt(mu^2)).
QuadraticNumber mu_power(const ExpMetricParams& params, int k);

double exp_metric(const Downset& sigma, const Downset& rho, const ExpMetricParams& params);
/// ln phi evaluated with a shifted sum of exponentials; -infinity when sigma == rho.
double log_exp_metric(const Downset& sigma, const Downset& rho, const ExpMetricParams& params);
QuadraticNumber exact_exp_metric(const Downset& sigma, const Downset& rho, const ExpMetricParams& params);

/// Upper bound B = n * mu^(||x0||_1 - min ||x||_1) on the metric. Every cube
/// weighs at most mu^(that exponent), so this holds for any nice region.
double metric_upper_bound(const Region& region, const ExpMetricParams& params);

/// The root (d - sqrt(d^2 - 4)) / 2 <= 1 of y^2 - d*y + 1 that governs the
/// uniform drift factor d*y - 1 - y^2 with y = lambda^(-1/2).
double contraction_root(int d);
/// contraction_root(d) - lambda^(-1/2); equals 1 - lambda^(-1/2) in two dimensions.
double chi_uniform(int d, double lambda);
/// sqrt(lambda) - 1, the two-dimensional rectangle constant.
double chi_2d(double lambda);
/// 1 + 1/lambda_U - d / sqrt(lambda_L): the largest chi meeting the
/// fluctuating contraction condition (negative when it fails).
double chi_fluctuating(int d, double lambda_low, double lambda_high);

/// psi(phi) = ln(phi), or -2 ln 2 at phi == 0. Throws DomainError on 0 < phi < 1.
double psi(double phi);

struct DriftMove {
    int ray;
    int direction;
    Rational probability;
    QuadraticNumber change;
};

struct DriftReport {
    std::vector<int> sigma;
    std::vector<int> rho;
    int span = 0;
    QuadraticNumber phi;
    QuadraticNumber expected_change;
    /// Outcomes with positive probability that increase phi.
    std::vector<DriftMove> increasing_moves;
    /// Number of distinct (ray, b) choices that can increase phi.
    int bad_choices = 0;

    /// E[dphi] <= -phi chi^2 / (2 alpha) with chi = chi_uniform; set only for a
    /// uniform field with mu^2 = lambda and chi >= 0.
    std::optional<bool> uniform_bound_holds;
    double uniform_bound = 0.0;
    /// E[dphi] <= -phi chi / (2 alpha) with chi = chi_fluctuating; set when chi >= 0.
    std::optional<bool> fluctuating_bound_holds;
    double fluctuating_bound = 0.0;

    bool pass() const { return uniform_bound_holds.value_or(true) && fluctuating_bound_holds.value_or(true); }
};

/// Exact expected change of phi over one coupled step from an adjacent pair.
/// Throws NotAdjacent unless |sigma (+) rho| == 1.
DriftReport exact_pair_drift(const Downset& sigma, const Downset& rho, const BiasField& bias, const ExpMetricParams& params);

struct VarianceReport {
    Rational eta;
    Rational kappa;
    std::size_t pairs_checked = 0;
    bool sampled = false;
    /// min over checked pairs of P[|phi' - phi| >= eta phi].
    Rational min_probability = 1;
    std::vector<std::pair<std::vector<int>, std::vector<int>>> violations;
    bool pass() const { return violations.empty(); }
};

/// P[|phi' - phi| >= eta phi] >= kappa over distinct pairs, computed exactly.
/// All unordered pairs are scanned when there are at most pair_cap of them;
/// otherwise pair_cap pairs are drawn from the seeded counter generator.
VarianceReport variance_condition_check(const RegionPtr& region, const BiasField& bias, const ExpMetricParams& params,
                                        const Rational& eta, const Rational& kappa,
                                        std::uint64_t state_cap = default_enumeration_cap,
                                        std::uint64_t pair_cap = 1'000'000, std::uint64_t seed = 1);

} // namespace surfmix

#endif
