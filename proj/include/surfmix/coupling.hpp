#ifndef SURFMIX_COUPLING_HPP
#define SURFMIX_COUPLING_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "surfmix/dynamics.hpp"

namespace surfmix {

/// Two copies of the chain driven by one draw stream.
struct CoupledPair {
    Downset sigma;
    Downset rho;
    bool coalesced() const { return sigma == rho; }
};

/// Applies the same draw to both copies in place.
inline void coupled_advance(CoupledPair& pair, const MoveDraw& draw, const BiasField& bias)
{
    apply_step(pair.sigma, draw, bias);
    apply_step(pair.rho, draw, bias);
}

inline CoupledPair coupled_step(CoupledPair pair, const MoveDraw& draw, const BiasField& bias)
{
    coupled_advance(pair, draw, bias);
    return pair;
}

/// Per-seed first-passage times with summary statistics over finished runs.
struct TimeSummary {
    std::vector<std::uint64_t> seeds;
    /// nullopt marks a run that hit max_steps.
    std::vector<std::optional<std::uint64_t>> times;
    std::uint64_t max_steps = 0;
    std::size_t timeouts = 0;
    double mean = 0.0;
    double median = 0.0;
    std::uint64_t max = 0;
};

/// Summary statistics from per-seed results (times aligned with seeds).
TimeSummary summarize_times(std::vector<std::uint64_t> seeds, std::vector<std::optional<std::uint64_t>> times, std::uint64_t max_steps);

/// First t with sigma_t == rho_t for each seed, started from (empty, full)
/// unless a start pair is given.
TimeSummary coupling_time(const RegionPtr& region, const BiasField& bias, std::span<const std::uint64_t> seeds,
                          std::uint64_t max_steps, unsigned threads = 0,
                          const std::optional<CoupledPair>& start = std::nullopt);

/// First t with sigma_t == F for each seed, started from the empty downset.
TimeSummary hitting_time_to_full(const RegionPtr& region, const BiasField& bias, std::span<const std::uint64_t> seeds,
                                 std::uint64_t max_steps, unsigned threads = 0);

/// Pathwise comparison of two chains from the empty downset sharing draws,
/// `low` under a pointwise smaller bias field than `high`. The low chain stays
/// below the high one, so the high chain never reaches F later.
struct DominationReport {
    std::vector<std::uint64_t> seeds;
    std::vector<std::optional<std::uint64_t>> high_times;
    std::vector<std::optional<std::uint64_t>> low_times;
    std::size_t order_violations = 0;
    std::size_t time_violations = 0;
    bool pass() const { return order_violations == 0 && time_violations == 0; }
};

/// Throws std::invalid_argument unless low.lambda(x) <= high.lambda(x) everywhere.
DominationReport hitting_domination(const RegionPtr& region, const BiasField& high, const BiasField& low,
                                    std::span<const std::uint64_t> seeds, std::uint64_t max_steps, unsigned threads = 0);

/// Per seed: the pair started from `inner` (sigma subset of rho) must
/// coalesce no later than the (empty, full) pair on the same draws.
struct SandwichReport {
    std::size_t runs = 0;
    std::size_t violations = 0;
    bool pass() const { return violations == 0; }
};

SandwichReport sandwich_check(const RegionPtr& region, const BiasField& bias, const CoupledPair& inner,
                              std::span<const std::uint64_t> seeds, std::uint64_t max_steps);

struct MaxDrift {
    /// Probability of a step that adds a cube.
    Rational up;
    /// Probability of a step that removes a cube.
    Rational down;
    Rational gap() const { return up - down; }
};

/// P_succ = |V| / (2 alpha), P_prec = sum over peaks of 1 / (2 alpha lambda_x). Exact bias field required.
MaxDrift drift_toward_max(const Downset& sigma, const BiasField& bias);

struct MaxDriftReport {
    std::size_t states_checked = 0;
    Rational min_gap = 1;
    std::vector<std::vector<int>> violations;
    bool pass() const { return violations.empty(); }
};

/// drift_toward_max(sigma).gap() >= 0 for every sigma != F.
MaxDriftReport drift_toward_max_check(const RegionPtr& region, const BiasField& bias, std::uint64_t cap = default_enumeration_cap);

/// Drift class of a state in the hitting-time potential argument.
enum class DriftClass { C1, C2 };

/// C2 when |P| == d |V|; F belongs to C1.
DriftClass drift_class(const Downset& sigma);

/// H(F, sigma) + [sigma in C2] / (2d), exactly.
Rational hitting_potential(const Downset& sigma);

struct PotentialDriftReport {
    std::size_t states_checked = 0;
    /// -1 / (4 alpha d)
    Rational target;
    /// Largest observed expected change.
    Rational max_drift;
    std::vector<std::pair<std::vector<int>, Rational>> violations;
    bool pass() const { return violations.empty(); }
};

/// Exact expected one-step change of hitting_potential for every sigma != F,
/// compared with -1/(4 alpha d).
PotentialDriftReport potential_drift_check(const RegionPtr& region, const BiasField& bias, std::uint64_t cap = default_enumeration_cap);

struct MonotonicityReport {
    std::size_t pairs = 0;
    std::size_t draws = 0;
    std::size_t violations = 0;
    bool pass() const { return violations == 0; }
};

/// Decision thresholds 1/lambda_x with their floating-point neighbours, plus 0.5.
std::vector<double> threshold_grid(const BiasField& bias);

/// Every ordered pair sigma subset rho and every (ray, b, p) with p on threshold_grid.
MonotonicityReport monotonicity_exhaustive(const RegionPtr& region, const BiasField& bias, std::uint64_t cap = default_enumeration_cap);

/// `draws` random steps applied to pairs (rho cap tau, rho) where rho and tau
/// are independent unbiased walks refreshed every step.
MonotonicityReport monotonicity_random(const RegionPtr& region, const BiasField& bias, std::uint64_t draws, std::uint64_t seed);

} // namespace surfmix

#endif
