#ifndef SURFMIX_DYNAMICS_HPP
#define SURFMIX_DYNAMICS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "surfmix/region.hpp"
#include "surfmix/rng.hpp"

namespace surfmix {

/// Per-site bias lambda_x >= 1.
///
/// Always carries binary floats for simulation; carries exact rationals too
/// when built from rationals, which the exact oracles require.
class BiasField {
public:
    static BiasField uniform(const RegionPtr& region, double lambda);
    static BiasField uniform(const RegionPtr& region, const Rational& lambda);
    static BiasField per_site(const RegionPtr& region, std::vector<double> lambdas);
    static BiasField per_site(const RegionPtr& region, std::vector<Rational> lambdas);

    double lambda(CubeId c) const { return lambda_[c]; }
    /// 1 / lambda_x, the removal acceptance threshold.
    double inverse(CubeId c) const { return inverse_[c]; }
    double lower() const { return lower_; }
    double upper() const { return upper_; }
    int volume() const { return static_cast<int>(lambda_.size()); }
    bool is_uniform() const { return uniform_; }

    bool is_exact() const { return exact_.has_value(); }
    /// Throws std::logic_error when the field has no exact representation.
    const Rational& exact_lambda(CubeId c) const;
    const Rational& exact_lower() const;
    const Rational& exact_upper() const;

private:
    BiasField() = default;
    void finish();

    std::vector<double> lambda_;
    std::vector<double> inverse_;
    std::optional<std::vector<Rational>> exact_;
    Rational exact_lower_, exact_upper_;
    double lower_ = 1.0, upper_ = 1.0;
    bool uniform_ = true;
};

/// Shared randomness for one chain step.
struct MoveDraw {
    int ray = 0;
    /// +1 proposes an addition, -1 a removal.
    int direction = 1;
    /// Uniform in (0, 1); removal of v succeeds when p <= 1/lambda_v.
    double p = 0.5;
};

/// Draw number t of the stream identified by seed.
inline MoveDraw draw_move(std::uint64_t seed, std::uint64_t t, int alpha)
{
    const std::uint64_t w1 = counter_hash(seed, 2 * t);
    const std::uint64_t w2 = counter_hash(seed, 2 * t + 1);
    return {bounded(w1, alpha), (w1 & 1u) ? 1 : -1, open_unit(w2)};
}

/// In-place chain step; returns true when sigma changed.
inline bool apply_step(Downset& sigma, const MoveDraw& draw, const BiasField& bias)
{
    if (draw.direction > 0) {
        if (can_add(sigma, draw.ray)) {
            sigma.push(draw.ray);
            return true;
        }
        return false;
    }
    if (auto v = can_remove(sigma, draw.ray); v && draw.p <= bias.inverse(*v)) {
        sigma.pop(draw.ray);
        return true;
    }
    return false;
}

inline Downset step(Downset sigma, const MoveDraw& draw, const BiasField& bias)
{
    apply_step(sigma, draw, bias);
    return sigma;
}

/// Exact one-step probability P(sigma, tau); requires an exact bias field.
Rational transition_probability(const Downset& sigma, const Downset& tau, const BiasField& bias);

/// One branch of a coupled step: both copies driven by the same (ray, b, p).
struct CoupledOutcome {
    int ray;
    int direction;
    /// Includes the 1/(2 alpha) choice of (ray, b) and the length of the p-interval.
    Rational probability;
    Downset sigma;
    Downset rho;
};

/// Every outcome of one coupled step with exact probabilities summing to 1.
/// Pieces of zero length are dropped. Requires an exact bias field.
std::vector<CoupledOutcome> coupled_outcomes(const Downset& sigma, const Downset& rho, const BiasField& bias);

struct ChainConfig {
    RegionPtr region;
    BiasField bias;
    Downset initial;
    std::uint64_t seed = 0;
    std::uint64_t steps = 0;
    /// Observers are sampled after every `stride` steps.
    std::uint64_t stride = 1;
};

struct Observer {
    std::string name;
    std::function<double(const Downset&)> measure;
};

struct TrajectorySummary {
    Downset final_state;
    std::vector<std::string> extra_columns;
    std::vector<std::uint64_t> steps;
    std::vector<int> sizes;
    std::vector<int> peak_counts;
    std::vector<int> valley_counts;
    /// One row per sample, one entry per extra column.
    std::vector<std::vector<double>> extra;
};

/// Runs config.steps steps with draws draw_move(config.seed, t, alpha).
TrajectorySummary run(const ChainConfig& config, const std::vector<Observer>& observers = {});

} // namespace surfmix

#endif
