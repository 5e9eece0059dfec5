#ifndef SURFMIX_SLOW_HPP
#define SURFMIX_SLOW_HPP

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "surfmix/exact.hpp"

namespace surfmix {

/// Fluctuating-bias instance on the n x n square: lambda = 1 + eps on cubes with
/// x + y <= n + M and xi above, with eps = 1/(4n) and M = n - ceil(sqrt(n)).
struct SlowInstance {
    int n = 0;
    int m = 0;
    Rational eps;
    Rational xi;
    RegionPtr region;
    BiasField bias;

    bool is_high(CubeId c) const;
};

/// n - ceil(sqrt(n)).
int slow_threshold(int n);

/// Upper end 4 e^2.5 of the xi bracket.
double xi_upper_bracket();

/// Instance with the given xi, or the bracket midpoint when xi is absent.
SlowInstance build_slow_instance(int n, std::optional<Rational> xi = std::nullopt);

enum class WalkClass { S1, S2, S3 };

/// Boundary of sigma read from the top-left corner: +1 = right, -1 = down.
std::vector<int> staircase_walk(const Downset& sigma);
/// Largest partial sum of the walk, counting the empty prefix.
int max_height(std::span<const int> walk);
int max_height(const Downset& sigma);
WalkClass classify(const Downset& sigma, int threshold);

/// Number of downsets of the n x n square by class and by how many low
/// (x + y <= n + M) and high cubes they contain; computed by a dynamic program
/// over column heights, so no enumeration is needed.
struct SlowCounts {
    int n = 0;
    int m = 0;
    /// S1 and S2 contain no high cube: index = |sigma|.
    std::vector<BigInt> s1;
    std::vector<BigInt> s2;
    /// S3 keyed by (low, high) with high >= 1.
    std::map<std::pair<int, int>, BigInt> s3;

    BigInt total() const;
};

SlowCounts slow_counts(int n);

/// Unnormalized class masses Z pi(S_i) at bias xi.
struct ClassMass {
    Rational s1, s2, s3;
    Rational total() const { return s1 + s2 + s3; }
};

ClassMass class_mass(const SlowCounts& counts, const Rational& eps, const Rational& xi);

class BracketFailure : public std::runtime_error {
public:
    BracketFailure(double g_low, double g_high);
    /// g = Z pi(S3) - e Z pi(S1) at xi = 1 + eps and at xi = 4 e^2.5.
    double g_low() const { return g_low_; }
    double g_high() const { return g_high_; }

private:
    double g_low_, g_high_;
};

/// g(xi) = Z pi(S3) - e Z pi(S1), evaluated in 50-digit arithmetic.
double slow_g(const SlowCounts& counts, const Rational& eps, double xi);

struct XiTuning {
    int n = 0;
    double g_low = 0.0;
    double g_high = 0.0;
    /// Exact dyadic value of the bisection result.
    Rational xi;
    int iterations = 0;
    /// |pi(S3) - e pi(S1)| / pi(S1) at xi.
    double relative_residual = 0.0;
};

/// Bisection on [1 + eps, 4 e^2.5] for pi(S3) = e pi(S1), to relative tolerance
/// tol on xi. Throws BracketFailure when g does not change sign.
XiTuning tune_xi(int n, double tol = 1e-9);
XiTuning tune_xi(const SlowCounts& counts, double tol = 1e-9);

struct BottleneckReport {
    int n = 0;
    int m = 0;
    Rational eps;
    Rational xi;
    std::size_t states = 0;
    Rational pi_s1, pi_s2, pi_s3;
    /// pi(S2) / min(pi(S1), pi(S3))
    double cut_ratio = 0.0;
    CutReport cut;
    /// No positive-probability move goes straight from S1 to S3.
    bool s1_to_s3_blocked = true;
    /// Conductance of S1 is at most pi(S2) / pi(S1).
    bool cut_bound_holds = true;
    std::optional<MixingTime> mixing;
};

/// Exact report for a tuned instance: class masses, conductance of S1 and,
/// when with_mixing is set, tau(1/4) from every start.
BottleneckReport bottleneck_report(const SlowInstance& instance, bool with_mixing, std::uint64_t cap = default_enumeration_cap,
                                   unsigned threads = 0);

/// Simulation evidence for sizes beyond enumeration: chains from the empty and
/// full downsets, compared by the class occupancy over the second half of each run.
struct SlowSimulation {
    int n = 0;
    Rational xi;
    std::uint64_t steps = 0;
    std::size_t seeds = 0;
    /// Fraction of sampled times in S1, S2, S3 for runs started at the empty and full downsets.
    std::array<double, 3> from_empty{};
    std::array<double, 3> from_full{};
    /// Mean |sigma| over the second half of each run.
    double mean_size_empty = 0.0;
    double mean_size_full = 0.0;
};

SlowSimulation simulate_slow(const SlowInstance& instance, std::span<const std::uint64_t> seeds, std::uint64_t steps,
                             unsigned threads = 0);

} // namespace surfmix

#endif
