#ifndef SURFMIX_EXACT_HPP
#define SURFMIX_EXACT_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "surfmix/dynamics.hpp"

namespace surfmix {

class BudgetExceeded : public std::runtime_error {
public:
    BudgetExceeded(std::uint64_t budget, double tv);
    std::uint64_t budget() const { return budget_; }
    /// Worst total variation distance still present at the budget.
    double tv() const { return tv_; }

private:
    std::uint64_t budget_;
    double tv_;
};

class EmptyCut : public std::invalid_argument {
public:
    EmptyCut() : std::invalid_argument("cut has zero stationary mass") {}
};

/// One off-diagonal transition out of a state.
struct Transition {
    std::size_t to;
    Rational probability;
};

/// Enumerated state space of the chain with exact stationary weights and
/// transition probabilities. Requires an exact bias field.
class ExactModel {
public:
    static ExactModel build(const RegionPtr& region, const BiasField& bias, std::uint64_t cap = default_enumeration_cap);

    const RegionPtr& region() const { return region_; }
    const BiasField& bias() const { return bias_; }
    std::size_t size() const { return states_.size(); }

    const std::vector<int>& counts(std::size_t i) const { return states_[i]; }
    Downset state(std::size_t i) const { return Downset::from_counts(region_, states_[i]); }
    std::optional<std::size_t> index_of(std::span<const int> counts) const;
    std::size_t empty_index() const { return 0; }
    std::size_t full_index() const { return states_.size() - 1; }

    /// prod_{x in sigma} lambda_x
    const Rational& weight(std::size_t i) const { return weights_[i]; }
    const Rational& partition_function() const { return z_; }
    Rational pi(std::size_t i) const { return weights_[i] / z_; }
    Eigen::RowVectorXd pi_double() const;

    std::span<const Transition> transitions(std::size_t i) const { return transitions_[i]; }
    /// P(i, i), the row remainder.
    const Rational& self_loop(std::size_t i) const { return self_loops_[i]; }

    /// Full transition matrix with self-loops on the diagonal.
    template <class Scalar>
    Eigen::SparseMatrix<Scalar> transition_matrix() const;

private:
    RegionPtr region_;
    BiasField bias_;
    std::vector<std::vector<int>> states_;
    std::vector<Rational> weights_;
    Rational z_;
    std::vector<std::vector<Transition>> transitions_;
    std::vector<Rational> self_loops_;

    ExactModel(RegionPtr region, BiasField bias) : region_(std::move(region)), bias_(std::move(bias)) {}
};

template <class Scalar>
Scalar from_rational(const Rational& r)
{
    if constexpr (std::is_same_v<Scalar, Rational>) return r;
    else return static_cast<Scalar>(to_double(r));
}

template <class Scalar>
Eigen::SparseMatrix<Scalar> ExactModel::transition_matrix() const
{
    std::vector<Eigen::Triplet<Scalar>> entries;
    for (std::size_t i = 0; i < size(); ++i) {
        entries.emplace_back(static_cast<int>(i), static_cast<int>(i), from_rational<Scalar>(self_loops_[i]));
        for (const auto& t : transitions_[i])
            entries.emplace_back(static_cast<int>(i), static_cast<int>(t.to), from_rational<Scalar>(t.probability));
    }
    Eigen::SparseMatrix<Scalar> p(static_cast<int>(size()), static_cast<int>(size()));
    p.setFromTriplets(entries.begin(), entries.end());
    return p;
}

struct StationaryReport {
    bool rows_sum_to_one = true;
    /// pi P == pi exactly.
    bool invariant = true;
    bool detailed_balance = true;
    /// max_j |(pi P)_j - pi_j| as a double (0 when invariant).
    double max_residual = 0.0;
    bool pass() const { return rows_sum_to_one && invariant && detailed_balance; }
};

/// Exact rational check of row sums, pi P = pi and detailed balance.
StationaryReport stationary_check(const ExactModel& model);

/// One distribution per row.
template <class Scalar>
using DistributionBlock = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Total variation distance of every row of dist from pi.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> row_tv(const DistributionBlock<Scalar>& dist, const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>& pi)
{
    return (dist.rowwise() - pi).cwiseAbs().rowwise().sum() / Scalar(2);
}

/// max over `starts` of d_tv(P^t(x, .), pi) for t = 0..steps.
template <class Scalar>
std::vector<Scalar> tv_curve(const ExactModel& model, std::span<const std::size_t> starts, std::uint64_t steps)
{
    const auto p = model.transition_matrix<Scalar>();
    Eigen::Matrix<Scalar, 1, Eigen::Dynamic> pi(model.size());
    for (std::size_t j = 0; j < model.size(); ++j) pi(j) = from_rational<Scalar>(model.pi(j));
    DistributionBlock<Scalar> dist = DistributionBlock<Scalar>::Zero(static_cast<Eigen::Index>(starts.size()), model.size());
    for (std::size_t k = 0; k < starts.size(); ++k) dist(k, starts[k]) = Scalar(1);
    std::vector<Scalar> curve;
    curve.reserve(steps + 1);
    for (std::uint64_t t = 0;; ++t) {
        curve.push_back(row_tv<Scalar>(dist, pi).maxCoeff());
        if (t == steps) break;
        dist = (dist * p).eval();
    }
    return curve;
}

struct MixingTime {
    std::uint64_t tau = 0;
    /// Worst TV among the starts at t = tau.
    double tv = 0.0;
    /// True when only (empty, full) were used as starts because the model
    /// exceeds the all-starts limit; tau is then a lower bound.
    bool lower_bound_only = false;
    std::size_t starts = 0;
};

inline constexpr std::size_t all_starts_limit = 10'000;

/// Smallest t with max_x d_tv(P^t(x, .), pi) <= eps, iterating every start when
/// the model has at most all_starts_limit states and (empty, full) otherwise.
/// Starts are processed in blocks and dropped once they reach eps (the
/// distance to stationarity is nonincreasing in t). Throws BudgetExceeded.
MixingTime tv_mixing_time(const ExactModel& model, double eps, std::uint64_t budget = 10'000'000, unsigned threads = 0);

/// Same for an explicit list of starts.
MixingTime tv_mixing_time_from(const ExactModel& model, double eps, std::span<const std::size_t> starts,
                               std::uint64_t budget = 10'000'000, unsigned threads = 0);

struct CutReport {
    Rational pi_s;
    Rational escape;
    /// escape / pi(S)
    Rational conductance;
    /// pi(S) <= 1/2, as the conductance bound needs.
    bool usable = false;
    /// (4 phi_S)^-1 - 1/2, set when usable and phi_S > 0.
    std::optional<double> mixing_lower_bound;
};

/// phi_S = sum_{s in S, t not in S} pi(s) P(s, t) / pi(S). Throws EmptyCut when pi(S) == 0.
CutReport conductance_of_cut(const ExactModel& model, const std::vector<bool>& in_s);
CutReport conductance_of_cut(const ExactModel& model, const std::function<bool(const Downset&)>& predicate);

/// Integer polynomial, coefficient k multiplies q^k.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<BigInt> coefficients);

    const std::vector<BigInt>& coefficients() const { return c_; }
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    BigInt coefficient(int k) const { return k >= 0 && k < static_cast<int>(c_.size()) ? c_[k] : BigInt(0); }

    Rational operator()(const Rational& q) const;
    double operator()(double q) const;

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.c_ == b.c_; }
    /// Exact division; throws std::domain_error when b does not divide a.
    friend Polynomial exact_divide(const Polynomial& a, const Polynomial& b);
    Polynomial shifted(int k) const;

private:
    std::vector<BigInt> c_;
    void trim();
};

/// [m choose r]_q by the q-Pascal rule.
Polynomial gaussian_binomial(int m, int r);
/// prod_{i=1..r} (1 - q^(m-r+i)) / (1 - q^i) by polynomial division, for cross-checks.
Polynomial gaussian_binomial_product(int m, int r);
inline Rational gaussian_binomial(int m, int r, const Rational& q) { return gaussian_binomial(m, r)(q); }

/// sum over the model's states of q^|sigma|, coefficientwise.
Polynomial size_generating_function(const ExactModel& model);

struct MaxMassCheck {
    /// lambda^n / Z exactly.
    Rational mass;
    /// ln(mass) and -x/(1-x)^2 with x = 1/lambda, in 50-digit arithmetic.
    double log_mass = 0.0;
    double log_bound = 0.0;
    bool holds = false;
};

/// Exact check of lambda^(hw) / Z >= exp(-x / (1-x)^2) on an h x w rectangle.
MaxMassCheck maximal_mass_check(int h, int w, const Rational& lambda);

} // namespace surfmix

#endif
