#include "surfmix/exact.hpp"

#include <algorithm>
#include <cmath>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "surfmix/parallel.hpp"

namespace surfmix {

BudgetExceeded::BudgetExceeded(std::uint64_t budget, double tv)
    : std::runtime_error("total variation still " + std::to_string(tv) + " after " + std::to_string(budget) + " steps"),
      budget_(budget), tv_(tv)
{
}

ExactModel ExactModel::build(const RegionPtr& region, const BiasField& bias, std::uint64_t cap)
{
    if (!bias.is_exact()) throw std::invalid_argument("exact model needs rational biases");
    if (bias.volume() != region->volume()) throw std::invalid_argument("bias field does not match the region");

    ExactModel m(region, bias);
    m.states_ = enumerate_downsets(*region, cap);
    const std::size_t n = m.states_.size();
    const int alpha = region->span();
    const Rational choice(1, 2 * alpha);

    m.weights_.resize(n);
    m.transitions_.resize(n);
    m.self_loops_.resize(n);
    m.z_ = 0;
    std::vector<int> next;
    for (std::size_t i = 0; i < n; ++i) {
        const Downset sigma = Downset::from_counts(region, m.states_[i]);
        Rational w = 1;
        for (const CubeId c : sigma.cubes()) w *= bias.exact_lambda(c);
        m.weights_[i] = w;
        m.z_ += w;

        Rational stay = 1;
        auto link = [&](int r, int delta, const Rational& prob) {
            next = m.states_[i];
            next[r] += delta;
            const auto j = m.index_of(next);
            if (!j) throw std::logic_error("neighbour state missing from the enumeration");
            m.transitions_[i].push_back({*j, prob});
            stay -= prob;
        };
        // on irregular regions one ray can offer both an addition and a removal
        for (int r = 0; r < alpha; ++r) {
            if (can_add(sigma, r)) link(r, +1, choice);
            if (auto v = can_remove(sigma, r)) link(r, -1, choice / bias.exact_lambda(*v));
        }
        m.self_loops_[i] = stay;
    }
    return m;
}

std::optional<std::size_t> ExactModel::index_of(std::span<const int> counts) const
{
    const auto it = std::lower_bound(states_.begin(), states_.end(), counts, [](const std::vector<int>& a, std::span<const int> b) {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    });
    if (it == states_.end() || !std::equal(it->begin(), it->end(), counts.begin(), counts.end())) return std::nullopt;
    return static_cast<std::size_t>(it - states_.begin());
}

Eigen::RowVectorXd ExactModel::pi_double() const
{
    Eigen::RowVectorXd pi(size());
    for (std::size_t i = 0; i < size(); ++i) pi(i) = to_double(weights_[i] / z_);
    return pi;
}

StationaryReport stationary_check(const ExactModel& model)
{
    StationaryReport report;
    const std::size_t n = model.size();
    for (std::size_t i = 0; i < n; ++i) {
        Rational row = model.self_loop(i);
        for (const auto& t : model.transitions(i)) row += t.probability;
        if (row != 1 || model.self_loop(i) < 0) report.rows_sum_to_one = false;
    }

    using RationalRow = Eigen::Matrix<Rational, 1, Eigen::Dynamic>;
    RationalRow w(n);
    for (std::size_t i = 0; i < n; ++i) w(i) = model.weight(i);
    const auto p = model.transition_matrix<Rational>();
    const RationalRow wp = w * p;
    for (std::size_t j = 0; j < n; ++j) {
        if (wp(j) != w(j)) {
            report.invariant = false;
            const Rational residual = (wp(j) - w(j)) / model.partition_function();
            report.max_residual = std::max(report.max_residual, std::abs(to_double(residual)));
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& t : model.transitions(i)) {
            const auto back = model.transitions(t.to);
            const auto it = std::find_if(back.begin(), back.end(), [&](const Transition& b) { return b.to == i; });
            if (it == back.end() || model.weight(i) * t.probability != model.weight(t.to) * it->probability) report.detailed_balance = false;
        }
    }
    return report;
}

namespace {

struct BlockResult {
    std::uint64_t tau = 0;
    double tv = 0.0;
};

/// Distributions stored state-major (one row per state, one column per start)
/// so that a step is a row-major sparse P^T times a row-major dense block.
using StateMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

BlockResult mix_block(const Eigen::SparseMatrix<double, Eigen::RowMajor>& pt, const Eigen::VectorXd& pi, std::span<const std::size_t> starts,
                      double eps, std::uint64_t budget)
{
    const Eigen::Index n = pi.size();
    StateMajor dist = StateMajor::Zero(n, static_cast<Eigen::Index>(starts.size()));
    for (std::size_t k = 0; k < starts.size(); ++k) dist(static_cast<Eigen::Index>(starts[k]), static_cast<Eigen::Index>(k)) = 1.0;

    BlockResult out;
    StateMajor next(n, dist.cols());
    for (std::uint64_t t = 0;; ++t) {
        const Eigen::RowVectorXd tv = (dist.colwise() - pi).cwiseAbs().colwise().sum() / 2.0;
        std::vector<Eigen::Index> keep;
        for (Eigen::Index r = 0; r < tv.size(); ++r) {
            if (tv(r) <= eps) {
                if (t > out.tau) {
                    out.tau = t;
                    out.tv = tv(r);
                } else {
                    out.tv = std::max(out.tv, tv(r));
                }
            } else {
                keep.push_back(r);
            }
        }
        if (keep.empty()) return out;
        if (t == budget) throw BudgetExceeded(budget, tv.maxCoeff());
        if (keep.size() < static_cast<std::size_t>(dist.cols())) {
            dist = dist(Eigen::all, keep).eval();
            next.resize(n, dist.cols());
        }
        next.noalias() = pt * dist;
        dist.swap(next);
    }
}

} // namespace

MixingTime tv_mixing_time_from(const ExactModel& model, double eps, std::span<const std::size_t> starts, std::uint64_t budget, unsigned threads)
{
    MixingTime result;
    result.starts = starts.size();
    if (eps >= 1.0 || starts.empty()) return result;
    if (!(eps > 0.0)) throw std::invalid_argument("eps must lie in (0, 1)");

    const Eigen::SparseMatrix<double, Eigen::RowMajor> pt = model.transition_matrix<double>().transpose();
    const Eigen::VectorXd pi = model.pi_double().transpose();
    constexpr std::size_t block = 32;
    const std::size_t blocks = (starts.size() + block - 1) / block;
    std::vector<BlockResult> results(blocks);
    parallel_for(blocks, threads, [&](std::size_t b) {
        const std::size_t lo = b * block;
        results[b] = mix_block(pt, pi, starts.subspan(lo, std::min(block, starts.size() - lo)), eps, budget);
    });
    for (const auto& r : results) {
        if (r.tau > result.tau) result.tv = r.tv;
        else if (r.tau == result.tau) result.tv = std::max(result.tv, r.tv);
        result.tau = std::max(result.tau, r.tau);
    }
    return result;
}

MixingTime tv_mixing_time(const ExactModel& model, double eps, std::uint64_t budget, unsigned threads)
{
    std::vector<std::size_t> starts;
    bool partial = false;
    if (model.size() <= all_starts_limit) {
        starts.resize(model.size());
        for (std::size_t i = 0; i < starts.size(); ++i) starts[i] = i;
    } else {
        starts = {model.empty_index(), model.full_index()};
        partial = true;
    }
    MixingTime r = tv_mixing_time_from(model, eps, starts, budget, threads);
    r.lower_bound_only = partial;
    return r;
}

CutReport conductance_of_cut(const ExactModel& model, const std::vector<bool>& in_s)
{
    if (in_s.size() != model.size()) throw std::invalid_argument("cut mask does not match the state count");
    Rational weight_s = 0, escape_weight = 0;
    for (std::size_t i = 0; i < model.size(); ++i) {
        if (!in_s[i]) continue;
        weight_s += model.weight(i);
        for (const auto& t : model.transitions(i))
            if (!in_s[t.to]) escape_weight += model.weight(i) * t.probability;
    }
    if (weight_s == 0) throw EmptyCut();
    CutReport report;
    report.pi_s = weight_s / model.partition_function();
    report.escape = escape_weight / model.partition_function();
    report.conductance = escape_weight / weight_s;
    report.usable = 2 * report.pi_s <= 1;
    if (report.usable && report.conductance > 0) report.mixing_lower_bound = 1.0 / (4.0 * to_double(report.conductance)) - 0.5;
    return report;
}

CutReport conductance_of_cut(const ExactModel& model, const std::function<bool(const Downset&)>& predicate)
{
    std::vector<bool> mask(model.size());
    for (std::size_t i = 0; i < model.size(); ++i) mask[i] = predicate(model.state(i));
    return conductance_of_cut(model, mask);
}

Polynomial::Polynomial(std::vector<BigInt> coefficients) : c_(std::move(coefficients)) { trim(); }

void Polynomial::trim()
{
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

Rational Polynomial::operator()(const Rational& q) const
{
    Rational acc = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * q + Rational(*it);
    return acc;
}

double Polynomial::operator()(double q) const
{
    double acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * q + it->convert_to<double>();
    return acc;
}

Polynomial operator+(const Polynomial& a, const Polynomial& b)
{
    std::vector<BigInt> c(std::max(a.c_.size(), b.c_.size()), BigInt(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
    for (std::size_t i = 0; i < b.c_.size(); ++i) c[i] += b.c_[i];
    return Polynomial(std::move(c));
}

Polynomial operator*(const Polynomial& a, const Polynomial& b)
{
    if (a.c_.empty() || b.c_.empty()) return {};
    std::vector<BigInt> c(a.c_.size() + b.c_.size() - 1, BigInt(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i)
        for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(c));
}

Polynomial exact_divide(const Polynomial& a, const Polynomial& b)
{
    if (b.c_.empty()) throw std::domain_error("division by the zero polynomial");
    std::vector<BigInt> rem = a.c_;
    if (rem.size() < b.c_.size()) {
        if (!rem.empty()) throw std::domain_error("polynomial division leaves a remainder");
        return {};
    }
    std::vector<BigInt> quot(rem.size() - b.c_.size() + 1, BigInt(0));
    const BigInt& lead = b.c_.back();
    for (std::size_t k = quot.size(); k-- > 0;) {
        const BigInt& top = rem[k + b.c_.size() - 1];
        if (top % lead != 0) throw std::domain_error("polynomial division leaves a remainder");
        quot[k] = top / lead;
        for (std::size_t j = 0; j < b.c_.size(); ++j) rem[k + j] -= quot[k] * b.c_[j];
    }
    for (const auto& r : rem)
        if (r != 0) throw std::domain_error("polynomial division leaves a remainder");
    return Polynomial(std::move(quot));
}

Polynomial Polynomial::shifted(int k) const
{
    if (c_.empty()) return {};
    std::vector<BigInt> c(static_cast<std::size_t>(k), BigInt(0));
    c.insert(c.end(), c_.begin(), c_.end());
    return Polynomial(std::move(c));
}

Polynomial gaussian_binomial(int m, int r)
{
    if (m < 0 || r < 0 || r > m) throw std::invalid_argument("gaussian binomial needs 0 <= r <= m");
    // row[j] = [i choose j]_q; [i j] = [i-1 j-1] + q^j [i-1 j]
    std::vector<Polynomial> row{Polynomial({BigInt(1)})};
    for (int i = 1; i <= m; ++i) {
        std::vector<Polynomial> next(static_cast<std::size_t>(i) + 1);
        next[0] = Polynomial({BigInt(1)});
        next[i] = Polynomial({BigInt(1)});
        for (int j = 1; j < i; ++j) next[j] = row[j - 1] + row[j].shifted(j);
        row = std::move(next);
    }
    return row[r];
}

Polynomial gaussian_binomial_product(int m, int r)
{
    if (m < 0 || r < 0 || r > m) throw std::invalid_argument("gaussian binomial needs 0 <= r <= m");
    auto one_minus_power = [](int k) {
        std::vector<BigInt> c(static_cast<std::size_t>(k) + 1, BigInt(0));
        c[0] = 1;
        c[k] = -1;
        return Polynomial(std::move(c));
    };
    Polynomial num({BigInt(1)}), den({BigInt(1)});
    for (int i = 1; i <= r; ++i) {
        num = num * one_minus_power(m - r + i);
        den = den * one_minus_power(i);
    }
    return exact_divide(num, den);
}

Polynomial size_generating_function(const ExactModel& model)
{
    std::vector<BigInt> c(static_cast<std::size_t>(model.region()->volume()) + 1, BigInt(0));
    for (std::size_t i = 0; i < model.size(); ++i) {
        int size = 0;
        for (const int k : model.counts(i)) size += k;
        c[size] += 1;
    }
    return Polynomial(std::move(c));
}

MaxMassCheck maximal_mass_check(int h, int w, const Rational& lambda)
{
    if (lambda <= 1) throw std::invalid_argument("maximal mass bound needs lambda > 1");
    using Float = boost::multiprecision::cpp_bin_float_50;
    MaxMassCheck out;
    const Rational z = gaussian_binomial(h + w, h, lambda);
    out.mass = rational_pow(lambda, static_cast<unsigned>(h * w)) / z;

    const Float mass = Float(numerator(out.mass)) / Float(denominator(out.mass));
    const Float x = Float(denominator(lambda)) / Float(numerator(lambda));
    const Float log_mass = log(mass);
    const Float log_bound = -x / ((1 - x) * (1 - x));
    out.log_mass = log_mass.convert_to<double>();
    out.log_bound = log_bound.convert_to<double>();
    out.holds = log_mass >= log_bound;
    return out;
}

} // namespace surfmix
