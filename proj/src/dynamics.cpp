#include "surfmix/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace surfmix {

namespace {

void require_region_volume(const RegionPtr& region, std::size_t n)
{
    if (!region) throw std::invalid_argument("bias field needs a region");
    if (static_cast<std::size_t>(region->volume()) != n) throw std::invalid_argument("bias field size does not match the region volume");
}

} // namespace

void BiasField::finish()
{
    if (lambda_.empty()) throw std::invalid_argument("bias field is empty");
    inverse_.resize(lambda_.size());
    for (std::size_t i = 0; i < lambda_.size(); ++i) {
        if (!(lambda_[i] >= 1.0) || !std::isfinite(lambda_[i])) throw std::invalid_argument("biases must be finite and at least 1");
        inverse_[i] = 1.0 / lambda_[i];
    }
    lower_ = *std::min_element(lambda_.begin(), lambda_.end());
    upper_ = *std::max_element(lambda_.begin(), lambda_.end());
    if (exact_) {
        for (const auto& l : *exact_)
            if (l < 1) throw std::invalid_argument("biases must be at least 1");
        exact_lower_ = *std::min_element(exact_->begin(), exact_->end());
        exact_upper_ = *std::max_element(exact_->begin(), exact_->end());
        uniform_ = exact_lower_ == exact_upper_;
    } else {
        uniform_ = lower_ == upper_;
    }
}

BiasField BiasField::uniform(const RegionPtr& region, double lambda)
{
    return per_site(region, std::vector<double>(region->volume(), lambda));
}

BiasField BiasField::uniform(const RegionPtr& region, const Rational& lambda)
{
    return per_site(region, std::vector<Rational>(region->volume(), lambda));
}

BiasField BiasField::per_site(const RegionPtr& region, std::vector<double> lambdas)
{
    require_region_volume(region, lambdas.size());
    BiasField b;
    b.lambda_ = std::move(lambdas);
    b.finish();
    return b;
}

BiasField BiasField::per_site(const RegionPtr& region, std::vector<Rational> lambdas)
{
    require_region_volume(region, lambdas.size());
    BiasField b;
    b.lambda_.reserve(lambdas.size());
    for (const auto& l : lambdas) b.lambda_.push_back(to_double(l));
    b.exact_ = std::move(lambdas);
    b.finish();
    return b;
}

const Rational& BiasField::exact_lambda(CubeId c) const
{
    if (!exact_) throw std::logic_error("bias field has no exact rational representation");
    return (*exact_)[c];
}

const Rational& BiasField::exact_lower() const
{
    if (!exact_) throw std::logic_error("bias field has no exact rational representation");
    return exact_lower_;
}

const Rational& BiasField::exact_upper() const
{
    if (!exact_) throw std::logic_error("bias field has no exact rational representation");
    return exact_upper_;
}

Rational transition_probability(const Downset& sigma, const Downset& tau, const BiasField& bias)
{
    const Region& region = sigma.region();
    if (&region != &tau.region() && (region.span() != tau.region().span() || region.volume() != tau.region().volume()))
        throw std::invalid_argument("downsets belong to different regions");
    const int alpha = region.span();
    const Rational step_weight(1, 2 * alpha);

    if (sigma == tau) {
        Rational out = 1;
        for (int r = 0; r < alpha; ++r) {
            if (can_add(sigma, r)) out -= step_weight;
            if (auto v = can_remove(sigma, r)) out -= step_weight / bias.exact_lambda(*v);
        }
        return out;
    }
    int differing_ray = -1;
    for (int r = 0; r < alpha; ++r) {
        const int delta = std::abs(sigma.count(r) - tau.count(r));
        if (delta == 0) continue;
        if (delta > 1 || differing_ray >= 0) return 0;
        differing_ray = r;
    }
    if (tau.count(differing_ray) > sigma.count(differing_ray)) return can_add(sigma, differing_ray) ? step_weight : Rational(0);
    if (auto v = can_remove(sigma, differing_ray)) return step_weight / bias.exact_lambda(*v);
    return 0;
}

std::vector<CoupledOutcome> coupled_outcomes(const Downset& sigma, const Downset& rho, const BiasField& bias)
{
    const int alpha = sigma.region().span();
    const Rational choice(1, 2 * alpha);
    std::vector<CoupledOutcome> out;
    out.reserve(4 * alpha);
    for (int r = 0; r < alpha; ++r) {
        {
            Downset s = sigma, t = rho;
            if (can_add(s, r)) s.push(r);
            if (can_add(t, r)) t.push(r);
            out.push_back({r, +1, choice, std::move(s), std::move(t)});
        }
        const auto vs = can_remove(sigma, r);
        const auto vr = can_remove(rho, r);
        const Rational ts = vs ? 1 / bias.exact_lambda(*vs) : Rational(0);
        const Rational tr = vr ? 1 / bias.exact_lambda(*vr) : Rational(0);
        std::vector<Rational> cuts{0, ts, tr, 1};
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        for (std::size_t i = 1; i < cuts.size(); ++i) {
            // p in (cuts[i-1], cuts[i]]; removal happens iff p <= threshold
            Downset s = sigma, t = rho;
            if (vs && cuts[i] <= ts) s.pop(r);
            if (vr && cuts[i] <= tr) t.pop(r);
            out.push_back({r, -1, choice * (cuts[i] - cuts[i - 1]), std::move(s), std::move(t)});
        }
    }
    return out;
}

TrajectorySummary run(const ChainConfig& config, const std::vector<Observer>& observers)
{
    if (config.stride == 0) throw std::invalid_argument("observer stride must be positive");
    const int alpha = config.region->span();
    TrajectorySummary out{config.initial, {}, {}, {}, {}, {}, {}};
    for (const auto& o : observers) out.extra_columns.push_back(o.name);
    const std::size_t rows = static_cast<std::size_t>(config.steps / config.stride);
    out.steps.reserve(rows);
    out.sizes.reserve(rows);

    Downset& sigma = out.final_state;
    for (std::uint64_t t = 0; t < config.steps; ++t) {
        apply_step(sigma, draw_move(config.seed, t, alpha), config.bias);
        if ((t + 1) % config.stride == 0) {
            out.steps.push_back(t + 1);
            out.sizes.push_back(sigma.size());
            out.peak_counts.push_back(peak_count(sigma));
            out.valley_counts.push_back(valley_count(sigma));
            std::vector<double> row;
            row.reserve(observers.size());
            for (const auto& o : observers) row.push_back(o.measure(sigma));
            out.extra.push_back(std::move(row));
        }
    }
    return out;
}

} // namespace surfmix
