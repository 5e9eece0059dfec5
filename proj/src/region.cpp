#include "surfmix/region.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

namespace surfmix {

namespace {

std::string point_string(const Point& p)
{
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? "," : "") << p[i];
    os << ')';
    return os.str();
}

/// Coordinates relative to the ray direction; equal keys <=> same ray.
Point ray_key(const Point& p)
{
    Point key(p.size() - 1);
    for (std::size_t i = 1; i < p.size(); ++i) key[i - 1] = p[i] - p[0];
    return key;
}

} // namespace

NicenessViolation::NicenessViolation(Point low, Point high)
    : std::invalid_argument("region is not nice: ray gap between " + point_string(low) + " and " + point_string(high)),
      below_(std::move(low)), above_(std::move(high))
{
}

EnumerationTooLarge::EnumerationTooLarge(BigInt count, std::uint64_t cap)
    : std::runtime_error("state space has " + count.str() + " downsets, above the cap of " + std::to_string(cap)),
      count_(std::move(count)), cap_(cap)
{
}

std::optional<CubeId> Region::find(std::span<const int> p) const
{
    auto it = std::lower_bound(index_.begin(), index_.end(), p, [](const auto& entry, std::span<const int> q) {
        return std::lexicographical_compare(entry.first.begin(), entry.first.end(), q.begin(), q.end());
    });
    if (it == index_.end() || !std::equal(it->first.begin(), it->first.end(), p.begin(), p.end())) return std::nullopt;
    return it->second;
}

std::shared_ptr<const Region> build_region(int dim, std::vector<Point> points, std::vector<int> dims)
{
    if (dim < 1) throw std::invalid_argument("region dimension must be positive");
    if (points.empty()) throw std::invalid_argument("region must contain at least one point");
    for (const auto& p : points)
        if (static_cast<int>(p.size()) != dim) throw std::invalid_argument("point " + point_string(p) + " has the wrong dimension");

    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());

    // group by ray, each group sorted along (1,...,1)
    std::map<Point, std::vector<Point>> groups;
    for (auto& p : points) groups[ray_key(p)].push_back(p);
    std::vector<std::vector<Point>> rays;
    rays.reserve(groups.size());
    for (auto& [key, members] : groups) {
        std::sort(members.begin(), members.end(), [](const Point& a, const Point& b) { return a[0] < b[0]; });
        for (std::size_t k = 1; k < members.size(); ++k)
            if (members[k][0] != members[k - 1][0] + 1) throw NicenessViolation(members[k - 1], members[k]);
        rays.push_back(std::move(members));
    }
    std::sort(rays.begin(), rays.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });

    auto region = std::make_shared<Region>();
    Region& r = *region;
    r.dim_ = dim;
    r.dims_ = std::move(dims);
    r.ray_start_.push_back(0);
    for (int ray = 0; ray < static_cast<int>(rays.size()); ++ray) {
        for (const auto& p : rays[ray]) {
            r.coords_.insert(r.coords_.end(), p.begin(), p.end());
            r.l1_.push_back(std::accumulate(p.begin(), p.end(), 0, [](int acc, int v) { return acc + std::abs(v); }));
            r.ray_of_.push_back(ray);
        }
        r.ray_start_.push_back(static_cast<int>(r.ray_of_.size()));
        r.stretch_ = std::max(r.stretch_, static_cast<int>(rays[ray].size()));
    }

    const int n = r.volume();
    r.index_.reserve(n);
    for (CubeId c = 0; c < n; ++c) r.index_.emplace_back(r.point(c), c);
    std::sort(r.index_.begin(), r.index_.end());

    r.x0_ = 0;
    for (CubeId c = 1; c < n; ++c) {
        if (r.l1_[c] > r.l1_[r.x0_] || (r.l1_[c] == r.l1_[r.x0_] && r.point(c) < r.point(r.x0_))) r.x0_ = c;
    }

    r.lower_.assign(static_cast<std::size_t>(n) * dim, -1);
    r.upper_.assign(static_cast<std::size_t>(n) * dim, -1);
    Point q(dim);
    for (CubeId c = 0; c < n; ++c) {
        auto p = r.coords(c);
        for (int i = 0; i < dim; ++i) {
            std::copy(p.begin(), p.end(), q.begin());
            --q[i];
            if (auto f = r.find(q)) r.lower_[static_cast<std::size_t>(c) * dim + i] = *f;
            q[i] += 2;
            if (auto f = r.find(q)) r.upper_[static_cast<std::size_t>(c) * dim + i] = *f;
        }
    }

    std::map<std::pair<int, int>, std::vector<int>> needs;
    for (CubeId c = 0; c < n; ++c) {
        const int from = r.ray_of(c);
        const int k = r.position_in_ray(c);
        for (int i = 0; i < dim; ++i) {
            const CubeId lo = r.lower_neighbor(c, i);
            if (lo < 0 || r.ray_of(lo) == from) continue;
            auto& need = needs[{from, r.ray_of(lo)}];
            if (need.empty()) need.assign(r.ray_length(from) + 1, 0);
            need[k + 1] = std::max(need[k + 1], r.position_in_ray(lo) + 1);
        }
    }
    for (auto& [edge, need] : needs) {
        for (std::size_t k = 1; k < need.size(); ++k) need[k] = std::max(need[k], need[k - 1]);
        r.constraints_.push_back({edge.first, edge.second, std::move(need)});
    }
    return region;
}

RegionPtr make_rectangle(std::span<const int> dims)
{
    if (dims.empty()) throw std::invalid_argument("make_rectangle: no dimensions given");
    for (int h : dims)
        if (h < 1) throw std::invalid_argument("make_rectangle: side lengths must be positive");
    const int d = static_cast<int>(dims.size());
    std::vector<Point> points;
    Point p(d, 1);
    for (;;) {
        points.push_back(p);
        int i = 0;
        while (i < d && p[i] == dims[i]) p[i++] = 1;
        if (i == d) break;
        ++p[i];
    }
    return build_region(d, std::move(points), std::vector<int>(dims.begin(), dims.end()));
}

RegionPtr make_region(int dim, std::vector<Point> points)
{
    return build_region(dim, std::move(points), {});
}

// ---------------------------------------------------------------------------

Downset::Downset(RegionPtr region, std::vector<int> counts)
    : region_(std::move(region)), counts_(std::move(counts)), size_(std::accumulate(counts_.begin(), counts_.end(), 0))
{
}

Downset Downset::empty(RegionPtr region)
{
    const int alpha = region->span();
    return Downset(std::move(region), std::vector<int>(alpha, 0));
}

Downset Downset::full(RegionPtr region)
{
    std::vector<int> counts(region->span());
    for (int r = 0; r < region->span(); ++r) counts[r] = region->ray_length(r);
    return Downset(std::move(region), std::move(counts));
}

Downset Downset::from_counts(RegionPtr region, std::vector<int> counts)
{
    if (!is_valid_downset(*region, counts)) throw std::invalid_argument("counts do not describe a downset of the region");
    return Downset(std::move(region), std::move(counts));
}

bool Downset::is_subset_of(const Downset& other) const
{
    for (std::size_t r = 0; r < counts_.size(); ++r)
        if (counts_[r] > other.counts_[r]) return false;
    return true;
}

std::vector<CubeId> Downset::cubes() const
{
    std::vector<CubeId> out;
    out.reserve(size_);
    for (int r = 0; r < static_cast<int>(counts_.size()); ++r)
        for (int k = 0; k < counts_[r]; ++k) out.push_back(region_->cube_at(r, k));
    return out;
}

bool is_valid_downset(const Region& region, std::span<const int> counts)
{
    if (static_cast<int>(counts.size()) != region.span()) return false;
    for (int r = 0; r < region.span(); ++r)
        if (counts[r] < 0 || counts[r] > region.ray_length(r)) return false;
    auto included = [&](CubeId c) { return region.position_in_ray(c) < counts[region.ray_of(c)]; };
    for (int r = 0; r < region.span(); ++r) {
        for (int k = 0; k < counts[r]; ++k) {
            const CubeId c = region.cube_at(r, k);
            for (int i = 0; i < region.dim(); ++i) {
                const CubeId lo = region.lower_neighbor(c, i);
                if (lo >= 0 && !included(lo)) return false;
            }
        }
    }
    return true;
}

std::optional<CubeId> can_add(const Downset& sigma, int ray)
{
    const Region& region = sigma.region();
    const int k = sigma.count(ray);
    if (k == region.ray_length(ray)) return std::nullopt;
    const CubeId c = region.cube_at(ray, k);
    for (int i = 0; i < region.dim(); ++i) {
        const CubeId lo = region.lower_neighbor(c, i);
        if (lo >= 0 && !sigma.contains(lo)) return std::nullopt;
    }
    return c;
}

std::optional<CubeId> can_remove(const Downset& sigma, int ray)
{
    const Region& region = sigma.region();
    const int k = sigma.count(ray);
    if (k == 0) return std::nullopt;
    const CubeId c = region.cube_at(ray, k - 1);
    for (int i = 0; i < region.dim(); ++i) {
        const CubeId hi = region.upper_neighbor(c, i);
        if (hi >= 0 && sigma.contains(hi)) return std::nullopt;
    }
    return c;
}

std::vector<CubeId> peaks(const Downset& sigma)
{
    std::vector<CubeId> out;
    for (int r = 0; r < sigma.region().span(); ++r)
        if (auto c = can_remove(sigma, r)) out.push_back(*c);
    return out;
}

std::vector<CubeId> valleys(const Downset& sigma)
{
    std::vector<CubeId> out;
    for (int r = 0; r < sigma.region().span(); ++r)
        if (auto c = can_add(sigma, r)) out.push_back(*c);
    return out;
}

int peak_count(const Downset& sigma)
{
    int n = 0;
    for (int r = 0; r < sigma.region().span(); ++r) n += can_remove(sigma, r).has_value();
    return n;
}

int valley_count(const Downset& sigma)
{
    int n = 0;
    for (int r = 0; r < sigma.region().span(); ++r) n += can_add(sigma, r).has_value();
    return n;
}

std::vector<std::optional<CubeId>> upper_boundary(const Downset& sigma)
{
    const Region& region = sigma.region();
    std::vector<std::optional<CubeId>> out(region.span());
    for (int r = 0; r < region.span(); ++r)
        if (sigma.count(r) > 0) out[r] = region.cube_at(r, sigma.count(r) - 1);
    return out;
}

// ---------------------------------------------------------------------------
// Enumeration

namespace {

struct Edge {
    int other;
    const std::vector<int>* need;
    bool forward; // true: this ray needs `other`; false: `other` needs this ray
};

/// Constraints of each ray towards rays with a smaller index.
std::vector<std::vector<Edge>> backward_edges(const Region& region)
{
    std::vector<std::vector<Edge>> edges(region.span());
    for (const auto& c : region.ray_constraints()) {
        if (c.from > c.to) edges[c.from].push_back({c.to, &c.need, true});
        else edges[c.to].push_back({c.from, &c.need, false});
    }
    return edges;
}

bool edge_ok(const Edge& e, int this_count, int other_count)
{
    return e.forward ? other_count >= (*e.need)[this_count] : this_count >= (*e.need)[other_count];
}

} // namespace

BigInt count_downsets(const Region& region)
{
    const int alpha = region.span();
    const auto edges = backward_edges(region);
    std::vector<int> last_use(alpha);
    for (int r = 0; r < alpha; ++r) last_use[r] = r;
    for (int r = 0; r < alpha; ++r)
        for (const auto& e : edges[r]) last_use[e.other] = std::max(last_use[e.other], r);

    // frontier: assigned rays still constrained by some unassigned ray
    std::vector<int> frontier;
    std::map<std::vector<int>, BigInt> layer{{{}, BigInt(1)}};
    for (int r = 0; r < alpha; ++r) {
        std::vector<int> next_frontier;
        for (int j : frontier)
            if (last_use[j] > r) next_frontier.push_back(j);
        if (last_use[r] > r) next_frontier.push_back(r);

        std::vector<int> slot(alpha, -1);
        for (std::size_t s = 0; s < frontier.size(); ++s) slot[frontier[s]] = static_cast<int>(s);

        std::map<std::vector<int>, BigInt> next;
        std::vector<int> key(next_frontier.size());
        for (const auto& [state, ways] : layer) {
            for (int c = 0; c <= region.ray_length(r); ++c) {
                bool ok = true;
                for (const auto& e : edges[r]) {
                    if (!edge_ok(e, c, state[slot[e.other]])) { ok = false; break; }
                }
                if (!ok) continue;
                for (std::size_t s = 0; s < next_frontier.size(); ++s) {
                    const int j = next_frontier[s];
                    key[s] = j == r ? c : state[slot[j]];
                }
                next[key] += ways;
            }
        }
        layer = std::move(next);
        frontier = std::move(next_frontier);
    }
    BigInt total = 0;
    for (const auto& [state, ways] : layer) total += ways;
    return total;
}

std::vector<std::vector<int>> enumerate_downsets(const Region& region, std::uint64_t cap)
{
    const BigInt total = count_downsets(region);
    if (total > cap) throw EnumerationTooLarge(total, cap);

    const int alpha = region.span();
    const auto edges = backward_edges(region);
    std::vector<std::vector<int>> out;
    out.reserve(static_cast<std::size_t>(total.convert_to<std::uint64_t>()));
    std::vector<int> counts(alpha, 0);

    // iterative depth-first search; counts[r] = -1 marks "not yet tried"
    std::vector<int> next_value(alpha + 1, 0);
    int r = 0;
    while (r >= 0) {
        if (r == alpha) {
            out.push_back(counts);
            --r;
            continue;
        }
        bool placed = false;
        while (next_value[r] <= region.ray_length(r)) {
            const int c = next_value[r]++;
            bool ok = true;
            for (const auto& e : edges[r]) {
                if (!edge_ok(e, c, counts[e.other])) { ok = false; break; }
            }
            if (ok) {
                counts[r] = c;
                placed = true;
                break;
            }
        }
        if (placed) {
            ++r;
            if (r < alpha) next_value[r] = 0;
        } else {
            counts[r] = 0;
            --r;
        }
    }
    return out;
}

PeakValleyReport lemma_peak_valley_check(const RegionPtr& region, std::uint64_t cap)
{
    PeakValleyReport report;
    report.dim = region->dim();
    report.max_excess = std::numeric_limits<int>::min();
    for (auto& counts : enumerate_downsets(*region, cap)) {
        const Downset sigma = Downset::from_counts(region, counts);
        if (sigma.is_full()) continue;
        ++report.states_checked;
        const int excess = peak_count(sigma) - (report.dim - 1) * valley_count(sigma);
        report.max_excess = std::max(report.max_excess, excess);
        if (excess > 1) report.violations.push_back(std::move(counts));
    }
    return report;
}

} // namespace surfmix
