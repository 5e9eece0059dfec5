#ifndef SURFMIX_REGION_HPP
#define SURFMIX_REGION_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "surfmix/numeric.hpp"

namespace surfmix {

using Point = std::vector<int>;
/// Index of a unit cube inside its Region.
using CubeId = int;

inline constexpr std::uint64_t default_enumeration_cap = 5'000'000;

class NicenessViolation : public std::invalid_argument {
public:
    NicenessViolation(Point low, Point high);
    /// Consecutive ray points with a gap between them.
    const Point& below_gap() const { return below_; }
    const Point& above_gap() const { return above_; }

private:
    Point below_, above_;
};

class EnumerationTooLarge : public std::runtime_error {
public:
    EnumerationTooLarge(BigInt count, std::uint64_t cap);
    const BigInt& count() const { return count_; }
    std::uint64_t cap() const { return cap_; }

private:
    BigInt count_;
    std::uint64_t cap_;
};

/// "Cube on ray `from` at position k present" forces at least need[k+1]
/// cubes on ray `to`. need[0] == 0 and need is nondecreasing.
struct RayConstraint {
    int from = 0;
    int to = 0;
    std::vector<int> need;
};

/// A finite nice point set in Z^d, split into rays along (1,...,1).
///
/// Immutable after construction. Cubes are numbered so that the cubes of a ray
/// are stored contiguously from lowest to highest L1 norm; rays are ordered by
/// their lowest point, lexicographically.
class Region {
public:
    int dim() const { return dim_; }
    /// Volume n.
    int volume() const { return static_cast<int>(ray_of_.size()); }
    /// Span alpha: the number of rays.
    int span() const { return static_cast<int>(ray_start_.size()) - 1; }
    /// Stretch gamma: the longest ray.
    int stretch() const { return stretch_; }
    /// Side lengths when built by make_rectangle, empty otherwise.
    const std::vector<int>& dims() const { return dims_; }
    bool is_rectangle() const { return !dims_.empty(); }

    std::span<const int> coords(CubeId c) const { return {coords_.data() + static_cast<std::size_t>(c) * dim_, static_cast<std::size_t>(dim_)}; }
    Point point(CubeId c) const { auto s = coords(c); return {s.begin(), s.end()}; }
    int l1_norm(CubeId c) const { return l1_[c]; }
    /// ||x0||_1 for a point x0 of maximal L1 norm.
    int max_l1_norm() const { return l1_[x0_]; }
    /// Lexicographically smallest point of maximal L1 norm.
    CubeId x0() const { return x0_; }

    int ray_of(CubeId c) const { return ray_of_[c]; }
    int position_in_ray(CubeId c) const { return c - ray_start_[ray_of_[c]]; }
    int ray_length(int r) const { return ray_start_[r + 1] - ray_start_[r]; }
    /// Cube at position k (0 = lowest) of ray r.
    CubeId cube_at(int r, int k) const { return ray_start_[r] + k; }

    /// c - u_axis, or -1 when outside the region.
    CubeId lower_neighbor(CubeId c, int axis) const { return lower_[static_cast<std::size_t>(c) * dim_ + axis]; }
    /// c + u_axis, or -1 when outside the region.
    CubeId upper_neighbor(CubeId c, int axis) const { return upper_[static_cast<std::size_t>(c) * dim_ + axis]; }

    std::optional<CubeId> find(std::span<const int> p) const;

    /// Pairwise closure constraints between rays; used by enumeration.
    const std::vector<RayConstraint>& ray_constraints() const { return constraints_; }

private:
    friend std::shared_ptr<const Region> build_region(int dim, std::vector<Point> points, std::vector<int> dims);

    int dim_ = 0;
    int stretch_ = 0;
    CubeId x0_ = 0;
    std::vector<int> dims_;
    std::vector<int> coords_;
    std::vector<int> l1_;
    std::vector<int> ray_of_;
    std::vector<int> ray_start_;
    std::vector<CubeId> lower_;
    std::vector<CubeId> upper_;
    std::vector<RayConstraint> constraints_;
    std::vector<std::pair<Point, CubeId>> index_; // sorted for find()
};

using RegionPtr = std::shared_ptr<const Region>;

/// All v with 1 <= v_i <= dims_i.
RegionPtr make_rectangle(std::span<const int> dims);
inline RegionPtr make_rectangle(std::initializer_list<int> dims) { return make_rectangle(std::span<const int>(dims.begin(), dims.size())); }

/// Throws NicenessViolation when some ray meets the set in a non-contiguous run.
RegionPtr make_region(int dim, std::vector<Point> points);

/// Order ideal of a Region stored as per-ray prefix counts.
class Downset {
public:
    static Downset empty(RegionPtr region);
    static Downset full(RegionPtr region);
    /// Validates closure; throws std::invalid_argument on a malformed vector.
    static Downset from_counts(RegionPtr region, std::vector<int> counts);

    const Region& region() const { return *region_; }
    const RegionPtr& region_ptr() const { return region_; }
    std::span<const int> counts() const { return counts_; }
    int count(int ray) const { return counts_[ray]; }
    /// |sigma|
    int size() const { return size_; }
    bool contains(CubeId c) const { return region_->position_in_ray(c) < counts_[region_->ray_of(c)]; }
    bool is_empty() const { return size_ == 0; }
    bool is_full() const { return size_ == region_->volume(); }
    bool is_subset_of(const Downset& other) const;
    std::vector<CubeId> cubes() const;

    /// Unchecked single-cube updates on the top of a ray.
    void push(int ray) { ++counts_[ray]; ++size_; }
    void pop(int ray) { --counts_[ray]; --size_; }

    friend bool operator==(const Downset& a, const Downset& b) { return a.counts_ == b.counts_; }

private:
    Downset(RegionPtr region, std::vector<int> counts);

    RegionPtr region_;
    std::vector<int> counts_;
    int size_ = 0;
};

/// True when counts describe an order ideal of the region (prefix per ray plus
/// closure under every c - u_i inside the region).
bool is_valid_downset(const Region& region, std::span<const int> counts);

/// Next cube up on the ray if adding it keeps the downset closed.
std::optional<CubeId> can_add(const Downset& sigma, int ray);
/// Topmost cube of the ray if removing it keeps the downset closed.
std::optional<CubeId> can_remove(const Downset& sigma, int ray);

/// Removable cubes.
std::vector<CubeId> peaks(const Downset& sigma);
/// Addable cubes.
std::vector<CubeId> valleys(const Downset& sigma);
int peak_count(const Downset& sigma);
int valley_count(const Downset& sigma);

/// One marker per ray: the topmost included cube, or nullopt for the floor.
std::vector<std::optional<CubeId>> upper_boundary(const Downset& sigma);

/// Exact number of downsets by a profile dynamic program over rays.
BigInt count_downsets(const Region& region);

/// All downsets as count vectors in lexicographic order of counts.
/// Throws EnumerationTooLarge when the count exceeds cap.
std::vector<std::vector<int>> enumerate_downsets(const Region& region, std::uint64_t cap = default_enumeration_cap);

struct PeakValleyReport {
    int dim = 0;
    std::size_t states_checked = 0;
    /// max over sigma != F of |P| - (d-1)|V|; the bound says this is <= 1.
    int max_excess = 0;
    std::vector<std::vector<int>> violations;
    bool pass() const { return violations.empty(); }
};

/// Exhaustive |P(sigma)| <= (d-1)|V(sigma)| + 1 over all sigma != F.
PeakValleyReport lemma_peak_valley_check(const RegionPtr& region, std::uint64_t cap = default_enumeration_cap);

} // namespace surfmix

#endif
