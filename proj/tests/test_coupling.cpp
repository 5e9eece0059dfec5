#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "surfmix/coupling.hpp"

using namespace surfmix;

namespace {

std::vector<std::uint64_t> seed_list(std::size_t n, std::uint64_t master = 11)
{
    std::vector<std::uint64_t> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = replica_seed(master, i);
    return s;
}

/// Smallest downset containing the given points.
Downset with_points(const RegionPtr& r, std::initializer_list<std::vector<int>> pts)
{
    std::vector<int> counts(r->span(), 0);
    for (CubeId c = 0; c < r->volume(); ++c) {
        const auto x = r->coords(c);
        for (const auto& p : pts)
            if (std::equal(x.begin(), x.end(), p.begin(), [](int a, int b) { return a <= b; }))
                counts[r->ray_of(c)] = std::max(counts[r->ray_of(c)], r->position_in_ray(c) + 1);
    }
    return Downset::from_counts(r, counts);
}

} // namespace

TEST_CASE("coupled step basics on the 1x1 region")
{
    auto r = make_rectangle({1});
    const auto bias = BiasField::uniform(r, Rational(1));
    const CoupledPair start{Downset::empty(r), Downset::full(r)};
    const auto up = coupled_step(start, {0, +1, 0.3}, bias);
    CHECK(up.coalesced());
    CHECK(up.sigma.is_full());
    const auto down = coupled_step(start, {0, -1, 0.3}, bias);
    CHECK(down.coalesced());
    CHECK(down.sigma.is_empty());
}

TEST_CASE("coalescence is absorbing")
{
    auto r = make_rectangle({3, 3});
    const auto bias = BiasField::uniform(r, Rational(3));
    CoupledPair p{with_points(r, {{2, 2}}), with_points(r, {{2, 2}})};
    for (std::uint64_t t = 0; t < 2000; ++t) {
        coupled_advance(p, draw_move(5, t, r->span()), bias);
        REQUIRE(p.coalesced());
    }
}

TEST_CASE("coupling times")
{
    auto one = make_rectangle({1});
    const auto seeds = seed_list(50);
    const auto t1 = coupling_time(one, BiasField::uniform(one, Rational(1)), seeds, 100, 1);
    CHECK(t1.timeouts == 0);
    CHECK(t1.mean == 1.0);
    CHECK(t1.max == 1);

    auto r = make_rectangle({3, 3});
    const auto bias = BiasField::uniform(r, Rational(2));
    const auto same = coupling_time(r, bias, seeds, 100, 1, CoupledPair{Downset::full(r), Downset::full(r)});
    CHECK(same.mean == 0.0);

    const auto a = coupling_time(r, bias, seeds, 100000, 1);
    const auto b = coupling_time(r, bias, seeds, 100000, 3);
    CHECK(a.times == b.times);
    CHECK(a.timeouts == 0);
    CHECK(a.mean > 0.0);
    CHECK(a.median <= double(a.max));

    const auto capped = coupling_time(r, bias, seeds, 2, 1);
    CHECK(capped.timeouts == seeds.size());

    auto other = make_rectangle({3, 3});
    CHECK_THROWS_AS(coupling_time(r, bias, seeds, 10, 1, CoupledPair{Downset::empty(other), Downset::full(other)}), std::invalid_argument);
}

TEST_CASE("summary statistics")
{
    const auto s = summarize_times({1, 2, 3, 4}, {3, std::nullopt, 1, 2}, 10);
    CHECK(s.timeouts == 1);
    CHECK(s.mean == 2.0);
    CHECK(s.median == 2.0);
    CHECK(s.max == 3);
    const auto even = summarize_times({1, 2}, {4, 6}, 10);
    CHECK(even.median == 5.0);
}

TEST_CASE("hitting time of the 1x1 region is geometric with mean 2")
{
    auto r = make_rectangle({1});
    const auto seeds = seed_list(20000);
    const auto h = hitting_time_to_full(r, BiasField::uniform(r, Rational(10)), seeds, 1000, 1);
    CHECK(h.timeouts == 0);
    // variance of a geometric(1/2) is 2
    CHECK(std::abs(h.mean - 2.0) < 4 * std::sqrt(2.0 / seeds.size()));
}

TEST_CASE("hitting time domination under a larger bias")
{
    auto r = make_rectangle({4, 4});
    std::vector<Rational> high;
    for (CubeId c = 0; c < r->volume(); ++c) high.emplace_back(2 + c % 3);
    const auto hi = BiasField::per_site(r, high);
    const auto lo = BiasField::uniform(r, Rational(2));
    const auto rep = hitting_domination(r, hi, lo, seed_list(100), 1'000'000, 1);
    CHECK(rep.pass());
    CHECK_THROWS_AS(hitting_domination(r, lo, hi, seed_list(2), 10, 1), std::invalid_argument);
}

TEST_CASE("sandwich: an inner pair coalesces no later than (empty, full)")
{
    auto r = make_rectangle({3, 4});
    const auto bias = BiasField::uniform(r, Rational(2));
    const CoupledPair inner{with_points(r, {{1, 1}, {2, 1}}), with_points(r, {{2, 3}, {3, 1}})};
    REQUIRE(inner.sigma.is_subset_of(inner.rho));
    const auto rep = sandwich_check(r, bias, inner, seed_list(200), 1'000'000);
    CHECK(rep.runs == 200);
    CHECK(rep.pass());
}

TEST_CASE("drift toward the maximum")
{
    auto sq = make_rectangle({2, 2});
    const auto d = drift_toward_max(Downset::empty(sq), BiasField::uniform(sq, Rational(2)));
    CHECK(d.up == Rational(1, 6));
    CHECK(d.down == 0);
    CHECK(d.gap() == Rational(1, 6));
    const auto f = drift_toward_max(Downset::full(sq), BiasField::uniform(sq, Rational(2)));
    CHECK(f.up == 0);
    CHECK(f.down > 0);

    CHECK(drift_toward_max_check(make_rectangle({3, 3}), BiasField::uniform(make_rectangle({3, 3}), Rational(2))).pass());
    auto cube = make_rectangle({2, 2, 2});
    const auto rep = drift_toward_max_check(cube, BiasField::uniform(cube, Rational(3)));
    CHECK(rep.pass());
    CHECK(rep.states_checked == 19);
    CHECK(rep.min_gap >= 0);
    // below lambda = d the gap can go negative
    CHECK_FALSE(drift_toward_max_check(cube, BiasField::uniform(cube, Rational(1))).pass());
}

TEST_CASE("drift classes and the hitting potential")
{
    auto sq = make_rectangle({3, 3});
    // one valley and two peaks: C2
    const Downset s = with_points(sq, {{1, 2}, {2, 1}, {1, 3}, {3, 1}, {2, 2}, {2, 3}, {3, 2}});
    CHECK(valley_count(s) == 1);
    CHECK(peak_count(s) == 2);
    CHECK(drift_class(s) == DriftClass::C2);
    CHECK(s.size() == 8);
    CHECK(hitting_potential(s) == Rational(1) + Rational(1, 4));
    CHECK(drift_class(Downset::full(sq)) == DriftClass::C1);
    CHECK(hitting_potential(Downset::full(sq)) == 0);
    CHECK(drift_class(Downset::empty(sq)) == DriftClass::C1);
    CHECK(hitting_potential(Downset::empty(sq)) == 9);
}

TEST_CASE("potential drift is reported exactly")
{
    auto sq = make_rectangle({3, 3});
    const auto rep = potential_drift_check(sq, BiasField::uniform(sq, Rational(2)));
    CHECK(rep.states_checked == 19);
    CHECK(rep.target == Rational(-1, 40));
    MESSAGE("3x3, lambda = 2: max drift " << to_fraction_string(rep.max_drift) << ", violations " << rep.violations.size());
    for (const auto& [counts, drift] : rep.violations) CHECK(drift > rep.target);
}

TEST_CASE("threshold grid")
{
    auto r = make_rectangle({1, 2});
    const auto grid = threshold_grid(BiasField::per_site(r, std::vector<Rational>{1, 4}));
    CHECK(std::is_sorted(grid.begin(), grid.end()));
    CHECK(std::find(grid.begin(), grid.end(), 0.25) != grid.end());
    CHECK(std::find(grid.begin(), grid.end(), 0.5) != grid.end());
    CHECK(std::find(grid.begin(), grid.end(), std::nextafter(0.25, 1.0)) != grid.end());
    for (const double p : grid) {
        CHECK(p > 0.0);
        CHECK(p < 1.0);
    }
}

TEST_CASE("monotonicity: exhaustive and randomized")
{
    auto r = make_rectangle({2, 3});
    const auto ex = monotonicity_exhaustive(r, BiasField::per_site(r, std::vector<Rational>{1, 2, 3, 4, 5, 6}));
    CHECK(ex.pass());
    CHECK(ex.pairs > 0);
    auto big = make_rectangle({5, 5});
    std::vector<Rational> l;
    for (CubeId c = 0; c < big->volume(); ++c) l.emplace_back(1 + c % 4);
    const auto rnd = monotonicity_random(big, BiasField::per_site(big, l), 20000, 3);
    CHECK(rnd.draws == 20000);
    CHECK(rnd.pass());
}
