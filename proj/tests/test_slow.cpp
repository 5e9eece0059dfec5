#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "surfmix/slow.hpp"

using namespace surfmix;

TEST_CASE("thresholds")
{
    CHECK(slow_threshold(4) == 2);
    CHECK(slow_threshold(5) == 2);
    CHECK(slow_threshold(9) == 6);
    CHECK(slow_threshold(10) == 6);
    CHECK(slow_threshold(16) == 12);
    CHECK(xi_upper_bracket() == doctest::Approx(4 * std::exp(2.5)));
}

TEST_CASE("instance construction")
{
    const auto four = build_slow_instance(4);
    CHECK(four.eps == Rational(1, 16));
    CHECK(four.m == 2);
    std::vector<Point> high;
    for (CubeId c = 0; c < four.region->volume(); ++c)
        if (four.is_high(c)) high.push_back(four.region->point(c));
    std::sort(high.begin(), high.end());
    CHECK(high == std::vector<Point>{{3, 4}, {4, 3}, {4, 4}});
    for (CubeId c = 0; c < four.region->volume(); ++c) {
        CHECK(four.bias.exact_lambda(c) > 1);
        CHECK(four.bias.exact_lambda(c) == (four.is_high(c) ? four.xi : 1 + four.eps));
    }
    CHECK(four.xi > 1 + four.eps);
    CHECK(to_double(four.xi) < xi_upper_bracket());

    const auto nine = build_slow_instance(9, Rational(3));
    CHECK(nine.eps == Rational(1, 36));
    CHECK(nine.m == 6);
    CHECK(nine.xi == 3);
    CHECK(nine.bias.exact_lower() == Rational(37, 36));

    CHECK_THROWS_AS(build_slow_instance(3), std::invalid_argument);
    CHECK_THROWS_AS(build_slow_instance(5, Rational(1)), std::invalid_argument);
}

TEST_CASE("staircase walks and heights")
{
    const auto inst = build_slow_instance(4);
    const Downset e = Downset::empty(inst.region), f = Downset::full(inst.region);
    CHECK(staircase_walk(e) == std::vector<int>{-1, -1, -1, -1, 1, 1, 1, 1});
    CHECK(staircase_walk(f) == std::vector<int>{1, 1, 1, 1, -1, -1, -1, -1});
    CHECK(max_height(e) == 0);
    CHECK(max_height(f) == 4);
    CHECK(classify(e, inst.m) == WalkClass::S1);
    CHECK(classify(f, inst.m) == WalkClass::S3);
    CHECK(max_height(std::vector<int>{}) == 0);
    CHECK(max_height(std::vector<int>{-1, 1, 1, -1}) == 1);
}

TEST_CASE("walk classes partition the state space and match the cube rule")
{
    for (int n = 4; n <= 6; ++n) {
        const auto inst = build_slow_instance(n);
        std::size_t count = 0;
        std::array<std::size_t, 3> sizes{};
        for (const auto& counts : enumerate_downsets(*inst.region)) {
            const Downset s = Downset::from_counts(inst.region, counts);
            const auto walk = staircase_walk(s);
            REQUIRE(walk.size() == static_cast<std::size_t>(2 * n));
            CHECK(std::accumulate(walk.begin(), walk.end(), 0) == 0);
            const WalkClass cls = classify(s, inst.m);
            ++sizes[static_cast<int>(cls)];
            bool has_high = false;
            int reach = 0;
            for (const CubeId c : s.cubes()) {
                has_high = has_high || inst.is_high(c);
                reach = std::max(reach, inst.region->l1_norm(c));
            }
            CHECK((cls == WalkClass::S3) == has_high);
            CHECK(max_height(s) == std::max(0, reach - n));
            ++count;
        }
        if (n == 4) CHECK(count == 70);
        CHECK(sizes[0] + sizes[1] + sizes[2] == count);
        const auto dp = slow_counts(n);
        BigInt s1 = 0, s2 = 0, s3 = 0;
        for (const auto& c : dp.s1) s1 += c;
        for (const auto& c : dp.s2) s2 += c;
        for (const auto& [k, c] : dp.s3) s3 += c;
        CHECK(s1 == sizes[0]);
        CHECK(s2 == sizes[1]);
        CHECK(s3 == sizes[2]);
        CHECK(dp.total() == count);
    }
    CHECK(slow_counts(10).total() == 184756);
}

TEST_CASE("class masses agree with the enumerated model")
{
    const auto inst = build_slow_instance(5, Rational(7, 2));
    const auto mass = class_mass(slow_counts(5), inst.eps, inst.xi);
    const auto rep = bottleneck_report(inst, false);
    CHECK(rep.pi_s1 == mass.s1 / mass.total());
    CHECK(rep.pi_s2 == mass.s2 / mass.total());
    CHECK(rep.pi_s3 == mass.s3 / mass.total());
    CHECK(rep.pi_s1 + rep.pi_s2 + rep.pi_s3 == 1);
}

TEST_CASE("g is increasing in xi")
{
    const auto counts = slow_counts(6);
    const Rational eps(1, 24);
    double previous = slow_g(counts, eps, 1 + 1.0 / 24);
    for (double xi = 1.1; xi < xi_upper_bracket(); xi *= 1.3) {
        const double g = slow_g(counts, eps, xi);
        CHECK(g > previous);
        previous = g;
    }
}

TEST_CASE("xi tuning: root or bracket failure, stable in the tolerance")
{
    for (int n = 4; n <= 10; ++n) {
        try {
            const auto t = tune_xi(n, 1e-9);
            MESSAGE("n = " << n << ": xi* = " << to_double(t.xi) << ", g(1+eps) = " << t.g_low << ", residual " << t.relative_residual);
            CHECK(t.g_low < 0);
            CHECK(t.g_high > 0);
            CHECK(t.relative_residual <= 1e-6);
            CHECK(t.xi >= 1 + Rational(1, 4 * n));
            const auto finer = tune_xi(n, 5e-10);
            CHECK(std::abs(to_double(finer.xi) - to_double(t.xi)) <= 1e-9 * to_double(t.xi));
        } catch (const BracketFailure& e) {
            MESSAGE("n = " << n << ": bracket failure, g(1+eps) = " << e.g_low() << ", g(4e^2.5) = " << e.g_high());
            CHECK_FALSE((e.g_low() < 0 && e.g_high() > 0));
        }
    }
    CHECK_THROWS_AS(tune_xi(5, 0.0), std::invalid_argument);
}

TEST_CASE("bottleneck report at n = 4")
{
    std::optional<Rational> xi;
    try {
        xi = tune_xi(4).xi;
    } catch (const BracketFailure&) {
    }
    const auto inst = build_slow_instance(4, xi);
    const auto rep = bottleneck_report(inst, true, default_enumeration_cap, 1);
    CHECK(rep.states == 70);
    CHECK(rep.pi_s1 + rep.pi_s2 + rep.pi_s3 == 1);
    CHECK(rep.s1_to_s3_blocked);
    CHECK(rep.cut_bound_holds);
    CHECK(rep.cut.escape <= rep.pi_s2);
    REQUIRE(rep.mixing);
    if (rep.cut.mixing_lower_bound) CHECK(*rep.cut.mixing_lower_bound <= double(rep.mixing->tau));
}

TEST_CASE("simulation mode is deterministic")
{
    const auto inst = build_slow_instance(12, Rational(5));
    const std::vector<std::uint64_t> seeds{1, 2};
    const auto a = simulate_slow(inst, seeds, 20000, 1);
    const auto b = simulate_slow(inst, seeds, 20000, 2);
    CHECK(a.from_empty == b.from_empty);
    CHECK(a.from_full == b.from_full);
    CHECK(a.from_empty[0] + a.from_empty[1] + a.from_empty[2] == doctest::Approx(1.0));
    CHECK(a.mean_size_full >= a.mean_size_empty);
    CHECK_THROWS_AS(simulate_slow(inst, seeds, 1, 1), std::invalid_argument);
}
