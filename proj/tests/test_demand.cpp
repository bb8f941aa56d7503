#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bathtub/demand.hpp"
#include "bathtub/fixtures.hpp"

using namespace bathtub;

TEST_CASE("inflow interpolates linearly between breakpoints") {
    const DemandProfile profile({{0.0, 0.0}, {600.0, 2.0}});
    CHECK(profile.rate_at(300.0) == doctest::Approx(1.0));
    CHECK(profile.rate_at(0.0) == 0.0);
    CHECK(profile.rate_at(600.0) == 2.0);
    CHECK_THROWS_AS(profile.rate_at(-1.0), std::domain_error);
    CHECK_THROWS_AS(profile.rate_at(601.0), std::domain_error);
}

TEST_CASE("breakpoint evaluation is exact") {
    const DemandProfile profile({{0.0, 0.5}, {100.0, 3.25}, {400.0, 1.0}});
    CHECK(profile.rate_at(100.0) == 3.25);
    CHECK(profile.rate_at(400.0) == 1.0);
}

TEST_CASE("profile validation") {
    CHECK_THROWS_AS(DemandProfile({{0.0, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(DemandProfile({{0.0, 1.0}, {0.0, 2.0}}), std::invalid_argument);
    CHECK_THROWS_AS(DemandProfile({{0.0, 1.0}, {10.0, -2.0}}), std::invalid_argument);
}

TEST_CASE("built-in profile demand integrates to the trapezoid oracle") {
    // peak level around 20000 veh/h = 5.56 veh/s over a 2.5 h horizon
    const auto profile = fixtures::builtin_profile("profile1", 5.56, 9000.0);

    // independent trapezoid over the breakpoints
    double oracle = 0.0;
    const auto& pts = profile.breakpoints();
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        oracle += 0.5 * (pts[i].second + pts[i + 1].second) * (pts[i + 1].first - pts[i].first);

    CHECK(profile.integrate(0.0, 9000.0) == doctest::Approx(oracle).epsilon(1e-12));
    // partial windows agree with a fine Riemann oracle
    double riemann = 0.0;
    const int steps = 200000;
    const double a = 1234.0, b = 7777.0;
    for (int i = 0; i < steps; ++i) {
        const double t = a + (b - a) * (static_cast<double>(i) + 0.5) / steps;
        riemann += profile.rate_at(t) * (b - a) / steps;
    }
    CHECK(profile.integrate(a, b) == doctest::Approx(riemann).epsilon(1e-6));
}

TEST_CASE("built-in profiles are continuous, non-negative, and peak-limited") {
    for (const char* name : {"profile1", "profile2"}) {
        const auto profile = fixtures::builtin_profile(name, 4.0, 9000.0);
        for (int i = 0; i <= 900; ++i) {
            const double t = 10.0 * static_cast<double>(i);
            const double r = profile.rate_at(t);
            REQUIRE(r >= 0.0);
            REQUIRE(r <= 4.0 + 1e-12);
        }
    }
    CHECK_THROWS_AS(fixtures::builtin_profile("nope", 1.0, 100.0), std::invalid_argument);
}

TEST_CASE("identity coefficients reproduce the merged base TDD") {
    const auto base = fixtures::df_class_tdds();
    ClassCoefficientSchedule identity;
    for (const auto& [label, cats] : base)
        identity.classes.push_back({label, {{0.0, 1.0}}});

    const auto merged = apply_class_coefficients(base, identity, 100.0);
    double base_mean = 0.0;
    std::size_t base_count = 0;
    for (const auto& [label, cats] : base) {
        base_count += cats.size();
        for (const auto& c : cats) base_mean += c.proportion * c.mean_distance;
    }
    CHECK(merged.categories().size() == base_count);
    CHECK(merged.mean_distance() == doctest::Approx(base_mean).epsilon(1e-12));
    double sum = 0.0;
    for (const auto& c : merged.categories()) sum += c.proportion;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a zero multiplier excludes that class and renormalizes the rest") {
    const std::vector<std::pair<std::string, std::vector<TddCategory>>> base{
        {"near", {{1000.0, 0.4}, {2000.0, 0.2}}},
        {"far", {{8000.0, 0.4}}},
    };
    ClassCoefficientSchedule schedule;
    schedule.classes = {{"near", {{0.0, 2.0}}}, {"far", {{0.0, 0.0}}}};
    const auto spec = apply_class_coefficients(base, schedule, 50.0);
    REQUIRE(spec.categories().size() == 2);
    CHECK(spec.categories()[0].mean_distance == 1000.0);
    CHECK(spec.categories()[0].proportion == doctest::Approx(4.0 / 6.0));
    CHECK(spec.categories()[1].proportion == doctest::Approx(2.0 / 6.0));

    ClassCoefficientSchedule all_zero;
    all_zero.classes = {{"near", {{0.0, 0.0}}}, {"far", {{0.0, 0.0}}}};
    CHECK_THROWS_AS(apply_class_coefficients(base, all_zero, 50.0), std::invalid_argument);
}

TEST_CASE("the DF-style schedule produces monotonically decreasing stage means") {
    const auto base = fixtures::df_class_tdds();
    const auto schedule = fixtures::df_class_schedule();
    const double m1 = apply_class_coefficients(base, schedule, 0.0).mean_distance();
    const double m2 = apply_class_coefficients(base, schedule, 3000.0).mean_distance();
    const double m3 = apply_class_coefficients(base, schedule, 6000.0).mean_distance();
    CHECK(m1 > m2);
    CHECK(m2 > m3);
}

TEST_CASE("coefficient outputs always satisfy the TDD invariants") {
    const auto base = fixtures::df_class_tdds();
    const auto schedule = fixtures::df_class_schedule();
    for (double t : {0.0, 1500.0, 3000.0, 4500.0, 6000.0, 8999.0}) {
        const auto spec = apply_class_coefficients(base, schedule, t);
        double sum = 0.0;
        double mean = 0.0;
        for (const auto& c : spec.categories()) {
            sum += c.proportion;
            mean += c.proportion * c.mean_distance;
        }
        REQUIRE(sum == doctest::Approx(1.0).epsilon(1e-12));
        REQUIRE(mean == doctest::Approx(spec.mean_distance()).epsilon(1e-12));
    }
}

TEST_CASE("schedule lookups") {
    const auto schedule = fixtures::df_class_schedule();
    CHECK(schedule.multiplier_at("ext-ext", 0.0) == 1.5);
    CHECK(schedule.multiplier_at("ext-ext", 3000.0) == 1.0);
    CHECK(schedule.multiplier_at("ext-ext", 9000.0) == 0.5);
    CHECK_THROWS_AS(schedule.multiplier_at("missing", 0.0), std::invalid_argument);
    CHECK_THROWS_AS(schedule.multiplier_at("ext-ext", -5.0), std::domain_error);
}
