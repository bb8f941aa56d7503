#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "bathtub/analysis.hpp"
#include "bathtub/engines.hpp"
#include "bathtub/fixtures.hpp"

using namespace bathtub;

namespace {

SimConfig toy_scenario(double duration = 3600.0, double alpha = 0.0) {
    DemandProfile ramp({{0.0, 0.4}, {duration * 0.4, 3.2}, {duration, 0.4}});
    return SimConfig{duration,
                     60.0,
                     1.0,
                     fixtures::toy_params(),
                     std::move(ramp),
                     static_tdd(fixtures::toy_static_tdd()),
                     alpha,
                     60.0};
}

}  // namespace

TEST_CASE("smoothing with p = 1 is the identity") {
    const std::vector<double> series{3.0, 1.0, 4.0, 1.0, 5.0};
    CHECK(exponential_smooth(series, 1.0) == series);
}

TEST_CASE("smoothing preserves constant series") {
    const std::vector<double> series(25, 7.5);
    CHECK(exponential_smooth(series, 0.2) == series);
}

TEST_CASE("smoothing a step series follows the recurrence") {
    const std::vector<double> series{0.0, 0.0, 1.0, 1.0, 1.0};
    const auto smoothed = exponential_smooth(series, 0.2);
    CHECK(smoothed[2] == doctest::Approx(0.2));
    CHECK(smoothed[3] == doctest::Approx(0.36));
    CHECK(smoothed[4] == doctest::Approx(0.488));
}

TEST_CASE("smoothing converges to the limit of eventually-constant inputs") {
    std::vector<double> series(200, 5.0);
    for (int i = 0; i < 10; ++i) series[i] = 0.0;
    const auto smoothed = exponential_smooth(series, 0.2);
    CHECK(smoothed.back() == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("smoothing rejects bad inputs") {
    CHECK_THROWS_AS(exponential_smooth({}, 0.2), std::invalid_argument);
    const std::vector<double> series{1.0};
    CHECK_THROWS_AS(exponential_smooth(series, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(exponential_smooth(series, 1.5), std::invalid_argument);
}

TEST_CASE("normalized RMSE is zero for identical series on any window") {
    AlignedSeries series;
    for (int i = 0; i < 20; ++i) {
        series.time.push_back(60.0 * i);
        series.reference.push_back(10.0 + i);
        series.candidate.push_back(10.0 + i);
    }
    CHECK(normalized_rmse(series, 0.0, 1200.0) == 0.0);
    CHECK(normalized_rmse(series, 300.0, 400.0) == 0.0);
}

TEST_CASE("a constant offset yields c over the reference maximum") {
    AlignedSeries series;
    const double offset = 3.0;
    double max_ref = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double ref = 40.0 + 10.0 * std::sin(0.3 * i);
        series.time.push_back(60.0 * i);
        series.reference.push_back(ref);
        series.candidate.push_back(ref + offset);
        max_ref = std::max(max_ref, ref);
    }
    CHECK(normalized_rmse(series, 0.0, 60.0 * 49) ==
          doctest::Approx(offset / max_ref).epsilon(1e-12));
}

TEST_CASE("windowed NRMSE values match a brute-force summation oracle") {
    // triangle reference vs a lagged copy
    AlignedSeries series;
    const int samples = 151;
    std::vector<double> triangle(samples);
    for (int i = 0; i < samples; ++i) {
        const double t = 60.0 * i;
        triangle[i] = t <= 3600.0 ? t / 36.0 : (9000.0 - t) / 54.0;
    }
    for (int i = 0; i < samples; ++i) {
        series.time.push_back(60.0 * i);
        series.reference.push_back(triangle[i]);
        series.candidate.push_back(i >= 5 ? triangle[i - 5] : 0.0);
    }

    auto oracle = [&](double t0, double t1) {
        double sse = 0.0;
        int count = 0;
        double max_ref = 0.0;
        for (int i = 0; i < samples; ++i) max_ref = std::max(max_ref, triangle[i]);
        for (int i = 0; i < samples; ++i) {
            if (series.time[i] < t0 || series.time[i] > t1) continue;
            const double r = series.candidate[i] - series.reference[i];
            sse += r * r;
            ++count;
        }
        return std::sqrt(sse / count) / max_ref;
    };

    for (const auto& [t0, t1] : std::vector<std::pair<double, double>>{
             {0.0, 3600.0}, {3600.0, 9000.0}, {0.0, 9000.0}}) {
        CHECK(normalized_rmse(series, t0, t1) ==
              doctest::Approx(oracle(t0, t1)).epsilon(1e-12));
    }
}

TEST_CASE("normalized RMSE is invariant under joint scaling") {
    AlignedSeries series;
    for (int i = 0; i < 30; ++i) {
        series.time.push_back(double(i));
        series.reference.push_back(5.0 + i * 0.5);
        series.candidate.push_back(4.0 + i * 0.55);
    }
    auto scaled = series;
    for (auto& v : scaled.reference) v *= 37.0;
    for (auto& v : scaled.candidate) v *= 37.0;
    CHECK(normalized_rmse(series, 0.0, 29.0) ==
          doctest::Approx(normalized_rmse(scaled, 0.0, 29.0)).epsilon(1e-12));
}

TEST_CASE("normalized RMSE error paths") {
    AlignedSeries series;
    series.time = {0.0, 1.0};
    series.reference = {0.0, 0.0};
    series.candidate = {1.0, 1.0};
    CHECK_THROWS_AS(normalized_rmse(series, 0.0, 1.0), std::invalid_argument);
    series.reference = {1.0, 2.0};
    CHECK_THROWS_AS(normalized_rmse(series, 5.0, 6.0), std::invalid_argument);
    series.candidate = {1.0};
    CHECK_THROWS_AS(normalized_rmse(series, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("convergence test accepts a step-independent engine at the initial dt") {
    const auto cfg = toy_scenario();
    int calls = 0;
    auto runner = [&](double dt) {
        ++calls;
        SimConfig c = cfg;
        c.engine_time_step = dt;
        return run_event_based(c).accumulation;
    };
    const auto report = convergence_test(runner, 4.0, 0.01);
    CHECK(report.converged);
    CHECK(report.converged_dt == 4.0);
    REQUIRE(report.trace.size() == 1);
    CHECK(report.trace[0].second == 0.0);
    CHECK(calls == 2);
}

TEST_CASE("the fixed-step engine converges at 2 s or finer on the toy scenario") {
    const auto cfg = toy_scenario();
    auto runner = [&](double dt) {
        SimConfig c = cfg;
        c.engine_time_step = dt;
        return run_trip_based_fixed(c).accumulation;
    };
    const auto report = convergence_test(runner, 2.0, 0.01, 6);
    CHECK(report.converged);
    CHECK(report.converged_dt <= 2.0);
}

TEST_CASE("an infinite threshold accepts the initial dt immediately") {
    auto runner = [](double) { return std::vector<double>{1.0, 2.0}; };
    const auto report =
        convergence_test(runner, 8.0, std::numeric_limits<double>::infinity());
    CHECK(report.converged);
    CHECK(report.converged_dt == 8.0);
    CHECK(report.trace.empty());
}

TEST_CASE("convergence aborts after the halving budget") {
    int calls = 0;
    auto runner = [&](double) {
        // never-stabilizing series
        ++calls;
        return std::vector<double>{static_cast<double>(calls), 0.0};
    };
    const auto report = convergence_test(runner, 8.0, 1e-9, 3);
    CHECK_FALSE(report.converged);
    CHECK(report.trace.size() == 3);
}

TEST_CASE("calibrate_alpha recovers a planted alpha of -3") {
    auto cfg = toy_scenario(3600.0);
    cfg.alpha = -3.0;
    const auto reference = run_m_model(cfg).accumulation;
    const auto report = calibrate_alpha(reference, cfg, -5.0, 5.0, 0.1);
    CHECK(std::fabs(report.alpha - (-3.0)) <= 0.1 + 1e-9);
    CHECK(report.nrmse < 1e-6);
}

TEST_CASE("calibrate_alpha returns exactly zero for an accumulation-based reference") {
    const auto cfg = toy_scenario(3600.0);
    const auto reference = run_accumulation_based(cfg).accumulation;
    const auto report = calibrate_alpha(reference, cfg, -5.0, 5.0, 0.1);
    CHECK(report.alpha == 0.0);
    CHECK(report.nrmse == 0.0);
}

TEST_CASE("a single-point grid returns that point with a one-entry curve") {
    const auto cfg = toy_scenario(1800.0);
    const auto reference = run_accumulation_based(cfg).accumulation;
    const auto report = calibrate_alpha(reference, cfg, 0.0, 0.0, 0.1, false);
    CHECK(report.alpha == 0.0);
    REQUIRE(report.curve.size() == 1);
}

TEST_CASE("calibrate_alpha records per-point failures without aborting") {
    auto cfg = toy_scenario(1800.0);
    const auto reference = run_accumulation_based(cfg).accumulation;
    // positive alpha values run away against the instability guard on this
    // scenario only with a coarse step; use a mis-sized reference to trigger
    // a uniform failure instead
    std::vector<double> short_reference(reference.begin(), reference.end() - 1);
    CHECK_THROWS_AS(calibrate_alpha(short_reference, cfg, 0.0, 0.0, 0.1, false),
                    std::runtime_error);
}

TEST_CASE("the reported optimum attains the minimum of its own curve") {
    auto cfg = toy_scenario(2400.0);
    cfg.alpha = -1.4;
    const auto reference = run_m_model(cfg).accumulation;
    const auto report = calibrate_alpha(reference, cfg, -3.0, 1.0, 0.2);
    for (const auto& point : report.curve) {
        if (!point.error.empty()) continue;
        REQUIRE(report.nrmse <= point.nrmse + 1e-15);
    }
}
