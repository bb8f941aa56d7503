#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "bathtub/fixtures.hpp"
#include "bathtub/mfd.hpp"

using namespace bathtub;

namespace {

double hard_min(const MfdParams& p, double k) {
    return std::min({p.u_f * k, p.Q, (p.kappa - k) * p.w});
}

std::vector<MfdParams> fixture_params() {
    return {fixtures::df_params(), fixtures::du_params(), fixtures::toy_params(),
            MfdParams{0.07, 15.0, 0.25, 0.5, 4.0, 120000.0},
            MfdParams{0.05, 6.0, 0.08, 0.8, 1.5, 40000.0}};
}

}  // namespace

TEST_CASE("flow at the free-flow endpoint is within the smooth-min offset of zero") {
    const auto df = fixtures::df_params();
    const double q0 = flow_at_density(df, 0.0);
    CHECK(std::fabs(q0) <= df.lambda * std::log(3.0));
    CHECK(q0 == 0.0);  // tared form pins the endpoint exactly
}

TEST_CASE("flow vanishes at jam density") {
    const auto df = fixtures::df_params();
    CHECK(flow_at_density(df, df.kappa) <= df.lambda * std::log(3.0));
    CHECK(flow_at_density(df, df.kappa) >= 0.0);
}

TEST_CASE("toy network mid-density flow satisfies the smooth-min bracket") {
    const auto toy = fixtures::toy_params();
    const double k = toy.kappa / 2.0;
    const double q = flow_at_density(toy, k);
    CHECK(q <= hard_min(toy, k));
    CHECK(q >= hard_min(toy, k) - toy.lambda * std::log(3.0));
}

TEST_CASE("smooth-min bracket holds across the density range") {
    for (const auto& p : fixture_params()) {
        const double lower_slack = p.lambda * std::log(3.0);
        for (int i = 0; i <= 2000; ++i) {
            const double k = p.kappa * static_cast<double>(i) / 2000.0;
            const double q = flow_at_density(p, k);
            CAPTURE(k);
            REQUIRE(q <= hard_min(p, k) + 1e-12);
            REQUIRE(q >= hard_min(p, k) - lower_slack - 1e-12);
            REQUIRE(q >= 0.0);
            REQUIRE(q <= p.Q);
        }
    }
}

TEST_CASE("flow domain errors") {
    const auto df = fixtures::df_params();
    CHECK_THROWS_AS(flow_at_density(df, -0.01), std::domain_error);
    CHECK_THROWS_AS(flow_at_density(df, df.kappa * 1.01), std::domain_error);
    CHECK_THROWS_AS(speed_at_accumulation(df, -1.0), std::domain_error);
    CHECK_THROWS_AS(speed_at_accumulation(df, df.jam_accumulation() * 1.01),
                    std::domain_error);
}

TEST_CASE("speed at zero accumulation sits just below the free-flow speed") {
    const auto df = fixtures::df_params();
    const double v0 = speed_at_accumulation(df, 0.0);
    CHECK(v0 <= df.u_f);
    CHECK(v0 > df.u_f - 0.5);
}

TEST_CASE("speed vanishes at jam accumulation") {
    const auto df = fixtures::df_params();
    CHECK(speed_at_accumulation(df, df.jam_accumulation()) ==
          doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("DU speed is monotone non-increasing on a 1000-point grid") {
    const auto du = fixtures::du_params();
    double prev = speed_at_accumulation(du, 0.0);
    for (int i = 1; i <= 1000; ++i) {
        const double n = du.jam_accumulation() * static_cast<double>(i) / 1000.0;
        const double v = speed_at_accumulation(du, n);
        REQUIRE(v <= prev + 1e-12 * du.u_f);
        prev = v;
    }
}

TEST_CASE("speed is monotone non-increasing at 1e4 grid points for valid params") {
    for (const auto& p : fixture_params()) {
        double prev = speed_at_accumulation(p, 0.0);
        for (int i = 1; i <= 10000; ++i) {
            const double n = p.jam_accumulation() * static_cast<double>(i) / 10000.0;
            const double v = speed_at_accumulation(p, n);
            CAPTURE(n);
            REQUIRE(v <= prev + 1e-12 * p.u_f);
            REQUIRE(v >= 0.0);
            prev = v;
        }
    }
}

TEST_CASE("speed is strictly positive below jam accumulation") {
    const auto toy = fixtures::toy_params();
    for (int i = 0; i < 1000; ++i) {
        const double n = toy.jam_accumulation() * static_cast<double>(i) / 1000.0;
        REQUIRE(speed_at_accumulation(toy, n) > 0.0);
    }
}

TEST_CASE("flow and speed are consistent: q(k) = v(k) k") {
    const auto df = fixtures::df_params();
    for (int i = 1; i <= 500; ++i) {
        const double k = df.kappa * static_cast<double>(i) / 500.0;
        const double n = k * df.lane_distance;
        const double q = flow_at_density(df, k);
        const double v = speed_at_accumulation(df, n);
        REQUIRE(v * k == doctest::Approx(q).epsilon(1e-14));
    }
}

namespace {

std::vector<SpeedAccPoint> synthetic_data(const MfdParams& truth, int points = 60) {
    std::vector<SpeedAccPoint> data;
    for (int i = 0; i <= points; ++i) {
        const double n = 0.9 * truth.jam_accumulation() * static_cast<double>(i) /
                         static_cast<double>(points);
        data.push_back({n, speed_at_accumulation(truth, n)});
    }
    return data;
}

MfdParams perturb(const MfdParams& p, double factor) {
    // lambda stays inside its own bounds
    return {std::clamp(p.lambda * factor, 0.03, 0.07), p.u_f * factor, p.Q * factor,
            p.kappa * factor, p.w * factor, p.lane_distance};
}

}  // namespace

TEST_CASE("calibration recovers known parameters from noiseless data") {
    const auto truth = fixtures::toy_params();
    const auto data = synthetic_data(truth);
    double max_speed = 0.0;
    for (const auto& pt : data) max_speed = std::max(max_speed, pt.speed);

    CalibrationConfig config{perturb(truth, 1.1)};
    config.max_iterations = 400;
    const auto [fitted, report] = calibrate(data, config);
    CHECK(report.improved);
    CHECK(report.rmse_final < 1e-6 * max_speed);
    CHECK(report.rmse_final <= report.rmse_initial);
    CHECK(fitted.lambda >= 0.03);
    CHECK(fitted.lambda <= 0.07);
    CHECK(fitted.u_f >= config.initial.u_f * 0.8 - 1e-12);
    CHECK(fitted.u_f <= config.initial.u_f * 1.2 + 1e-12);
    CHECK(fitted.Q >= config.initial.Q * 0.8 - 1e-12);
    CHECK(fitted.Q <= config.initial.Q * 1.2 + 1e-12);
    CHECK(fitted.kappa >= config.initial.kappa * 0.8 - 1e-12);
    CHECK(fitted.kappa <= config.initial.kappa * 1.2 + 1e-12);
    CHECK(fitted.w >= config.initial.w * 0.8 - 1e-12);
    CHECK(fitted.w <= config.initial.w * 1.2 + 1e-12);
}

TEST_CASE("calibration with an already-optimal single point returns the initial") {
    const auto truth = fixtures::df_params();
    const std::vector<SpeedAccPoint> data{{0.0, speed_at_accumulation(truth, 0.0)}};
    CalibrationConfig config{truth};
    const auto [fitted, report] = calibrate(data, config);
    CHECK_FALSE(report.improved);
    CHECK(report.rmse_final == report.rmse_initial);
    CHECK(fitted.lambda == truth.lambda);
    CHECK(fitted.u_f == truth.u_f);
}

TEST_CASE("calibration on DF-like traces keeps lambda inside its range") {
    const auto truth = fixtures::df_params();
    auto data = synthetic_data(truth, 40);
    // mimic imperfect traces with a deterministic speed bias
    for (std::size_t i = 0; i < data.size(); ++i)
        data[i].speed *= 1.0 + 0.02 * std::sin(static_cast<double>(i));
    CalibrationConfig config{perturb(truth, 0.95)};
    const auto [fitted, report] = calibrate(data, config);
    CHECK(fitted.lambda >= 0.03);
    CHECK(fitted.lambda <= 0.07);
    CHECK(report.rmse_final <= report.rmse_initial);
}

TEST_CASE("calibration is deterministic") {
    const auto truth = fixtures::du_params();
    const auto data = synthetic_data(truth, 30);
    CalibrationConfig config{perturb(truth, 1.08)};
    const auto [a, ra] = calibrate(data, config);
    const auto [b, rb] = calibrate(data, config);
    CHECK(a.lambda == b.lambda);
    CHECK(a.u_f == b.u_f);
    CHECK(a.Q == b.Q);
    CHECK(a.kappa == b.kappa);
    CHECK(a.w == b.w);
    CHECK(ra.rmse_final == rb.rmse_final);
}

TEST_CASE("calibration rejects empty data and bad configs") {
    CalibrationConfig config{fixtures::df_params()};
    CHECK_THROWS_AS(calibrate({}, config), std::invalid_argument);
    config.bound_fraction = 1.5;
    const std::vector<SpeedAccPoint> data{{0.0, 19.0}};
    CHECK_THROWS_AS(calibrate(data, config), std::invalid_argument);
}

TEST_CASE("MfdParams validation rejects nonphysical values") {
    CHECK_THROWS_AS((MfdParams{0.03, -1.0, 0.3, 0.5, 2.0, 1000.0}).validate(),
                    std::invalid_argument);
    CHECK_THROWS_AS((MfdParams{0.5, 10.0, 0.3, 0.5, 2.0, 1000.0}).validate(),
                    std::invalid_argument);
    CHECK_THROWS_AS((MfdParams{0.03, 2.0, 0.3, 0.5, 3.0, 1000.0}).validate(),
                    std::invalid_argument);
}

TEST_CASE("a zero iteration budget returns the initial parameters unimproved") {
    const auto truth = fixtures::du_params();
    const auto data = synthetic_data(truth, 20);
    CalibrationConfig config{perturb(truth, 1.05)};
    config.max_iterations = 0;
    const auto [fitted, report] = calibrate(data, config);
    CHECK_FALSE(report.improved);
    CHECK(report.rmse_final == report.rmse_initial);
    CHECK(fitted.u_f == config.initial.u_f);
}
