#include "bathtub/mfd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace bathtub {

namespace {

constexpr double kDomainSlack = 1e-12;

// Stable lower log-sum-exp envelope of the three flow branches.
double lse_envelope(const MfdParams& p, double k) {
    const double a = p.u_f * k;
    const double b = p.Q;
    const double c = (p.kappa - k) * p.w;
    const double m = std::min({a, b, c});
    const double sum = std::exp(-(a - m) / p.lambda) + std::exp(-(b - m) / p.lambda) +
                       std::exp(-(c - m) / p.lambda);
    return m - p.lambda * std::log(sum);
}

double hard_min(const MfdParams& p, double k) {
    return std::min({p.u_f * k, p.Q, (p.kappa - k) * p.w});
}

}  // namespace

void MfdParams::validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(lambda) || !positive(u_f) || !positive(Q) || !positive(kappa) ||
        !positive(w) || !positive(lane_distance))
        throw std::invalid_argument("MfdParams: all parameters must be positive and finite");
    if (lambda < 0.03 || lambda > 0.07)
        throw std::invalid_argument("MfdParams: lambda outside [0.03, 0.07]");
    if (w >= u_f)
        throw std::invalid_argument("MfdParams: wave speed w must be below free-flow speed u_f");
}

double flow_at_density(const MfdParams& params, double k) {
    if (!(k >= -kDomainSlack * params.kappa) || k > params.kappa * (1.0 + kDomainSlack))
        throw std::domain_error("flow_at_density: density outside [0, kappa]");
    k = std::clamp(k, 0.0, params.kappa);
    // The raw envelope is slightly negative at k = 0 (the other branches leak
    // into the sum), which would make q(k)/k non-monotone near the origin.
    // Taring at the origin and capping by the hard minimum keeps the flow in
    // [0, Q], inside the lse bracket, and the speed map monotone.
    const double tared = lse_envelope(params, k) - lse_envelope(params, 0.0);
    return std::max(0.0, std::min(tared, hard_min(params, k)));
}

double speed_at_accumulation(const MfdParams& params, double n) {
    const double n_max = params.jam_accumulation();
    if (!(n >= -kDomainSlack * n_max) || n > n_max * (1.0 + kDomainSlack))
        throw std::domain_error("speed_at_accumulation: accumulation outside [0, kappa*L_N]");
    if (n <= 0.0) {
        const double k0 = 1e-9 * params.kappa;
        return (flow_at_density(params, k0) - flow_at_density(params, 0.0)) / k0;
    }
    const double k = std::min(n / params.lane_distance, params.kappa);
    return flow_at_density(params, k) / k;
}

namespace {

using Vec5 = std::array<double, 5>;

Vec5 to_vec(const MfdParams& p) { return {p.lambda, p.u_f, p.Q, p.kappa, p.w}; }

MfdParams from_vec(const Vec5& v, double lane_distance) {
    return MfdParams{v[0], v[1], v[2], v[3], v[4], lane_distance};
}

// Speed model that tolerates data accumulations beyond the candidate's jam
// accumulation during fitting (clamps instead of throwing).
double model_speed(const Vec5& theta, double lane_distance, double n) {
    MfdParams p = from_vec(theta, lane_distance);
    if (n >= p.jam_accumulation()) return 0.0;
    if (n <= 0.0) {
        const double k0 = 1e-9 * p.kappa;
        return flow_at_density(p, k0) / k0;
    }
    const double k = n / lane_distance;
    return flow_at_density(p, k) / k;
}

double sse(const Vec5& theta, double lane_distance, std::span<const SpeedAccPoint> data) {
    double s = 0.0;
    for (const auto& pt : data) {
        const double r = model_speed(theta, lane_distance, pt.accumulation) - pt.speed;
        s += r * r;
    }
    return s;
}

// Solves a symmetric positive-definite 5x5 system via Gaussian elimination
// with partial pivoting. Returns false if singular.
bool solve5(std::array<std::array<double, 5>, 5> a, Vec5 b, Vec5& x) {
    for (int col = 0; col < 5; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 5; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        if (std::fabs(a[pivot][col]) < 1e-300) return false;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (int r = col + 1; r < 5; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 5; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (int r = 4; r >= 0; --r) {
        double acc = b[r];
        for (int c = r + 1; c < 5; ++c) acc -= a[r][c] * x[c];
        x[r] = acc / a[r][r];
    }
    return true;
}

}  // namespace

std::pair<MfdParams, FitReport> calibrate(std::span<const SpeedAccPoint> data,
                                          const CalibrationConfig& config) {
    if (data.empty()) throw std::invalid_argument("calibrate: empty data");
    config.initial.validate();
    if (!(config.bound_fraction > 0.0 && config.bound_fraction < 1.0))
        throw std::invalid_argument("calibrate: bound_fraction must be in (0, 1)");
    if (!(config.lambda_lo < config.lambda_hi))
        throw std::invalid_argument("calibrate: empty lambda bounds");
    if (config.initial.lambda < config.lambda_lo || config.initial.lambda > config.lambda_hi)
        throw std::invalid_argument("calibrate: initial lambda outside its bounds");

    const double lane_distance = config.initial.lane_distance;
    const Vec5 theta0 = to_vec(config.initial);
    Vec5 lo{config.lambda_lo, 0, 0, 0, 0};
    Vec5 hi{config.lambda_hi, 0, 0, 0, 0};
    for (int j = 1; j < 5; ++j) {
        lo[j] = theta0[j] * (1.0 - config.bound_fraction);
        hi[j] = theta0[j] * (1.0 + config.bound_fraction);
    }
    auto clamp_box = [&](Vec5 v) {
        for (int j = 0; j < 5; ++j) v[j] = std::clamp(v[j], lo[j], hi[j]);
        return v;
    };

    const std::size_t n_pts = data.size();
    Vec5 theta = theta0;
    double best_sse = sse(theta, lane_distance, data);
    const double rmse_initial = std::sqrt(best_sse / static_cast<double>(n_pts));

    // Levenberg-Marquardt with central-difference Jacobian and box clamping.
    double mu = 1e-3;
    int iterations = 0;
    bool any_accept = false;
    double last_rmse = rmse_initial;
    for (int iter = 0; iter < config.max_iterations; ++iter) {
        iterations = iter + 1;
        std::vector<std::array<double, 5>> jac(n_pts);
        std::vector<double> res(n_pts);
        for (std::size_t i = 0; i < n_pts; ++i)
            res[i] = model_speed(theta, lane_distance, data[i].accumulation) - data[i].speed;
        for (int j = 0; j < 5; ++j) {
            const double h = std::max(1e-7 * std::fabs(theta[j]), 1e-10);
            Vec5 tp = theta, tm = theta;
            tp[j] += h;
            tm[j] -= h;
            for (std::size_t i = 0; i < n_pts; ++i) {
                const double fp = model_speed(tp, lane_distance, data[i].accumulation);
                const double fm = model_speed(tm, lane_distance, data[i].accumulation);
                jac[i][j] = (fp - fm) / (2.0 * h);
            }
        }
        std::array<std::array<double, 5>, 5> jtj{};
        Vec5 jtr{};
        for (std::size_t i = 0; i < n_pts; ++i) {
            for (int r = 0; r < 5; ++r) {
                jtr[r] += jac[i][r] * res[i];
                for (int c = 0; c < 5; ++c) jtj[r][c] += jac[i][r] * jac[i][c];
            }
        }

        bool stepped = false;
        for (int attempt = 0; attempt < 25; ++attempt) {
            auto damped = jtj;
            for (int j = 0; j < 5; ++j)
                damped[j][j] += mu * std::max(jtj[j][j], 1e-12);
            Vec5 delta{};
            Vec5 rhs{-jtr[0], -jtr[1], -jtr[2], -jtr[3], -jtr[4]};
            if (!solve5(damped, rhs, delta)) {
                mu *= 10.0;
                continue;
            }
            const Vec5 candidate = clamp_box({theta[0] + delta[0], theta[1] + delta[1],
                                              theta[2] + delta[2], theta[3] + delta[3],
                                              theta[4] + delta[4]});
            const double cand_sse = sse(candidate, lane_distance, data);
            if (cand_sse < best_sse) {
                theta = candidate;
                best_sse = cand_sse;
                mu = std::max(mu / 3.0, 1e-12);
                stepped = true;
                any_accept = true;
                break;
            }
            mu *= 4.0;
            if (mu > 1e14) break;
        }
        if (!stepped) break;
        const double rmse = std::sqrt(best_sse / static_cast<double>(n_pts));
        if (last_rmse - rmse < config.tolerance && iter > 0) break;
        last_rmse = rmse;
    }

    FitReport report;
    report.rmse_initial = rmse_initial;
    report.iterations = iterations;
    report.improved = any_accept;
    if (!any_accept) {
        report.rmse_final = rmse_initial;
        return {config.initial, report};
    }
    report.rmse_final = std::sqrt(best_sse / static_cast<double>(n_pts));
    for (int j = 0; j < 5; ++j)
        report.at_bound[j] = (theta[j] <= lo[j] || theta[j] >= hi[j]);
    MfdParams fitted = from_vec(theta, lane_distance);
    fitted.validate();
    return {fitted, report};
}

}  // namespace bathtub
