#include "bathtub/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bathtub {

void AlignedSeries::validate() const {
    if (time.size() != reference.size() || time.size() != candidate.size())
        throw std::invalid_argument("AlignedSeries: series lengths differ");
    if (time.empty()) throw std::invalid_argument("AlignedSeries: empty series");
    for (std::size_t i = 1; i < time.size(); ++i)
        if (!(time[i] > time[i - 1]))
            throw std::invalid_argument("AlignedSeries: timestamps must be strictly increasing");
}

std::vector<double> exponential_smooth(std::span<const double> series, double smoothing) {
    if (series.empty()) throw std::invalid_argument("exponential_smooth: empty series");
    if (!(smoothing > 0.0 && smoothing <= 1.0))
        throw std::invalid_argument("exponential_smooth: smoothing outside (0, 1]");
    std::vector<double> out(series.size());
    out[0] = series[0];
    for (std::size_t i = 1; i < series.size(); ++i)
        out[i] = smoothing * series[i] + (1.0 - smoothing) * out[i - 1];
    return out;
}

double normalized_rmse(const AlignedSeries& series, double window_start, double window_end) {
    series.validate();
    if (!(window_end >= window_start))
        throw std::invalid_argument("normalized_rmse: empty window");
    double max_ref = 0.0;
    for (double v : series.reference) max_ref = std::max(max_ref, v);
    if (!(max_ref > 0.0))
        throw std::invalid_argument("normalized_rmse: zero reference normalizer");
    double sse = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < series.time.size(); ++i) {
        if (series.time[i] < window_start || series.time[i] > window_end) continue;
        const double r = series.candidate[i] - series.reference[i];
        sse += r * r;
        ++count;
    }
    if (count == 0)
        throw std::invalid_argument("normalized_rmse: window contains no samples");
    return std::sqrt(sse / static_cast<double>(count)) / max_ref;
}

double mean_abs_diff_over_max(std::span<const double> candidate,
                              std::span<const double> reference) {
    if (candidate.size() != reference.size() || candidate.empty())
        throw std::invalid_argument("mean_abs_diff_over_max: length mismatch");
    double sum = 0.0;
    double max_ref = 0.0;
    for (std::size_t i = 0; i < candidate.size(); ++i) {
        sum += std::fabs(candidate[i] - reference[i]);
        max_ref = std::max(max_ref, std::fabs(reference[i]));
    }
    if (!(max_ref > 0.0)) return sum > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return sum / static_cast<double>(candidate.size()) / max_ref;
}

ConvergenceReport convergence_test(
    const std::function<std::vector<double>(double dt)>& runner, double initial_dt,
    double threshold, int max_halvings) {
    if (!(threshold > 0.0))
        throw std::invalid_argument("convergence_test: threshold must be positive");
    if (!(initial_dt > 0.0))
        throw std::invalid_argument("convergence_test: initial dt must be positive");

    ConvergenceReport report;
    if (std::isinf(threshold)) {
        report.converged = true;
        report.converged_dt = initial_dt;
        return report;
    }

    double dt = initial_dt;
    std::vector<double> coarse = runner(dt);
    for (int h = 0; h < max_halvings; ++h) {
        const double finer_dt = dt / 2.0;
        std::vector<double> fine = runner(finer_dt);
        const double diff = mean_abs_diff_over_max(coarse, fine);
        report.trace.emplace_back(dt, diff);
        if (diff < threshold) {
            report.converged = true;
            report.converged_dt = dt;
            return report;
        }
        dt = finer_dt;
        coarse = std::move(fine);
    }
    report.converged = false;
    report.converged_dt = dt;
    return report;
}

namespace {

double alpha_objective(double alpha, const SimConfig& config,
                       std::span<const double> reference) {
    SimConfig cfg = config;
    cfg.alpha = alpha;
    const SimResult result = run_m_model(cfg);
    if (result.accumulation.size() != reference.size())
        throw std::invalid_argument("calibrate_alpha: reference not aligned to output grid");
    AlignedSeries series;
    series.time = result.time;
    series.reference.assign(reference.begin(), reference.end());
    series.candidate = result.accumulation;
    return normalized_rmse(series, result.time.front(), result.time.back());
}

bool better(double alpha, double nrmse, double best_alpha, double best_nrmse) {
    if (nrmse < best_nrmse) return true;
    if (nrmse > best_nrmse) return false;
    if (std::fabs(alpha) < std::fabs(best_alpha)) return true;
    if (std::fabs(alpha) > std::fabs(best_alpha)) return false;
    return alpha > best_alpha;  // prefer the non-negative twin
}

}  // namespace

AlphaReport calibrate_alpha(std::span<const double> reference, const SimConfig& config,
                            double grid_lo, double grid_hi, double grid_step,
                            bool refine) {
    if (!(grid_step > 0.0) || grid_hi < grid_lo)
        throw std::invalid_argument("calibrate_alpha: empty alpha grid");
    if (reference.empty())
        throw std::invalid_argument("calibrate_alpha: empty reference series");

    AlphaReport report;
    double best_alpha = 0.0;
    double best_nrmse = std::numeric_limits<double>::infinity();
    bool any = false;

    const auto points = static_cast<std::size_t>(
        std::floor((grid_hi - grid_lo) / grid_step + 1e-9)) + 1;
    for (std::size_t k = 0; k < points; ++k) {
        // Snap to the grid decimals so round values like 0 and -3 are exact.
        double alpha = grid_lo + static_cast<double>(k) * grid_step;
        alpha = std::round(alpha / grid_step) * grid_step;
        AlphaGridPoint point{alpha, std::numeric_limits<double>::quiet_NaN(), {}};
        try {
            point.nrmse = alpha_objective(alpha, config, reference);
            if (!any || better(alpha, point.nrmse, best_alpha, best_nrmse)) {
                best_alpha = alpha;
                best_nrmse = point.nrmse;
                any = true;
            }
        } catch (const std::exception& ex) {
            point.error = ex.what();
        }
        report.curve.push_back(std::move(point));
    }
    if (!any) throw std::runtime_error("calibrate_alpha: every grid point failed");

    if (refine && points > 1) {
        // One golden-section pass inside the bracketing grid cells; the grid
        // optimum is replaced only by a strictly better interior point.
        double lo = best_alpha - grid_step;
        double hi = best_alpha + grid_step;
        lo = std::max(lo, grid_lo);
        hi = std::min(hi, grid_hi);
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        double a = lo, b = hi;
        double x1 = b - gr * (b - a);
        double x2 = a + gr * (b - a);
        try {
            double f1 = alpha_objective(x1, config, reference);
            double f2 = alpha_objective(x2, config, reference);
            for (int it = 0; it < 20; ++it) {
                if (f1 < f2) {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - gr * (b - a);
                    f1 = alpha_objective(x1, config, reference);
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + gr * (b - a);
                    f2 = alpha_objective(x2, config, reference);
                }
            }
            const double refined = f1 < f2 ? x1 : x2;
            const double refined_f = std::min(f1, f2);
            if (refined_f < best_nrmse) {
                best_alpha = refined;
                best_nrmse = refined_f;
            }
        } catch (const std::exception&) {
            // refinement failures leave the grid optimum in place
        }
    }

    report.alpha = best_alpha;
    report.nrmse = best_nrmse;
    return report;
}

}  // namespace bathtub
