#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bathtub/engines.hpp"

namespace bathtub {

/// Reference/candidate series on shared, strictly increasing timestamps.
struct AlignedSeries {
    std::vector<double> time;
    std::vector<double> reference;
    std::vector<double> candidate;

    void validate() const;
};

/// s_0 = x_0; s_t = p x_t + (1 - p) s_{t-1}, p in (0, 1].
std::vector<double> exponential_smooth(std::span<const double> series, double smoothing);

/// RMSE over samples with t in [window_start, window_end] (inclusive),
/// normalized by the maximum reference value over the whole series.
double normalized_rmse(const AlignedSeries& series, double window_start, double window_end);

/// Mean absolute difference between two equal-length series divided by the
/// maximum absolute value of the reference series (the scale used by the
/// convergence criterion).
double mean_abs_diff_over_max(std::span<const double> candidate,
                              std::span<const double> reference);

struct ConvergenceReport {
    bool converged = false;
    double converged_dt = 0.0;
    /// (coarser dt of the compared pair, difference measure) per halving.
    std::vector<std::pair<double, double>> trace;
};

/// Repeatedly halves dt and compares consecutive accumulation series on the
/// shared output grid. Returns the coarser dt of the first pair whose
/// difference drops below the threshold.
ConvergenceReport convergence_test(
    const std::function<std::vector<double>(double dt)>& runner, double initial_dt,
    double threshold, int max_halvings = 10);

struct AlphaGridPoint {
    double alpha;
    double nrmse;        ///< NaN when the run failed
    std::string error;   ///< non-empty when the run failed
};

struct AlphaReport {
    double alpha = 0.0;
    double nrmse = 0.0;
    std::vector<AlphaGridPoint> curve;
};

/// Evaluates run_m_model over the alpha grid against the reference
/// accumulation series (same output grid as the config), returning the argmin
/// of full-window normalized RMSE. Ties break toward the smallest |alpha|
/// (non-negative preferred on exact magnitude ties). A golden-section
/// refinement pass around the grid optimum replaces it only when strictly
/// better. Per-point engine errors are recorded, not propagated.
AlphaReport calibrate_alpha(std::span<const double> reference, const SimConfig& config,
                            double grid_lo = -5.0, double grid_hi = 5.0,
                            double grid_step = 0.1, bool refine = true);

}  // namespace bathtub
