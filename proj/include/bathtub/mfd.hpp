#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

namespace bathtub {

/// Smooth-minimum MFD parameters plus the active network lane distance.
///
/// The flow map is the lower log-sum-exp envelope of the three branches
/// u_f*k, Q and (kappa-k)*w, tared so that flow(0) == 0 exactly and capped by
/// the hard minimum. lambda shares the flow units [veh/s] of the branches.
struct MfdParams {
    double lambda;         ///< smoothing parameter [veh/s]
    double u_f;            ///< free-flow speed [m/s]
    double Q;              ///< capacity average flow [veh/s]
    double kappa;          ///< jam density [veh/m]
    double w;              ///< backward wave speed [m/s]
    double lane_distance;  ///< total active lane distance L_N [m*lane]

    /// Throws std::invalid_argument on non-positive parameters, lambda outside
    /// [0.03, 0.07], or w >= u_f (the congested branch must stay below free flow).
    void validate() const;

    double jam_accumulation() const { return kappa * lane_distance; }
};

struct SpeedAccPoint {
    double accumulation;  ///< [veh]
    double speed;         ///< [m/s]
};

struct CalibrationConfig {
    MfdParams initial;
    double bound_fraction = 0.2;   ///< physical parameters stay in X*(1 +- fraction)
    double lambda_lo = 0.03;
    double lambda_hi = 0.07;
    int max_iterations = 200;
    double tolerance = 1e-12;      ///< stop when the RMSE improvement drops below this
};

struct FitReport {
    double rmse_initial = 0.0;
    double rmse_final = 0.0;
    int iterations = 0;
    bool improved = false;
    std::array<bool, 5> at_bound{};  ///< lambda, u_f, Q, kappa, w
};

/// Average flow q(k) [veh/s] at density k [veh/m]. Domain error outside [0, kappa].
double flow_at_density(const MfdParams& params, double k);

/// Network mean speed V(n) [m/s] at accumulation n [veh].
/// V(0) is the one-sided finite-difference limit of q(k)/k at k = 1e-9*kappa.
/// Domain error outside [0, kappa*lane_distance].
double speed_at_accumulation(const MfdParams& params, double n);

/// Bounded nonlinear least squares on speed residuals. Physical parameters are
/// boxed at initial*(1 +- bound_fraction), lambda at [lambda_lo, lambda_hi].
/// Deterministic; never returns parameters outside the box and never increases
/// the RMSE relative to the initial guess.
std::pair<MfdParams, FitReport> calibrate(std::span<const SpeedAccPoint> data,
                                          const CalibrationConfig& config);

}  // namespace bathtub
