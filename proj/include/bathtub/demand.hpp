#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bathtub/tdd.hpp"

namespace bathtub {

/// Piecewise-linear inflow rate over time.
class DemandProfile {
public:
    /// Breakpoints (time [s], rate [veh/s]); times strictly increasing, rates >= 0.
    explicit DemandProfile(std::vector<std::pair<double, double>> breakpoints);

    /// Linear interpolation; error outside [start_time, end_time].
    double rate_at(double t) const;

    /// Exact integral of the piecewise-linear rate over [a, b] (both inside support).
    double integrate(double a, double b) const;

    double start_time() const { return points_.front().first; }
    double end_time() const { return points_.back().first; }
    const std::vector<std::pair<double, double>>& breakpoints() const { return points_; }

private:
    std::vector<std::pair<double, double>> points_;
};

/// Per-OD-class multiplier schedules, piecewise-constant per stage.
struct ClassCoefficientSchedule {
    struct ClassEntry {
        std::string label;
        std::vector<std::pair<double, double>> stages;  ///< (stage start [s], multiplier)
    };
    std::vector<ClassEntry> classes;

    void validate() const;
    double multiplier_at(const std::string& label, double t) const;
};

/// Scales each class's category proportions by its stage multiplier at t,
/// renormalizes, merges categories with identical distances, and recomputes
/// moments. The merged base proportions must sum to 1.
TddSpec apply_class_coefficients(
    const std::vector<std::pair<std::string, std::vector<TddCategory>>>& base_by_class,
    const ClassCoefficientSchedule& schedule, double t);

}  // namespace bathtub
