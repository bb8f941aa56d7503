#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace bathtub {

struct TddCategory {
    double mean_distance;  ///< D_d [m]
    double proportion;     ///< p_d
};

enum class TddLevel { MeanOnly, Categorical, Individual };

/// Trip-distance distribution at one aggregation level. Immutable after
/// construction; moments are always populated (MeanOnly has variance 0 by
/// definition, Individual derives moments from its explicit list).
class TddSpec {
public:
    static TddSpec mean_only(double mean_distance_m);
    static TddSpec categorical(std::vector<TddCategory> categories);
    static TddSpec individual(std::vector<double> distances_m);

    TddLevel level() const { return level_; }
    double mean_distance() const { return mean_; }
    double variance() const { return variance_; }

    /// Generation categories: the categories themselves (Categorical), the
    /// single mean (MeanOnly), or distinct listed distances with multiplicity
    /// weights (Individual).
    const std::vector<TddCategory>& categories() const { return categories_; }
    const std::vector<double>& individual_distances() const { return individuals_; }

private:
    TddSpec() = default;
    TddLevel level_ = TddLevel::MeanOnly;
    double mean_ = 0.0;
    double variance_ = 0.0;
    std::vector<TddCategory> categories_;
    std::vector<double> individuals_;
};

/// Piecewise-constant trip-distance distribution over time. Stage boundaries
/// are closed on the left: the new spec applies exactly at its start instant.
struct DynamicTdd {
    std::vector<std::pair<double, TddSpec>> stages;  ///< (start_time [s], spec)

    void validate() const;  ///< throws on empty or non-increasing stage starts
};

DynamicTdd static_tdd(TddSpec spec, double start_time = 0.0);

/// Spec of the latest stage with start_time <= t; error if t precedes all stages.
const TddSpec& tdd_at(const DynamicTdd& dyn, double t);

/// Steady trip distance D* = (D^2 + sigma^2) / (2 D).
double steady_distance(double mean_distance, double variance);
double steady_distance(const TddSpec& spec);

struct TripEntry {
    double time;      ///< entry time [s]
    double distance;  ///< trip distance [m]
};

/// Residual accumulator for deterministic trip generation; owned by one
/// engine run, resets itself when the category grid changes.
struct GenerationState {
    std::vector<double> residual;
};

/// Deterministic trip generation for one window: floor-plus-residual counts
/// per category, stratified entry times at the midpoints of equal sub-windows,
/// round-robin category interleave across the slots.
std::vector<TripEntry> generate_entries(const TddSpec& spec, double inflow_count,
                                        double window_start, double window_end,
                                        GenerationState& carry);

struct ChiSquarePair {
    std::size_t first;
    std::size_t second;
    double statistic;
    std::size_t dof;
    double p_value;
    bool reject;
};

/// Pearson chi-square test of each histogram pair against their pooled
/// distribution. Histograms must share the category grid and every pooled
/// expected count must be positive.
std::vector<ChiSquarePair> chi_square_stationarity(
    const std::vector<std::vector<double>>& histograms, double significance);

}  // namespace bathtub
