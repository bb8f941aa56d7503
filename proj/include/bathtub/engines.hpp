#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bathtub/demand.hpp"
#include "bathtub/mfd.hpp"
#include "bathtub/tdd.hpp"

namespace bathtub {

struct SimConfig {
    double duration;                    ///< [s]
    double output_resolution = 60.0;    ///< [s]
    double engine_time_step = 1.0;      ///< [s] step for Euler and fixed-step engines
    MfdParams mfd;
    DemandProfile demand;
    DynamicTdd tdd;
    double alpha = 0.0;                 ///< M-model correction weight
    double generation_resolution = 60.0;///< [s] trip-generation window
    std::size_t max_trips = 4'000'000;  ///< event-engine runaway guard

    /// Preset trip entries for trip-based engines; when set, demand-driven
    /// generation is skipped (test and replay hook).
    std::optional<std::vector<TripEntry>> preset_entries = std::nullopt;

    void validate() const;
};

struct TripRecord {
    std::uint64_t id;    ///< sequential in entry order
    double entry_time;   ///< [s]
    double distance;     ///< [m]
    double exit_time;    ///< [s]
};

/// Uniformly sampled run output plus per-trip records for trip-based engines.
/// cumulative_inflow/outflow carry the engine's own conservation bookkeeping
/// [veh]; event_log holds (time, accumulation-after-event) pairs for the
/// event engine's piecewise-constant trajectory.
struct SimResult {
    std::vector<double> time;
    std::vector<double> accumulation;
    std::vector<double> inflow;    ///< [veh/s]
    std::vector<double> outflow;   ///< [veh/s]
    std::vector<double> speed;     ///< [m/s]
    std::vector<double> remaining_distance;  ///< [m], empty when not tracked
    std::vector<double> cumulative_inflow;
    std::vector<double> cumulative_outflow;
    std::vector<TripRecord> trips;
    std::vector<std::pair<double, double>> event_log;
};

/// Forward-Euler integration of n' = e(t) - n V(n) / D(t).
SimResult run_accumulation_based(const SimConfig& config);

/// Forward-Euler integration of the (n, m) system with the alpha correction
/// g = n V / D * (1 + alpha (m / (n D*) - 1)). Bit-equal to the
/// accumulation-based engine when alpha == 0.
SimResult run_m_model(const SimConfig& config);

/// Fixed-step trip-based scheme: one shared speed per step, fractional-step
/// exits, mid-step entries advance over the remainder of the step.
SimResult run_trip_based_fixed(const SimConfig& config);

/// Event-based trip scheme: exact state updates at trip entries and exits via
/// the cumulative-production threshold queue.
SimResult run_event_based(const SimConfig& config);

enum class EngineVariant { AccumulationBased, MModel, TripFixedMean, TripFixedCategorical,
                           EventMean, EventCategorical };

std::string to_string(EngineVariant variant);
EngineVariant parse_engine_variant(const std::string& tag);

/// Dispatches a run; the :m variants collapse each TDD stage to its mean.
SimResult run_engine(EngineVariant variant, const SimConfig& config);

struct SuiteScenario {
    std::string label;
    SimConfig config;
};

struct SuiteRun {
    std::string label;
    EngineVariant variant;
    std::optional<SimResult> result;
    std::string error;  ///< non-empty when the run failed
};

/// Runs every engine variant on every scenario in input order; per-run errors
/// are recorded without aborting the suite.
std::vector<SuiteRun> run_scenario_suite(const std::vector<SuiteScenario>& scenarios,
                                         const std::vector<EngineVariant>& variants);

}  // namespace bathtub
