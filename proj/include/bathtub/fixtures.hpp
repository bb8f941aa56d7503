#pragma once

#include <string>
#include <vector>

#include "bathtub/demand.hpp"
#include "bathtub/engines.hpp"
#include "bathtub/mfd.hpp"
#include "bathtub/tdd.hpp"

namespace bathtub::fixtures {

/// Calibrated MFD parameters of the three bundled networks.
MfdParams df_params();   ///< Delft with freeways, L_N = 213 km*lane
MfdParams du_params();   ///< Delft urban, L_N = 94 km*lane
MfdParams toy_params();  ///< toy network, L_N = 58 km*lane

/// Static categorical TDDs (1 km bins; means 5280 m, 3230 m, 3460 m).
TddSpec df_static_tdd();
TddSpec du_static_tdd();
TddSpec toy_static_tdd();

/// Three-stage dynamic TDDs, stages starting at 0 / 3000 / 6000 s
/// (stage means 5480/5240/5010 m and 3550/3250/2950 m).
DynamicTdd df_dynamic_tdd();
DynamicTdd du_dynamic_tdd();

/// Built-in demand shapes over [0, duration]: "profile1" ramps steeply to the
/// peak with a plateau, "profile2" varies slowly.
DemandProfile builtin_profile(const std::string& name, double peak_veh_per_s,
                              double duration_s);

/// Three-OD-class decomposition of the DF static TDD plus a three-stage
/// coefficient schedule weighting long trips early.
std::vector<std::pair<std::string, std::vector<TddCategory>>> df_class_tdds();
ClassCoefficientSchedule df_class_schedule();

/// The bundled 10-scenario grid (DF/DU/T x static/dynamic x profile 1/2).
std::vector<SuiteScenario> table1_suite();

}  // namespace bathtub::fixtures
