#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "bathtub/aggregate.hpp"
#include "bathtub/demand.hpp"
#include "bathtub/engines.hpp"
#include "bathtub/mfd.hpp"
#include "bathtub/tdd.hpp"

namespace bathtub::io {

/// CSV: time_s, inflow_veh_per_s
DemandProfile load_demand_csv(const std::filesystem::path& path);

/// CSV: category_mean_m, proportion
TddSpec load_tdd_csv(const std::filesystem::path& path);

/// CSV: distance_m (one trip per row)
TddSpec load_individual_tdd_csv(const std::filesystem::path& path);

/// CSV: start_time_s, file — stage files resolved relative to the schedule file.
DynamicTdd load_tdd_schedule_csv(const std::filesystem::path& path);

/// CSV: class, stage_start_s, multiplier
ClassCoefficientSchedule load_class_schedule_csv(const std::filesystem::path& path);

/// CSV: time_s, accumulation_veh, speed_mps
std::vector<SpeedAccPoint> load_speed_acc_csv(const std::filesystem::path& path);

/// CSV: time_s, accumulation_veh, ... (any SimResult-shaped file)
std::vector<double> load_accumulation_csv(const std::filesystem::path& path);

/// CSV: time_s, link_id, density_veh_per_km, speed_mps|speed_kmh,
/// lane_distance_lane_km. Returns the records plus the speed column name;
/// throws if the header does not declare the speed unit.
std::pair<std::vector<LinkRecord>, std::string> load_link_records_csv(
    const std::filesystem::path& path);

/// CSV: origin, destination, flow_veh_per_h, route_id, route_length_m,
/// route_proportion (flow repeated on every route row of an OD pair).
std::vector<OdAssignment> load_od_csv(const std::filesystem::path& path);

/// CSV: time_s, accumulation_veh, inflow_veh_per_s, outflow_veh_per_s,
/// speed_mps [, remaining_distance_m]; 9 significant digits; atomic.
void write_sim_result_csv(const std::filesystem::path& path, const SimResult& result);

/// CSV: id, entry_time_s, exit_time_s, distance_m
void write_trips_csv(const std::filesystem::path& path, const SimResult& result);

}  // namespace bathtub::io
