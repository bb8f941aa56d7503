#include "bathtub/io_formats.hpp"

#include <map>
#include <stdexcept>

#include "bathtub/csv.hpp"

namespace bathtub::io {

DemandProfile load_demand_csv(const std::filesystem::path& path) {
    const auto table = read_csv(path);
    const auto t_col = table.column("time_s");
    const auto r_col = table.column("inflow_veh_per_s");
    std::vector<std::pair<double, double>> points;
    for (const auto& row : table.rows)
        points.emplace_back(parse_double(row[t_col]), parse_double(row[r_col]));
    return DemandProfile(std::move(points));
}

TddSpec load_tdd_csv(const std::filesystem::path& path) {
    const auto table = read_csv(path);
    const auto d_col = table.column("category_mean_m");
    const auto p_col = table.column("proportion");
    std::vector<TddCategory> cats;
    for (const auto& row : table.rows)
        cats.push_back({parse_double(row[d_col]), parse_double(row[p_col])});
    return TddSpec::categorical(std::move(cats));
}

TddSpec load_individual_tdd_csv(const std::filesystem::path& path) {
    const auto table = read_csv(path);
    const auto d_col = table.column("distance_m");
    std::vector<double> distances;
    for (const auto& row : table.rows) distances.push_back(parse_double(row[d_col]));
    return TddSpec::individual(std::move(distances));
}

DynamicTdd load_tdd_schedule_csv(const std::filesystem::path& path) {
    const auto table = read_csv(path);
    const auto t_col = table.column("start_time_s");
    const auto f_col = table.column("file");
    DynamicTdd dyn;
    for (const auto& row : table.rows) {
        const auto stage_path = path.parent_path() / row[f_col];
        dyn.stages.emplace_back(parse_double(row[t_col]), load_tdd_csv(stage_path));
    }
    dyn.validate();
    return dyn;
}

ClassCoefficientSchedule load_class_schedule_csv(const std::filesystem::path& path) {
    const auto table = read_csv(path);
    const auto c_col = table.column("class");
    const auto t_col = table.column("stage_start_s");
    const auto m_col = table.column("multiplier");
    ClassCoefficientSchedule schedule;
    std::map<std::string, std::size_t> index;
    for (const auto& row : table.rows) {
        const auto& label = row[c_col];
        auto it = index.find(label);
        if (it == index.end()) {
            index.emplace(label, schedule.classes.size());
            schedule.classes.push_back({label, {}});
            it = index.find(label);
        }
        schedule.classes[it->second].stages.emplace_back(parse_double(row[t_col]),
                                                         parse_double(row[m_col]));
    }
    schedule.validate();
    return schedule;
}

std::vector<SpeedAccPoint> load_speed_acc_csv(const std::filesystem::path& path) {
    const auto table = read_csv(path);
    const auto n_col = table.column("accumulation_veh");
    const auto v_col = table.column("speed_mps");
    std::vector<SpeedAccPoint> data;
    for (const auto& row : table.rows)
        data.push_back({parse_double(row[n_col]), parse_double(row[v_col])});
    return data;
}

std::vector<double> load_accumulation_csv(const std::filesystem::path& path) {
    const auto table = read_csv(path);
    const auto col = table.column("accumulation_veh");
    std::vector<double> values;
    for (const auto& row : table.rows) values.push_back(parse_double(row[col]));
    return values;
}

std::pair<std::vector<LinkRecord>, std::string> load_link_records_csv(
    const std::filesystem::path& path) {
    const auto table = read_csv(path);
    const auto t_col = table.column("time_s");
    const auto id_col = table.column("link_id");
    const auto k_col = table.column("density_veh_per_km");
    const auto d_col = table.column("lane_distance_lane_km");
    std::string unit;
    std::size_t v_col = 0;
    if (table.has_column("speed_mps")) {
        unit = "speed_mps";
        v_col = table.column("speed_mps");
    } else if (table.has_column("speed_kmh")) {
        unit = "speed_kmh";
        v_col = table.column("speed_kmh");
    } else {
        throw std::invalid_argument(path.string() +
                                    ": speed column must declare its unit "
                                    "(speed_mps or speed_kmh)");
    }
    std::vector<LinkRecord> records;
    for (const auto& row : table.rows)
        records.push_back({parse_double(row[t_col]), row[id_col], parse_double(row[k_col]),
                           parse_double(row[v_col]), parse_double(row[d_col])});
    return {std::move(records), unit};
}

std::vector<OdAssignment> load_od_csv(const std::filesystem::path& path) {
    const auto table = read_csv(path);
    const auto o_col = table.column("origin");
    const auto d_col = table.column("destination");
    const auto f_col = table.column("flow_veh_per_h");
    const auto r_col = table.column("route_id");
    const auto l_col = table.column("route_length_m");
    const auto p_col = table.column("route_proportion");
    std::map<std::pair<std::string, std::string>, OdAssignment> ods;
    for (const auto& row : table.rows) {
        auto& od = ods[{row[o_col], row[d_col]}];
        od.origin = row[o_col];
        od.destination = row[d_col];
        od.flow = parse_double(row[f_col]);
        od.routes.push_back(
            {row[r_col], parse_double(row[l_col]), parse_double(row[p_col])});
    }
    std::vector<OdAssignment> assignments;
    for (auto& [key, od] : ods) assignments.push_back(std::move(od));
    return assignments;
}

void write_sim_result_csv(const std::filesystem::path& path, const SimResult& result) {
    std::vector<std::string> header{"time_s", "accumulation_veh", "inflow_veh_per_s",
                                    "outflow_veh_per_s", "speed_mps"};
    const bool with_m = !result.remaining_distance.empty();
    if (with_m) header.push_back("remaining_distance_m");
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < result.time.size(); ++i) {
        std::vector<std::string> row{format_g9(result.time[i]),
                                     format_g9(result.accumulation[i]),
                                     format_g9(result.inflow[i]),
                                     format_g9(result.outflow[i]),
                                     format_g9(result.speed[i])};
        if (with_m) row.push_back(format_g9(result.remaining_distance[i]));
        rows.push_back(std::move(row));
    }
    write_csv_atomic(path, header, rows);
}

void write_trips_csv(const std::filesystem::path& path, const SimResult& result) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& trip : result.trips)
        rows.push_back({std::to_string(trip.id), format_g9(trip.entry_time),
                        format_g9(trip.exit_time), format_g9(trip.distance)});
    write_csv_atomic(path, {"id", "entry_time_s", "exit_time_s", "distance_m"}, rows);
}

}  // namespace bathtub::io
