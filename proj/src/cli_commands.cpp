#include "bathtub/cli_commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <future>
#include <map>
#include <ostream>
#include <sstream>

#include "bathtub/aggregate.hpp"
#include "bathtub/analysis.hpp"
#include "bathtub/csv.hpp"
#include "bathtub/engines.hpp"
#include "bathtub/fixtures.hpp"
#include "bathtub/io_formats.hpp"
#include "bathtub/mfd.hpp"

namespace bathtub::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json load_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& ex) {
        throw std::invalid_argument(path.string() + ": " + ex.what());
    }
    return j;
}

double require_number(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw std::invalid_argument(where + ": missing numeric field '" + key + "'");
    return j.at(key).get<double>();
}

MfdParams parse_mfd(const json& j, const std::string& where) {
    MfdParams p{require_number(j, "lambda", where), require_number(j, "u_f", where),
                require_number(j, "Q", where),      require_number(j, "kappa", where),
                require_number(j, "w", where),      require_number(j, "lane_distance_m", where)};
    p.validate();
    return p;
}

DynamicTdd builtin_tdd(const std::string& name) {
    if (name == "df-static") return static_tdd(fixtures::df_static_tdd());
    if (name == "du-static") return static_tdd(fixtures::du_static_tdd());
    if (name == "toy-static") return static_tdd(fixtures::toy_static_tdd());
    if (name == "df-dynamic") return fixtures::df_dynamic_tdd();
    if (name == "du-dynamic") return fixtures::du_dynamic_tdd();
    throw std::invalid_argument("unknown builtin TDD '" + name + "'");
}

std::vector<EngineVariant> parse_engine_list(const std::string& csv) {
    std::vector<EngineVariant> variants;
    std::stringstream ss(csv);
    std::string tag;
    while (std::getline(ss, tag, ',')) {
        if (!tag.empty()) variants.push_back(parse_engine_variant(tag));
    }
    return variants;
}

struct LoadedScenario {
    SuiteScenario scenario;
    std::vector<EngineVariant> engines;
    std::optional<EngineVariant> reference_engine;
    std::optional<std::vector<double>> reference_series;
};

DynamicTdd collapse_stages_to_means(const DynamicTdd& dyn) {
    DynamicTdd collapsed;
    for (const auto& [start, spec] : dyn.stages)
        collapsed.stages.emplace_back(start, TddSpec::mean_only(spec.mean_distance()));
    return collapsed;
}

LoadedScenario parse_scenario(const json& j, const fs::path& base_dir,
                              const std::string& engines_override) {
    if (!j.contains("label") || !j.at("label").is_string())
        throw std::invalid_argument("scenario: missing 'label'");
    const std::string label = j.at("label").get<std::string>();
    const std::string where = "scenario '" + label + "'";

    if (!j.contains("mfd")) throw std::invalid_argument(where + ": missing 'mfd'");
    const MfdParams mfd = parse_mfd(j.at("mfd"), where);

    if (!j.contains("sim")) throw std::invalid_argument(where + ": missing 'sim'");
    const json& sim = j.at("sim");
    const double duration = require_number(sim, "duration_s", where);

    if (!j.contains("demand")) throw std::invalid_argument(where + ": missing 'demand'");
    const json& dj = j.at("demand");
    std::optional<DemandProfile> demand;
    if (dj.contains("file")) {
        demand = io::load_demand_csv(base_dir / dj.at("file").get<std::string>());
    } else if (dj.contains("builtin")) {
        demand = fixtures::builtin_profile(dj.at("builtin").get<std::string>(),
                                           require_number(dj, "peak_veh_per_s", where),
                                           dj.contains("duration_s")
                                               ? require_number(dj, "duration_s", where)
                                               : duration);
    } else {
        throw std::invalid_argument(where + ": demand needs 'file' or 'builtin'");
    }

    if (!j.contains("tdd")) throw std::invalid_argument(where + ": missing 'tdd'");
    const json& tj = j.at("tdd");
    DynamicTdd tdd;
    if (tj.contains("builtin")) {
        tdd = builtin_tdd(tj.at("builtin").get<std::string>());
    } else if (tj.contains("static_file")) {
        tdd = static_tdd(
            io::load_tdd_csv(base_dir / tj.at("static_file").get<std::string>()));
    } else if (tj.contains("individual_file")) {
        tdd = static_tdd(io::load_individual_tdd_csv(
            base_dir / tj.at("individual_file").get<std::string>()));
    } else if (tj.contains("schedule_file")) {
        tdd = io::load_tdd_schedule_csv(base_dir /
                                        tj.at("schedule_file").get<std::string>());
    } else {
        throw std::invalid_argument(where + ": tdd needs 'builtin', 'static_file', "
                                            "'individual_file' or 'schedule_file'");
    }
    if (tj.contains("level") && tj.at("level").get<std::string>() == "mean")
        tdd = collapse_stages_to_means(tdd);

    SimConfig cfg{duration,
                  sim.contains("output_resolution_s")
                      ? require_number(sim, "output_resolution_s", where)
                      : 60.0,
                  sim.contains("engine_time_step_s")
                      ? require_number(sim, "engine_time_step_s", where)
                      : 1.0,
                  mfd,
                  std::move(*demand),
                  std::move(tdd),
                  sim.contains("alpha") ? require_number(sim, "alpha", where) : 0.0,
                  sim.contains("generation_resolution_s")
                      ? require_number(sim, "generation_resolution_s", where)
                      : 60.0};
    if (sim.contains("max_trips"))
        cfg.max_trips = static_cast<std::size_t>(require_number(sim, "max_trips", where));
    cfg.validate();

    LoadedScenario loaded{{label, std::move(cfg)}, {}, {}, {}};
    if (!engines_override.empty()) {
        loaded.engines = parse_engine_list(engines_override);
    } else if (j.contains("engines")) {
        for (const auto& tag : j.at("engines"))
            loaded.engines.push_back(parse_engine_variant(tag.get<std::string>()));
    } else {
        loaded.engines = {EngineVariant::AccumulationBased, EngineVariant::EventMean,
                          EngineVariant::EventCategorical, EngineVariant::TripFixedMean,
                          EngineVariant::TripFixedCategorical};
    }
    if (loaded.engines.empty())
        throw std::invalid_argument(where + ": empty engine list");

    if (j.contains("reference_engine"))
        loaded.reference_engine =
            parse_engine_variant(j.at("reference_engine").get<std::string>());
    if (j.contains("reference_file"))
        loaded.reference_series = io::load_accumulation_csv(
            base_dir / j.at("reference_file").get<std::string>());
    return loaded;
}

bool is_trip_based(EngineVariant v) {
    return v == EngineVariant::TripFixedMean || v == EngineVariant::TripFixedCategorical ||
           v == EngineVariant::EventMean || v == EngineVariant::EventCategorical;
}

std::string file_tag(EngineVariant v) {
    std::string tag = to_string(v);
    std::replace(tag.begin(), tag.end(), ':', '_');
    return tag;
}

struct ScenarioOutcome {
    std::vector<std::string> failures;                    // messages for stderr
    std::vector<std::vector<std::string>> heatmap_rows;   // scenario rows in order
};

const double kSmoothing = 0.2;

ScenarioOutcome run_one_scenario(const LoadedScenario& loaded, const RunOptions& options) {
    ScenarioOutcome outcome;
    const auto& label = loaded.scenario.label;

    std::map<EngineVariant, SimResult> results;
    for (const auto variant : loaded.engines) {
        try {
            results.emplace(variant, run_engine(variant, loaded.scenario.config));
        } catch (const std::exception& ex) {
            outcome.failures.push_back(label + " [" + to_string(variant) + "]: " + ex.what());
        }
    }
    for (const auto& [variant, result] : results) {
        const fs::path path = options.out_dir / (label + "__" + file_tag(variant) + ".csv");
        io::write_sim_result_csv(path, result);
        if (options.write_trips && !result.trips.empty())
            io::write_trips_csv(
                options.out_dir / (label + "__" + file_tag(variant) + "__trips.csv"),
                result);
    }

    // Heatmap rows against the configured reference (smoothing only on
    // trip-based series).
    std::optional<std::vector<double>> reference;
    if (loaded.reference_series) {
        reference = loaded.reference_series;
    } else if (loaded.reference_engine) {
        const bool selected = std::find(loaded.engines.begin(), loaded.engines.end(),
                                        *loaded.reference_engine) != loaded.engines.end();
        auto it = results.find(*loaded.reference_engine);
        if (it != results.end()) {
            reference = it->second.accumulation;
            if (is_trip_based(*loaded.reference_engine))
                reference = exponential_smooth(*reference, kSmoothing);
        } else if (selected) {
            outcome.failures.push_back(label + ": reference engine run failed");
        }
        // a reference engine deselected by an override just skips the heatmap
    }
    if (reference) {
        const double duration = loaded.scenario.config.duration;
        const double split = std::min(options.window_split_s, duration);
        for (const auto variant : loaded.engines) {
            auto it = results.find(variant);
            if (it == results.end()) continue;
            std::vector<double> candidate = it->second.accumulation;
            if (is_trip_based(variant)) candidate = exponential_smooth(candidate, kSmoothing);
            if (candidate.size() != reference->size()) {
                outcome.failures.push_back(label + ": reference series grid mismatch");
                break;
            }
            AlignedSeries series{it->second.time, *reference, candidate};
            const std::vector<std::pair<std::string, std::pair<double, double>>> windows{
                {"increase", {0.0, split}},
                {"decrease", {split, duration}},
                {"full", {0.0, duration}}};
            for (const auto& [name, range] : windows) {
                const double value = normalized_rmse(series, range.first, range.second);
                outcome.heatmap_rows.push_back({label, to_string(variant), name,
                                                io::format_g9(value)});
            }
        }
    }
    return outcome;
}

SimConfig load_first_scenario_config(const fs::path& config_path) {
    const json root = load_json(config_path);
    if (!root.contains("scenarios") || !root.at("scenarios").is_array() ||
        root.at("scenarios").empty())
        throw std::invalid_argument(config_path.string() + ": no scenarios");
    return parse_scenario(root.at("scenarios").front(), config_path.parent_path(), "")
        .scenario.config;
}

}  // namespace

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
    json root;
    try {
        root = load_json(options.config_path);
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return 2;
    }
    if (!root.contains("scenarios") || !root.at("scenarios").is_array()) {
        err << "error: " << options.config_path.string() << ": missing 'scenarios' array\n";
        return 2;
    }
    const auto& scenarios_json = root.at("scenarios");
    if (scenarios_json.empty()) {
        err << "warning: config contains no scenarios; nothing to do\n";
        return 0;
    }

    fs::create_directories(options.out_dir);
    const fs::path base_dir = options.config_path.parent_path();

    std::vector<std::optional<LoadedScenario>> loaded(scenarios_json.size());
    std::vector<std::string> failures;
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < scenarios_json.size(); ++i) {
        try {
            loaded[i] = parse_scenario(scenarios_json[i], base_dir, options.engines_override);
            const auto& label = loaded[i]->scenario.label;
            if (std::find(labels.begin(), labels.end(), label) != labels.end())
                throw std::invalid_argument("duplicate scenario label '" + label + "'");
            labels.push_back(label);
        } catch (const std::exception& ex) {
            failures.push_back(std::string("scenario #") + std::to_string(i) + ": " + ex.what());
            loaded[i].reset();
        }
    }

    std::vector<ScenarioOutcome> outcomes(loaded.size());
    if (options.threads > 1) {
        std::vector<std::future<ScenarioOutcome>> futures(loaded.size());
        for (std::size_t i = 0; i < loaded.size(); ++i) {
            if (!loaded[i]) continue;
            futures[i] = std::async(std::launch::async, [&, i] {
                return run_one_scenario(*loaded[i], options);
            });
        }
        for (std::size_t i = 0; i < loaded.size(); ++i)
            if (loaded[i]) outcomes[i] = futures[i].get();
    } else {
        for (std::size_t i = 0; i < loaded.size(); ++i)
            if (loaded[i]) outcomes[i] = run_one_scenario(*loaded[i], options);
    }

    std::vector<std::vector<std::string>> heatmap;
    bool any_heatmap = false;
    for (auto& outcome : outcomes) {
        failures.insert(failures.end(), outcome.failures.begin(), outcome.failures.end());
        if (!outcome.heatmap_rows.empty()) any_heatmap = true;
        heatmap.insert(heatmap.end(), outcome.heatmap_rows.begin(), outcome.heatmap_rows.end());
    }
    if (any_heatmap)
        io::write_csv_atomic(options.out_dir / "heatmap.csv",
                             {"scenario", "engine_variant", "window", "nrmse"}, heatmap);

    out << "completed " << labels.size() << " scenario(s) into " << options.out_dir.string()
        << "\n";
    for (const auto& failure : failures) err << "error: " << failure << "\n";
    return failures.empty() ? 0 : 1;
}

int cmd_calibrate_mfd(const CalibrateMfdOptions& options, std::ostream& out,
                      std::ostream& err) {
    try {
        const json cj = load_json(options.config_path);
        if (!cj.contains("initial"))
            throw std::invalid_argument(options.config_path.string() + ": missing 'initial'");
        CalibrationConfig config{parse_mfd(cj.at("initial"), "calibration config")};
        if (cj.contains("bound_fraction"))
            config.bound_fraction = cj.at("bound_fraction").get<double>();
        if (cj.contains("lambda_bounds")) {
            config.lambda_lo = cj.at("lambda_bounds").at(0).get<double>();
            config.lambda_hi = cj.at("lambda_bounds").at(1).get<double>();
        }
        if (cj.contains("max_iterations"))
            config.max_iterations = cj.at("max_iterations").get<int>();
        if (cj.contains("tolerance")) config.tolerance = cj.at("tolerance").get<double>();

        const auto data = io::load_speed_acc_csv(options.data_path);
        const auto [params, report] = calibrate(data, config);
        json pj{{"lambda", params.lambda},         {"u_f", params.u_f},
                {"Q", params.Q},                   {"kappa", params.kappa},
                {"w", params.w},                   {"lane_distance_m", params.lane_distance}};
        io::write_text_atomic(options.out_path, pj.dump(2) + "\n");

        out << "rmse_initial=" << io::format_g9(report.rmse_initial)
            << " rmse_final=" << io::format_g9(report.rmse_final)
            << " iterations=" << report.iterations
            << " improved=" << (report.improved ? "yes" : "no") << "\n";
        const char* names[5] = {"lambda", "u_f", "Q", "kappa", "w"};
        for (int i = 0; i < 5; ++i)
            if (report.at_bound[i]) out << "bound active: " << names[i] << "\n";
        return 0;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return 1;
    }
}

int cmd_aggregate(const AggregateOptions& options, std::ostream& out, std::ostream& err) {
    try {
        const auto [records, speed_unit] = io::load_link_records_csv(options.links_path);
        std::map<double, std::vector<LinkRecord>> by_time;
        for (const auto& r : records) by_time[r.time].push_back(r);

        fs::create_directories(options.out_dir);
        std::vector<std::vector<std::string>> state_rows;
        for (const auto& [t, slice] : by_time) {
            const NetworkState state =
                aggregate_network_state(slice, options.density_threshold);
            state_rows.push_back({io::format_g9(t), io::format_g9(state.accumulation),
                                  io::format_g9(state.speed),
                                  io::format_g9(state.lane_distance),
                                  io::format_g9(speed_dispersion(slice))});
        }
        io::write_csv_atomic(options.out_dir / "network_state.csv",
                             {"time_s", "accumulation_veh", speed_unit,
                              "lane_distance_lane_km", "speed_std"},
                             state_rows);

        if (options.od_path) {
            const auto assignments = io::load_od_csv(*options.od_path);
            const auto edges = options.category_edges.empty()
                                   ? default_category_edges(assignments)
                                   : options.category_edges;
            const TddSpec tdd = derive_tdd(assignments, edges);
            std::vector<std::vector<std::string>> tdd_rows;
            for (const auto& cat : tdd.categories())
                tdd_rows.push_back(
                    {io::format_g9(cat.mean_distance), io::format_g9(cat.proportion)});
            io::write_csv_atomic(options.out_dir / "tdd.csv",
                                 {"category_mean_m", "proportion"}, tdd_rows);
        }

        if (options.scatter) {
            const auto rows =
                flow_density_scatter(records, {}, options.density_threshold);
            std::vector<std::vector<std::string>> scatter_rows;
            for (const auto& r : rows)
                scatter_rows.push_back({r.scope, io::format_g9(r.time),
                                        io::format_g9(r.density), io::format_g9(r.flow)});
            io::write_csv_atomic(options.out_dir / "scatter.csv",
                                 {"scope", "time_s", "density", "flow"}, scatter_rows);
        }

        out << "aggregated " << records.size() << " link records over " << by_time.size()
            << " time steps\n";
        return 0;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return 1;
    }
}

int cmd_convergence(const ConvergenceOptions& options, std::ostream& out,
                    std::ostream& err) {
    try {
        const SimConfig base = load_first_scenario_config(options.config_path);
        const EngineVariant variant = parse_engine_variant(options.engine);
        auto runner = [&](double dt) {
            SimConfig cfg = base;
            cfg.engine_time_step = dt;
            return run_engine(variant, cfg).accumulation;
        };
        const auto report =
            convergence_test(runner, options.initial_dt, options.threshold,
                             options.max_halvings);
        std::vector<std::vector<std::string>> rows;
        for (std::size_t i = 0; i < report.trace.size(); ++i)
            rows.push_back({std::to_string(i), io::format_g9(report.trace[i].first),
                            io::format_g9(report.trace[i].second)});
        if (!options.out_path.empty())
            io::write_csv_atomic(options.out_path,
                                 {"halving", "dt_s", "mean_abs_diff_over_max"}, rows);
        if (report.converged) {
            out << "converged dt_s=" << io::format_g9(report.converged_dt) << "\n";
            return 0;
        }
        err << "error: no convergence after " << options.max_halvings
            << " halvings (last dt_s=" << io::format_g9(report.converged_dt) << ")\n";
        return 1;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return 1;
    }
}

int cmd_calibrate_alpha(const CalibrateAlphaOptions& options, std::ostream& out,
                        std::ostream& err) {
    try {
        const SimConfig config = load_first_scenario_config(options.config_path);
        const auto reference = io::load_accumulation_csv(options.reference_path);
        const auto report = calibrate_alpha(reference, config, options.grid_lo,
                                            options.grid_hi, options.grid_step);
        std::vector<std::vector<std::string>> rows;
        for (const auto& point : report.curve)
            rows.push_back({io::format_g9(point.alpha),
                            point.error.empty() ? io::format_g9(point.nrmse) : "nan"});
        if (!options.out_path.empty())
            io::write_csv_atomic(options.out_path, {"alpha", "nrmse"}, rows);
        out << "alpha=" << io::format_g9(report.alpha)
            << " nrmse=" << io::format_g9(report.nrmse) << "\n";
        return 0;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return 1;
    }
}

}  // namespace bathtub::cli
