#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bathtub::cli {

struct RunOptions {
    std::filesystem::path config_path;
    std::filesystem::path out_dir;
    std::string engines_override;  ///< comma-separated variant tags; empty = per-scenario
    int threads = 1;
    bool write_trips = false;
    double window_split_s = 3600.0;  ///< boundary between the increase/decrease windows
};

/// Executes a scenario suite config: one SimResult CSV per (scenario, engine),
/// plus heatmap.csv when a reference is configured. Returns the process exit
/// code (0 only on full success); failures are listed on `err`.
int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);

struct CalibrateMfdOptions {
    std::filesystem::path data_path;    ///< CSV: time_s, accumulation_veh, speed_mps
    std::filesystem::path config_path;  ///< JSON: initial params + bounds
    std::filesystem::path out_path;     ///< fitted-parameter JSON
};

int cmd_calibrate_mfd(const CalibrateMfdOptions& options, std::ostream& out,
                      std::ostream& err);

struct AggregateOptions {
    std::filesystem::path links_path;
    std::optional<std::filesystem::path> od_path;
    std::vector<double> category_edges;  ///< empty = default 1 km grid
    double density_threshold = 3.0;
    bool scatter = false;
    std::filesystem::path out_dir;
};

int cmd_aggregate(const AggregateOptions& options, std::ostream& out, std::ostream& err);

struct ConvergenceOptions {
    std::filesystem::path config_path;  ///< suite JSON; the first scenario is used
    std::string engine = "tb:c";
    double initial_dt = 4.0;
    double threshold = 0.01;
    int max_halvings = 8;
    std::filesystem::path out_path;  ///< trace CSV
};

int cmd_convergence(const ConvergenceOptions& options, std::ostream& out,
                    std::ostream& err);

struct CalibrateAlphaOptions {
    std::filesystem::path config_path;     ///< suite JSON; the first scenario is used
    std::filesystem::path reference_path;  ///< CSV: time_s, accumulation_veh
    double grid_lo = -5.0;
    double grid_hi = 5.0;
    double grid_step = 0.1;
    std::filesystem::path out_path;  ///< alpha/nrmse curve CSV
};

int cmd_calibrate_alpha(const CalibrateAlphaOptions& options, std::ostream& out,
                        std::ostream& err);

}  // namespace bathtub::cli
