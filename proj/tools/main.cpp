#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "bathtub/cli_commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"bathtub - single-reservoir urban traffic simulation toolkit"};
    app.require_subcommand(1);
    bool seedless = false;
    app.add_flag("--seedless", seedless,
                 "assert deterministic execution (always on; kept for interface stability)");

    bathtub::cli::RunOptions run_opts;
    auto* run = app.add_subcommand("run", "run a scenario suite and export result CSVs");
    run->add_option("--config", run_opts.config_path, "suite config JSON")->required();
    run->add_option("--out", run_opts.out_dir, "output directory")->required();
    run->add_option("--engines", run_opts.engines_override,
                    "comma-separated engine variants (ab,m,eb:m,eb:c,tb:m,tb:c)");
    run->add_option("--threads", run_opts.threads, "scenario-level parallelism");
    run->add_flag("--write-trips", run_opts.write_trips, "also export per-trip CSVs");
    run->add_option("--window-split", run_opts.window_split_s,
                    "boundary between increase/decrease RMSE windows [s]");

    bathtub::cli::CalibrateMfdOptions mfd_opts;
    auto* calibrate_mfd =
        app.add_subcommand("calibrate-mfd", "fit MFD parameters to speed-accumulation data");
    calibrate_mfd->add_option("--data", mfd_opts.data_path, "CSV with accumulation/speed")
        ->required();
    calibrate_mfd->add_option("--config", mfd_opts.config_path, "calibration config JSON")
        ->required();
    calibrate_mfd->add_option("--out", mfd_opts.out_path, "fitted-parameter JSON")->required();

    bathtub::cli::AggregateOptions agg_opts;
    std::vector<double> edges;
    auto* aggregate =
        app.add_subcommand("aggregate", "aggregate link records and OD assignments");
    aggregate->add_option("--links", agg_opts.links_path, "link-record CSV")->required();
    std::string od_path;
    aggregate->add_option("--od", od_path, "OD assignment CSV");
    aggregate->add_option("--edges", edges, "category edges [m]");
    aggregate->add_option("--threshold", agg_opts.density_threshold,
                          "active-lane density threshold [veh/km]");
    aggregate->add_flag("--scatter", agg_opts.scatter, "also export flow-density scatter");
    aggregate->add_option("--out", agg_opts.out_dir, "output directory")->required();

    bathtub::cli::ConvergenceOptions conv_opts;
    auto* convergence =
        app.add_subcommand("convergence", "time-step convergence test for one scenario");
    convergence->add_option("--config", conv_opts.config_path, "suite config JSON")->required();
    convergence->add_option("--engine", conv_opts.engine, "engine variant (default tb:c)");
    convergence->add_option("--initial-dt", conv_opts.initial_dt, "starting time step [s]");
    convergence->add_option("--threshold", conv_opts.threshold,
                            "mean relative difference threshold");
    convergence->add_option("--max-halvings", conv_opts.max_halvings, "halving budget");
    convergence->add_option("--out", conv_opts.out_path, "trace CSV");

    bathtub::cli::CalibrateAlphaOptions alpha_opts;
    auto* calibrate_alpha =
        app.add_subcommand("calibrate-alpha", "grid-search the M-model alpha");
    calibrate_alpha->add_option("--config", alpha_opts.config_path, "suite config JSON")
        ->required();
    calibrate_alpha->add_option("--reference", alpha_opts.reference_path,
                                "reference accumulation CSV")
        ->required();
    calibrate_alpha->add_option("--grid-lo", alpha_opts.grid_lo, "grid lower bound");
    calibrate_alpha->add_option("--grid-hi", alpha_opts.grid_hi, "grid upper bound");
    calibrate_alpha->add_option("--grid-step", alpha_opts.grid_step, "grid step");
    calibrate_alpha->add_option("--out", alpha_opts.out_path, "alpha/nrmse curve CSV");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return bathtub::cli::cmd_run(run_opts, std::cout, std::cerr);
    if (calibrate_mfd->parsed())
        return bathtub::cli::cmd_calibrate_mfd(mfd_opts, std::cout, std::cerr);
    if (aggregate->parsed()) {
        agg_opts.category_edges = edges;
        if (!od_path.empty()) agg_opts.od_path = od_path;
        return bathtub::cli::cmd_aggregate(agg_opts, std::cout, std::cerr);
    }
    if (convergence->parsed())
        return bathtub::cli::cmd_convergence(conv_opts, std::cout, std::cerr);
    if (calibrate_alpha->parsed())
        return bathtub::cli::cmd_calibrate_alpha(alpha_opts, std::cout, std::cerr);
    return 0;
}
