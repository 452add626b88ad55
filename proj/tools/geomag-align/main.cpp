#include <exception>
#include <string>

#include <CLI11.hpp>

#include "geomag/errors.hpp"
#include "geomag/version.hpp"
#include "commands.hpp"
#include "log.hpp"

namespace {

// Exit codes: 0 success, 2 input or schema error, 3 numerically degenerate
// input, 4 partial failure (some sensors produced artifacts, some did not).
int run(int argc, char** argv) {
    CLI::App app{"Geomagnetic-inertial alignment toolkit: simulate sensor "
                 "traces, calibrate magnetometers, fuse per-sensor poses into "
                 "a shared world frame and score merged point clouds."};
    app.set_version_flag("--version", std::string(geomag::kVersion));
    app.require_subcommand(1);

    geomag::cli::SimulateArgs sim_args;
    std::uint64_t seed_value = 0;
    auto* sim = app.add_subcommand("simulate",
                                   "Generate a synthetic trace and ground truth");
    sim->add_option("--config", sim_args.config, "Run configuration (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    auto* sim_seed = sim->add_option("--seed", seed_value, "Override the config seed");
    sim->add_option("--out", sim_args.out, "Trace output (JSONL)")->required();
    sim->add_option("--truth", sim_args.truth, "Ground-truth output (JSONL)");

    geomag::cli::CalibrateArgs cal_args;
    auto* cal = app.add_subcommand("calibrate",
                                   "Fit hard/soft-iron calibration from a sweep");
    cal->add_option("trace", cal_args.trace, "Input trace (JSONL)")
        ->required()
        ->check(CLI::ExistingFile);
    cal->add_option("--sensor", cal_args.sensor, "Sensor id when several are present");
    cal->add_option("--config", cal_args.config, "Run configuration (echoed to report)")
        ->check(CLI::ExistingFile);
    cal->add_option("--out", cal_args.out, "Calibration output (JSON)")->required();
    cal->add_option("--report", cal_args.report, "Stability report output (JSON)");
    cal->add_option("--seed", seed_value, "Accepted for interface uniformity");

    geomag::cli::FuseArgs fuse_args;
    auto* fuse = app.add_subcommand("fuse",
                                    "Dead-reckon and fuse per-sensor poses in the WCS");
    fuse->add_option("trace", fuse_args.trace, "Input trace (JSONL)")
        ->required()
        ->check(CLI::ExistingFile);
    fuse->add_option("--cal", fuse_args.cal, "Magnetometer calibration (JSON)")
        ->check(CLI::ExistingFile);
    fuse->add_option("--config", fuse_args.config, "Run configuration (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    fuse->add_option("--out", fuse_args.out, "Pose stream output (JSONL)")->required();
    fuse->add_option("--report", fuse_args.report, "Fusion report output (JSON)");
    fuse->add_option("--truth", fuse_args.truth, "Ground truth for RMSE (JSONL)")
        ->check(CLI::ExistingFile);
    fuse->add_option("--anchor", fuse_args.anchor, "WCS anchor output (JSON)");
    fuse->add_option("--seed", seed_value, "Accepted for interface uniformity");

    geomag::cli::AlignArgs align_args;
    auto* align = app.add_subcommand("align",
                                     "Place per-sensor clouds with fused poses and merge");
    align->add_option("poses", align_args.poses, "Pose stream (JSONL)")
        ->required()
        ->check(CLI::ExistingFile);
    align->add_option("clouds", align_args.clouds,
                      "Point clouds, file stem = sensor id (.xyz or .ply)")
        ->required()
        ->check(CLI::ExistingFile);
    align->add_option("--config", align_args.config, "Run configuration (echoed)")
        ->check(CLI::ExistingFile);
    align->add_option("--out", align_args.out, "Merged cloud output (.xyz or .ply)")
        ->required();
    align->add_option("--report", align_args.report, "Merge report output (JSON)");
    align->add_option("--seed", seed_value, "Accepted for interface uniformity");

    geomag::cli::ReportArgs report_args;
    auto* report = app.add_subcommand("report",
                                      "Emit plot-ready CSV from traces, poses or reports");
    report->add_option("input", report_args.input,
                       "Trace/pose JSONL or a command report JSON")
        ->required()
        ->check(CLI::ExistingFile);
    report->add_option("--config", report_args.config, "Run configuration (echoed)")
        ->check(CLI::ExistingFile);
    report->add_option("--out", report_args.out_dir, "Output directory")->required();
    report->add_option("--seed", seed_value, "Accepted for interface uniformity");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (sim->parsed()) {
        if (sim_seed->count() > 0) sim_args.seed = seed_value;
        return geomag::cli::cmd_simulate(sim_args);
    }
    if (cal->parsed()) return geomag::cli::cmd_calibrate(cal_args);
    if (fuse->parsed()) return geomag::cli::cmd_fuse(fuse_args);
    if (align->parsed()) return geomag::cli::cmd_align(align_args);
    if (report->parsed()) return geomag::cli::cmd_report(report_args);
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const geomag::DegenerateInput& e) {
        geomag::cli::log_error(e.what());
        return 3;
    } catch (const geomag::cli::PartialFailure& e) {
        geomag::cli::log_error(e.what());
        return 4;
    } catch (const geomag::ParseError& e) {
        geomag::cli::log_error(e.what());
        return 2;
    } catch (const geomag::ConfigError& e) {
        geomag::cli::log_error(e.what());
        return 2;
    } catch (const geomag::InsufficientData& e) {
        geomag::cli::log_error(e.what());
        return 2;
    } catch (const geomag::ContractViolation& e) {
        geomag::cli::log_error(e.what());
        return 2;
    } catch (const std::exception& e) {
        geomag::cli::log_error(std::string("unexpected: ") + e.what());
        return 1;
    }
}
