#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace geomag::cli {

// Some sensors produced artifacts and some failed; the per-sensor detail is
// in the report. Maps to exit code 4.
class PartialFailure : public std::runtime_error {
public:
    explicit PartialFailure(const std::string& what) : std::runtime_error(what) {}
};

struct SimulateArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string truth;
};

struct CalibrateArgs {
    std::string trace;
    std::string config;
    std::string sensor;
    std::string out;
    std::string report;
};

struct FuseArgs {
    std::string trace;
    std::string cal;
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string report;
    std::string truth;
    std::string anchor;
};

struct AlignArgs {
    std::string poses;
    std::vector<std::string> clouds;
    std::string config;
    std::string out;
    std::string report;
};

struct ReportArgs {
    std::string input;
    std::string config;
    std::string out_dir;
};

int cmd_simulate(const SimulateArgs& args);
int cmd_calibrate(const CalibrateArgs& args);
int cmd_fuse(const FuseArgs& args);
int cmd_align(const AlignArgs& args);
int cmd_report(const ReportArgs& args);

} // namespace geomag::cli
