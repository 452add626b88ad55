#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "geomag/io.hpp"
#include "geomag/magcal.hpp"
#include "geomag/simkit.hpp"
#include "geomag/strapdown.hpp"

namespace geomag::cli {

// Filter block defaults; all keys optional in the file.
struct FilterConfig {
    bool enabled{true};
    double cutoff_hz{5.0};       // low-pass prefilter on acc and gyro
    double q_acc{1e-2};          // Kalman per-step acceleration noise variance
    double r_mag_pos{1e-2};      // variance of the magnetic position fix [m^2]
    double f_s{0.0};             // magnetic->metric transfer [m/uT], 0 = static pin
    double offset_window_s{2.0}; // static-window mean for offset removal
};

struct InitConfig {
    double static_window_s{2.0};
    double acc_tolerance{0.3};   // [m/s^2] band around |gravity|
    double gyro_max{0.05};       // [rad/s]
    double epoch_window_s{5.0};  // max spread of sensor init epochs
};

struct SensorConfig {
    std::string id;
    sim::TrajectoryVariant trajectory;
};

// Full run configuration, JSON on disk. Unset keys take the defaults baked
// into these structs; `echo` keeps the parsed document for report embedding
// and `hash_hex` fingerprints the file bytes.
//
// {
//   "environment": {"gravity": [0,0,-9.81], "latitude_deg": 45.0,
//                   "earth_rate": 7.29e-5},
//   "sample_rate_hz": 200.0,
//   "seed": 1,
//   "noise": {"acc_sigma": 0, "gyro_sigma": 0, "mag_sigma": 0,
//             "acc_bias": [0,0,0], "gyro_bias": [0,0,0]},
//   "distortion": {"soft_iron": [[..]x3], "hard_iron": [x,y,z]},
//   "field": {"type": "uniform", "b0": [20,0,-44]}
//          | {"type": "dipole", "location": [..], "moment": [..]}
//          | {"type": "uniform_plus_anomalies", "b0": [..],
//             "anomalies": [{"location": [..], "moment": [..]}]},
//   "sensors": [{"id": "imu0", "trajectory": {"type": "stationary", ...}}],
//   "filters": {...}, "init": {...}
// }
//
// Trajectory types: stationary {position, attitude_rpy_deg, duration_s};
// line {start, velocity, duration_s, attitude_rpy_deg}; circle {center,
// radius, speed, plane: "xy"|"xz"|"yz", duration_s, lead_in_s, ramp_s};
// stairs {step_length, step_height, cadence_hz, count}; waypoints {points:
// [{t, position, attitude_rpy_deg}]}.
//
// Frame convention: config coordinates are the shared world frame (x toward
// magnetic north, z up). Fusion reports poses in the WCS, the origin
// sensor's initial body frame; the two coincide when that sensor starts at
// the origin, level and facing north, which the bundled configs do.
struct RunConfig {
    strapdown::EnvironmentConstants environment =
        strapdown::EnvironmentConstants::at_latitude(45.0 * M_PI / 180.0);
    double sample_rate_hz{200.0};
    std::uint64_t seed{1};
    strapdown::SensorNoiseModel noise;
    std::optional<magcal::MagCalibration> distortion;
    std::optional<sim::MagneticFieldModel> field;
    std::vector<SensorConfig> sensors;
    FilterConfig filters;
    InitConfig init;

    io::json echo = io::json::object();
    std::string hash_hex;
};

// Parses and validates; unknown keys are rejected at the top level and
// inside typed blocks so typos do not silently fall back to defaults.
// Throws ConfigError naming the offending field path.
RunConfig config_from_json(const io::json& j);
RunConfig load_config(const std::filesystem::path& path);

} // namespace geomag::cli
