#pragma once

#include <Eigen/Core>

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "geomag/geometry.hpp"

namespace geomag::strapdown {

using Mat9 = Eigen::Matrix<double, 9, 9>;

struct ImuSample {
    double t{0.0};
    Vec3 acc = Vec3::Zero();   // specific force, body frame [m/s^2]
    Vec3 gyro = Vec3::Zero();  // angular rate, body frame [rad/s]
    Vec3 mag = Vec3::Zero();   // magnetic field, body frame [uT]
    std::string sensor_id;
};

struct SensorNoiseModel {
    double gyro_sigma{0.0};
    Vec3 gyro_bias = Vec3::Zero();
    double acc_sigma{0.0};
    Vec3 acc_bias = Vec3::Zero();
    double mag_sigma{0.0};
};

// Attitude q maps body-frame vectors into the world frame. Velocity and
// position are world frame. cov orders attitude, velocity, position 3x3
// blocks; the strapdown ops carry it through untouched (uncertainty
// propagation lives in the filter module).
struct PoseState {
    double t{0.0};
    Quaternion q = Quaternion::identity();
    Vec3 v = Vec3::Zero();
    Vec3 s = Vec3::Zero();
    Mat9 cov = Mat9::Zero();
};

// World frame is a local tangent frame fixed at the navigation origin:
// x magnetic north, z up. Latitude only orients the earth-rate vector
// (north and up components); no ellipsoid model.
struct EnvironmentConstants {
    Vec3 gravity{0.0, 0.0, -9.81};
    Vec3 earth_rate{kEarthRate, 0.0, 0.0};
    double latitude{0.0};

    static constexpr double kEarthRate = 7.29e-5;

    static EnvironmentConstants at_latitude(double lat_rad,
                                            double rate = kEarthRate);
    static EnvironmentConstants no_earth_rate();
};

// Longest usable integration step; larger gaps are rejected, not bridged.
inline constexpr double kMaxStep = 0.1;

// One first-order body-rate step: q <- q * [1, gyro*dt/2], renormalized.
PoseState propagate_attitude(const PoseState& state, const Vec3& gyro, double dt);

// Motion-corrected acceleration in the world frame: rotated specific force,
// gravity restored, plus the velocity cross term. Diagnostic form; the
// integrator itself applies only gravity restoration and the earth-rate
// correction (see propagate_velocity_position).
Vec3 correct_acceleration(const PoseState& state, const Vec3& acc_body,
                          const EnvironmentConstants& env, const Vec3& omega_body);

// Running integral of corrected acceleration since navigation start, the
// source of the earth-rate velocity correction -2 w_earth x integral(a) dt.
struct IntegrationState {
    PoseState pose;
    Vec3 accel_integral = Vec3::Zero();
};

// Advances velocity and position across the sample window by trapezoidal
// integration of corrected acceleration. Per step of length dt:
//   dv   = mean(a) * dt                          (trapezoid)
//   dvE  = -2 w_earth x integral(a) * dt         (earth-rate correction)
//   v   += dv + dvE
//   ds   = v_old*dt + mean(a)*dt^2/2 + dt*dv + dt/2*dvE
// Attitude advances internally with the window's gyro samples so the
// specific force rotates with the body.
IntegrationState propagate_velocity_position(IntegrationState state,
                                             std::span<const ImuSample> window,
                                             const EnvironmentConstants& env);

// Same, starting the acceleration integral at zero (window-local earth-rate
// correction).
PoseState propagate_velocity_position(const PoseState& state,
                                      std::span<const ImuSample> window,
                                      const EnvironmentConstants& env);

// Full dead-reckoning pass: one output state per input sample, the first
// being `initial` stamped with the first sample time. The acceleration
// integral runs from the start of the trace.
std::vector<PoseState> dead_reckon(std::span<const ImuSample> trace,
                                   const PoseState& initial,
                                   const EnvironmentConstants& env);

// Static-interval detection over a trace: |acc| within acc_tolerance of
// |gravity| and |gyro| below gyro_max for at least window_s seconds.
struct StaticDetectionParams {
    double window_s{2.0};
    double acc_tolerance{0.3};
    double gyro_max{0.05};
    double gravity_magnitude{9.81};
};

// First [begin, end) index range satisfying the thresholds, or nullopt.
std::optional<std::pair<std::size_t, std::size_t>>
find_static_window(std::span<const ImuSample> trace, const StaticDetectionParams& params);

} // namespace geomag::strapdown
