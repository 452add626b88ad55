#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "geomag/geometry.hpp"
#include "geomag/magcal.hpp"
#include "geomag/strapdown.hpp"

namespace geomag::sim {

// Field models are analytic in local tangent coordinates (x north, z up);
// dipoles are point sources with moment direction and strength folded into
// one vector (|moment| in uT*m^3, field = (3(m.n)n - m)/r^3 about n = r/|r|).
struct UniformField {
    Vec3 b0 = Vec3::Zero();
};

struct DipoleField {
    Vec3 location = Vec3::Zero();
    Vec3 moment = Vec3::UnitZ();
};

struct UniformPlusAnomalies {
    Vec3 b0 = Vec3::Zero();
    std::vector<DipoleField> anomalies;
};

using MagneticFieldModel = std::variant<UniformField, DipoleField, UniformPlusAnomalies>;

struct FieldSample {
    Vec3 b = Vec3::Zero();
    Mat3 grad = Mat3::Zero();
};

// Analytic field and gradient; throws on evaluation at a dipole location.
FieldSample field_at(const MagneticFieldModel& field, const Vec3& p);

// Trajectory variants. Every variant defines pose, velocity, acceleration
// and body angular rate analytically at any t in [0, duration].
struct Stationary {
    Vec3 position = Vec3::Zero();
    EulerAngles attitude;
    double duration{10.0};
};

struct Line {
    Vec3 start = Vec3::Zero();
    Vec3 velocity = Vec3::UnitX();
    double duration{10.0};
    EulerAngles attitude;
};

enum class CirclePlane { XY, XZ, YZ };

// Tangent-heading circle. lead_in_s holds the start pose at rest before the
// sweep; ramp_s eases the angular rate from zero with a smoothstep profile
// so a lead-in stays acceleration-continuous. Defaults trace exactly one lap
// at constant rate when duration <= 0.
struct Circle {
    Vec3 center = Vec3::Zero();
    double radius{1.0};
    double speed{0.5};
    CirclePlane plane{CirclePlane::XY};
    double duration{0.0};
    double lead_in_s{0.0};
    double ramp_s{0.0};
};

// Human stair climb: forward and vertical displacement advance one step per
// 1/cadence with a cycloidal (sinusoid-derivative) per-step profile.
struct Stairs {
    double step_length{0.3};
    double step_height{0.17};
    double cadence_hz{1.0};
    int count{10};
};

struct Waypoint {
    double t{0.0};
    Vec3 position = Vec3::Zero();
    EulerAngles attitude;
};

// Piecewise linear position, piecewise constant-rate attitude (geodesic
// interpolation between node attitudes).
struct Waypoints {
    std::vector<Waypoint> points;
};

using TrajectoryVariant = std::variant<Stationary, Line, Circle, Stairs, Waypoints>;

struct TrajectorySpec {
    TrajectoryVariant shape;
    double sample_rate_hz{200.0};
    std::string sensor_id{"imu0"};
};

struct TrajectorySample {
    double t{0.0};
    Quaternion q = Quaternion::identity(); // body -> world
    Vec3 v = Vec3::Zero();
    Vec3 s = Vec3::Zero();
    Vec3 a = Vec3::Zero();          // world-frame linear acceleration
    Vec3 omega_body = Vec3::Zero();
};

double trajectory_duration(const TrajectoryVariant& shape);
TrajectorySample evaluate_trajectory(const TrajectoryVariant& shape, double t);

struct GroundTruthSample {
    double t{0.0};
    Quaternion q = Quaternion::identity();
    Vec3 v = Vec3::Zero();
    Vec3 s = Vec3::Zero();
    Vec3 a_world = Vec3::Zero();
    Vec3 omega_body = Vec3::Zero();
    Vec3 b_world = Vec3::Zero();
    Vec3 b_body = Vec3::Zero();
    Mat3 grad_b = Mat3::Zero();
};

struct GroundTruth {
    std::string sensor_id;
    std::vector<GroundTruthSample> samples;
};

// World gravity the synthesizer bakes into accelerometer readings.
inline const Vec3 kGravity{0.0, 0.0, -9.81};

// Measurement synthesis: acc = R'(a - g) + bias + noise, gyro = w + bias +
// noise, mag = R'B optionally pushed through the inverse of `distortion`
// (hard/soft-iron injection), then noise. Deterministic per seed.
std::pair<std::vector<strapdown::ImuSample>, GroundTruth>
synthesize_trace(const TrajectorySpec& traj, const MagneticFieldModel& field,
                 const strapdown::SensorNoiseModel& noise,
                 const std::optional<magcal::MagCalibration>& distortion,
                 std::uint64_t seed);

// Max body-frame residual of the field transport identity
//   d(B_body)/dt = -w x B_body + R' (gradB * v)
// over interior samples, via central differences on the stored B_body.
double eq4_consistency_check(const GroundTruth& truth);

} // namespace geomag::sim
