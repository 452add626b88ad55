#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>

#include "geomag/filters.hpp"
#include "geomag/geometry.hpp"
#include "geomag/simkit.hpp"
#include "geomag/strapdown.hpp"

namespace geomag::wcs {

// Body -> north-aligned frame (x magnetic north, z opposite gravity,
// y completing right-handed), plus the calibrated field seen at init.
struct NorthReference {
    Rotation r_to_np;
    Vec3 b_at_init = Vec3::Zero();
    double t_init{0.0};
};

// The WCS is the origin sensor's initial body frame; r_world maps it into
// the shared north-aligned frame (fixing the axes against magnetic north).
struct WcsAnchor {
    std::string origin_sensor;
    Rotation r_world;
    double t0{0.0};
};

// Sensor n's initial pose in the WCS: d_1n displacement from the origin
// sensor, r_1n rotating sensor-n body vectors into the WCS.
struct RelativeTransform {
    Vec3 d_1n = Vec3::Zero();
    Rotation r_1n;
};

// Magnetic-to-metric unit transfer: f_s in m/uT, f_phi the initial frame
// alignment rotation.
struct TransferFunctions {
    double f_s{0.0};
    Rotation f_phi;
    bool initialized{false};
};

// Tilt-compensated north alignment from one quasi-static sample pair.
// acc_static must be within 20% of 9.81 in magnitude; mag_cal must keep at
// least 5 degrees away from the gravity axis.
NorthReference north_reference(const Vec3& mag_cal, const Vec3& acc_static,
                               double t_init = 0.0);

// Displacement between two initialized sensors: both field vectors move into
// the shared north frame through the inverse reference rotations, and the
// difference converts to meters through the field model's local gradient,
// evaluated at eval_point (the surveyed origin-sensor location).
// refine_iterations > 0 re-evaluates the gradient at the segment midpoint;
// 0 keeps one shared linearization, which makes pairwise transforms compose
// exactly.
RelativeTransform relative_displacement(const NorthReference& ref1,
                                        const NorthReference& refn,
                                        const Vec3& b1, const Vec3& bn,
                                        const sim::MagneticFieldModel& field,
                                        const Vec3& eval_point = Vec3::Zero(),
                                        int refine_iterations = 2);

struct AnchorResult {
    WcsAnchor anchor;
    std::map<std::string, RelativeTransform> transforms;
    // Set when the field gradient cannot support displacement (uniform
    // field): rotations are still aligned, displacements stay zero.
    bool heading_only{false};
};

// Anchors every sensor to the origin sensor's initial frame. All references
// must fall inside a shared epoch window; each state needs its reference.
// Without a field model (or with a gradient-free one) multi-sensor anchoring
// degrades to heading-only alignment instead of inventing displacements.
AnchorResult anchor_wcs(const std::map<std::string, strapdown::PoseState>& states,
                        const std::map<std::string, NorthReference>& refs,
                        const std::optional<sim::MagneticFieldModel>& field,
                        const Vec3& eval_point = Vec3::Zero(),
                        const std::string& origin = std::string(),
                        double epoch_window_s = 5.0);

// f_s = |ds| / |dB| over the init window (dB from first to last calibrated
// mag sample); f_phi is the known rotation between the window's end frames.
TransferFunctions transfer_functions(std::span<const strapdown::ImuSample> init_window,
                                     const Vec3& known_ds, const Rotation& known_dr);

// Per-sensor fused tracking state: strapdown attitude, Kalman position
// channel, and the anchor-epoch field reference for the magnetic
// displacement measurement.
struct LocomotionTracker {
    strapdown::PoseState pose;
    filters::KalmanState kf;
    Vec3 b_ref_wcs = Vec3::Zero();
    Vec3 s_ref = Vec3::Zero();
    strapdown::EnvironmentConstants env;
    bool fuse_mag{true};
};

LocomotionTracker make_locomotion_tracker(const strapdown::PoseState& initial,
                                          const TransferFunctions& tf,
                                          const Vec3& b_ref_wcs,
                                          const strapdown::EnvironmentConstants& env,
                                          double q_accel, const Mat3& r_mag_pos);

// One fused step: gyro advances attitude (seeded with f_phi at tracker
// construction), acceleration drives the Kalman prediction, and the
// magnetic displacement f_s * (B_wcs - B_ref) updates position when mag
// fusion is on. sample.mag must be calibrated.
LocomotionTracker locomotion_update(LocomotionTracker state,
                                    const TransferFunctions& tf,
                                    const strapdown::ImuSample& sample, double dt);

} // namespace geomag::wcs
