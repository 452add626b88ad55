#include "geomag/wcs_align.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "geomag/errors.hpp"

namespace geomag::wcs {

namespace {

constexpr double kAccBand = 0.2;       // fractional band around 9.81
constexpr double kMinDipAngle = 5.0 * M_PI / 180.0;

// North-aligned frame from an up direction and a field vector: x along the
// horizontal field component, z up, y = z cross x.
Rotation north_frame(const Vec3& up_unit, const Vec3& b) {
    const double b_norm = b.norm();
    if (b_norm < 1e-12) {
        throw DegenerateDip("field vector is zero; no heading available");
    }
    if (std::abs(b.dot(up_unit) / b_norm) > std::cos(kMinDipAngle)) {
        throw DegenerateDip("field within 5 degrees of the gravity axis; "
                            "horizontal component too small for a heading");
    }
    const Vec3 horizontal = b - b.dot(up_unit) * up_unit;
    const Vec3 north = horizontal.normalized();
    const Vec3 west = up_unit.cross(north);

    Mat3 m;
    m.row(0) = north.transpose();
    m.row(1) = west.transpose();
    m.row(2) = up_unit.transpose();
    return Rotation::from_matrix(m, 1e-6);
}

// Shared north frame of the world at the evaluation point.
Rotation world_north_frame(const sim::MagneticFieldModel& field,
                           const Vec3& eval_point) {
    const sim::FieldSample fs = sim::field_at(field, eval_point);
    return north_frame(Vec3::UnitZ(), fs.b);
}

Vec3 solve_displacement(const Mat3& grad_np, const Vec3& delta_b_np) {
    Eigen::FullPivLU<Mat3> lu(grad_np);
    lu.setThreshold(1e-9);
    const auto rank = lu.rank();
    if (rank < 3) {
        throw UnobservableDisplacement(
            "field gradient has rank " + std::to_string(rank) +
            " of 3; displacement is unobservable in this field");
    }
    return lu.solve(delta_b_np);
}

} // namespace

NorthReference north_reference(const Vec3& mag_cal, const Vec3& acc_static,
                               double t_init) {
    if (!all_finite(mag_cal) || !all_finite(acc_static)) {
        throw ContractViolation("north reference inputs must be finite");
    }
    const double acc_norm = acc_static.norm();
    if (std::abs(acc_norm - 9.81) > kAccBand * 9.81) {
        throw NotStatic("accelerometer magnitude " + std::to_string(acc_norm) +
                        " m/s^2 outside the quasi-static band around 9.81");
    }
    const Vec3 up = acc_static / acc_norm;

    NorthReference ref;
    ref.r_to_np = north_frame(up, mag_cal);
    ref.b_at_init = mag_cal;
    ref.t_init = t_init;
    return ref;
}

RelativeTransform relative_displacement(const NorthReference& ref1,
                                        const NorthReference& refn,
                                        const Vec3& b1, const Vec3& bn,
                                        const sim::MagneticFieldModel& field,
                                        const Vec3& eval_point,
                                        int refine_iterations) {
    if (!all_finite(b1) || !all_finite(bn)) {
        throw ContractViolation("field vectors must be finite");
    }

    RelativeTransform out;
    out.r_1n = ref1.r_to_np.transposed() * refn.r_to_np;

    // Both init fields expressed in the shared north frame and differenced.
    const Vec3 b1_np = ref1.r_to_np * b1;
    const Vec3 bn_np = refn.r_to_np * bn;
    const Vec3 delta_b_np = bn_np - b1_np;

    const Rotation r_w2np = world_north_frame(field, eval_point);

    Vec3 point = eval_point;
    Vec3 d_np = Vec3::Zero();
    const int passes = std::max(1, refine_iterations + 1);
    for (int i = 0; i < passes; ++i) {
        const Mat3 grad_np =
            r_w2np.matrix() * sim::field_at(field, point).grad *
            r_w2np.matrix().transpose();
        d_np = solve_displacement(grad_np, delta_b_np);
        // Next pass linearizes at the segment midpoint.
        point = eval_point + 0.5 * (r_w2np.transposed() * d_np);
    }

    out.d_1n = ref1.r_to_np.transposed() * d_np;
    return out;
}

AnchorResult anchor_wcs(const std::map<std::string, strapdown::PoseState>& states,
                        const std::map<std::string, NorthReference>& refs,
                        const std::optional<sim::MagneticFieldModel>& field,
                        const Vec3& eval_point, const std::string& origin,
                        double epoch_window_s) {
    if (states.empty()) {
        throw ContractViolation("anchor needs at least one sensor state");
    }
    for (const auto& [id, state] : states) {
        (void)state;
        if (!refs.contains(id)) {
            throw ContractViolation("incomplete initialization: sensor '" + id +
                                    "' has no north reference");
        }
    }
    const std::string origin_id = origin.empty() ? states.begin()->first : origin;
    if (!states.contains(origin_id) || !refs.contains(origin_id)) {
        throw ContractViolation("origin sensor '" + origin_id +
                                "' is not among the initialized sensors");
    }

    double t_min = refs.begin()->second.t_init;
    double t_max = t_min;
    for (const auto& [id, ref] : refs) {
        (void)id;
        t_min = std::min(t_min, ref.t_init);
        t_max = std::max(t_max, ref.t_init);
    }
    if (t_max - t_min > epoch_window_s) {
        throw ContractViolation("sensor initializations span " +
                                std::to_string(t_max - t_min) +
                                " s, beyond the shared epoch window");
    }

    const NorthReference& ref_origin = refs.at(origin_id);

    AnchorResult result;
    result.anchor.origin_sensor = origin_id;
    result.anchor.r_world = ref_origin.r_to_np;
    result.anchor.t0 = ref_origin.t_init;

    for (const auto& [id, state] : states) {
        (void)state;
        if (id == origin_id) {
            result.transforms[id] = RelativeTransform{};
            continue;
        }
        const NorthReference& ref_n = refs.at(id);
        if (field) {
            try {
                result.transforms[id] = relative_displacement(
                    ref_origin, ref_n, ref_origin.b_at_init, ref_n.b_at_init,
                    *field, eval_point);
                continue;
            } catch (const UnobservableDisplacement&) {
                result.heading_only = true;
            }
        } else {
            result.heading_only = true;
        }
        RelativeTransform rot_only;
        rot_only.r_1n = ref_origin.r_to_np.transposed() * ref_n.r_to_np;
        result.transforms[id] = rot_only;
    }
    return result;
}

TransferFunctions transfer_functions(std::span<const strapdown::ImuSample> init_window,
                                     const Vec3& known_ds, const Rotation& known_dr) {
    if (init_window.size() < 2) {
        throw ContractViolation("transfer-function window needs at least two samples");
    }
    const double span = init_window.back().t - init_window.front().t;
    if (!(span > 0.0)) {
        throw ContractViolation("transfer-function window must span positive time");
    }
    const Vec3 delta_b = init_window.back().mag - init_window.front().mag;
    const double db = delta_b.norm();
    if (db < 1e-12) {
        throw UnobservableDisplacement(
            "no field change across the init window; translation transfer "
            "is unobservable");
    }

    TransferFunctions tf;
    tf.f_s = known_ds.norm() / db;
    tf.f_phi = known_dr;
    tf.initialized = true;
    return tf;
}

LocomotionTracker make_locomotion_tracker(const strapdown::PoseState& initial,
                                          const TransferFunctions& tf,
                                          const Vec3& b_ref_wcs,
                                          const strapdown::EnvironmentConstants& env,
                                          double q_accel, const Mat3& r_mag_pos) {
    if (!tf.initialized) {
        throw ContractViolation("transfer functions are not initialized");
    }
    LocomotionTracker tracker;
    tracker.pose = initial;
    // f_phi seeds the orientation channel as the initial frame offset.
    tracker.pose.q =
        (quat_from_rotation(tf.f_phi) * initial.q).normalized();
    tracker.kf.x.head<3>() = initial.s;
    tracker.kf.x.tail<3>() = initial.v;
    tracker.kf.P = filters::Mat6::Identity() * 1e-6;
    tracker.kf.q_accel = q_accel;
    tracker.kf.R_meas = r_mag_pos;
    tracker.b_ref_wcs = b_ref_wcs;
    tracker.s_ref = initial.s;
    tracker.env = env;
    return tracker;
}

LocomotionTracker locomotion_update(LocomotionTracker state,
                                    const TransferFunctions& tf,
                                    const strapdown::ImuSample& sample, double dt) {
    if (!tf.initialized) {
        throw ContractViolation("transfer functions are not initialized");
    }
    state.pose = strapdown::propagate_attitude(state.pose, sample.gyro, dt);

    const Vec3 acc_world = state.pose.q.rotate(sample.acc) + state.env.gravity;
    state.kf = filters::kalman_predict(state.kf, acc_world, dt);

    if (state.fuse_mag) {
        // With f_s = 0 (no init motion) the measurement degenerates to the
        // reference position: the field seeing no change reads as no
        // displacement, which is what pins a static sensor.
        const Vec3 b_wcs = state.pose.q.rotate(sample.mag);
        const Vec3 pos_meas = state.s_ref + tf.f_s * (b_wcs - state.b_ref_wcs);
        state.kf = filters::kalman_update(state.kf, pos_meas, state.kf.R_meas);
    }

    state.pose.v = state.kf.velocity();
    state.pose.s = state.kf.position();
    state.pose.cov.block<3, 3>(3, 3) = state.kf.P.bottomRightCorner<3, 3>();
    state.pose.cov.block<3, 3>(6, 6) = state.kf.P.topLeftCorner<3, 3>();
    return state;
}

} // namespace geomag::wcs
