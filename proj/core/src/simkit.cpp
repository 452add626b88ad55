#include "geomag/simkit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "geomag/errors.hpp"

namespace geomag::sim {

namespace {

FieldSample dipole_at(const DipoleField& d, const Vec3& p) {
    const Vec3 r = p - d.location;
    const double dist = r.norm();
    if (dist < 1e-9) {
        throw DegenerateInput("field evaluated at a dipole singular point");
    }
    const Vec3 n = r / dist;
    const double r3 = dist * dist * dist;
    const double mn = d.moment.dot(n);

    FieldSample out;
    out.b = (3.0 * mn * n - d.moment) / r3;
    // Symmetric traceless dipole Jacobian:
    // gradB = 3/r^4 [ (m.n) I + n m' + m n' - 5 (m.n) n n' ]
    out.grad = (3.0 / (r3 * dist)) *
               (mn * Mat3::Identity() + n * d.moment.transpose() +
                d.moment * n.transpose() - 5.0 * mn * n * n.transpose());
    return out;
}

struct FieldVisitor {
    const Vec3& p;

    FieldSample operator()(const UniformField& f) const {
        return FieldSample{f.b0, Mat3::Zero()};
    }
    FieldSample operator()(const DipoleField& f) const { return dipole_at(f, p); }
    FieldSample operator()(const UniformPlusAnomalies& f) const {
        FieldSample out{f.b0, Mat3::Zero()};
        for (const auto& a : f.anomalies) {
            const FieldSample fs = dipole_at(a, p);
            out.b += fs.b;
            out.grad += fs.grad;
        }
        return out;
    }
};

// Cycloidal unit step: c(0)=0, c(1)=1, zero end-slope, sinusoidal rate.
double cyc(double u) { return u - std::sin(2.0 * M_PI * u) / (2.0 * M_PI); }
double cyc_d(double u) { return 1.0 - std::cos(2.0 * M_PI * u); }
double cyc_dd(double u) { return 2.0 * M_PI * std::sin(2.0 * M_PI * u); }

Rotation circle_plane_rotation(CirclePlane plane) {
    switch (plane) {
        case CirclePlane::XY: return Rotation::identity();
        case CirclePlane::XZ: return Rotation::about_x(M_PI / 2.0);
        case CirclePlane::YZ: return Rotation::about_y(-M_PI / 2.0);
    }
    return Rotation::identity();
}

struct CirclePhase {
    double theta;
    double theta_dot;
    double theta_ddot;
};

// Angular phase with optional smoothstep spin-up from rest.
CirclePhase circle_phase(const Circle& c, double t) {
    const double w = c.speed / c.radius;
    if (t <= 0.0) return {0.0, c.ramp_s > 0.0 ? 0.0 : w, 0.0};
    if (c.ramp_s > 0.0 && t < c.ramp_s) {
        // theta_dot = w * smoothstep(u); theta = w * ramp * (u^3 - u^4/2)
        const double u = t / c.ramp_s;
        const double r = u * u * (3.0 - 2.0 * u);
        const double rd = 6.0 * u * (1.0 - u) / c.ramp_s;
        return {w * c.ramp_s * (u * u * u - 0.5 * u * u * u * u), w * r, w * rd};
    }
    if (c.ramp_s > 0.0) {
        // smoothstep integrates to 1/2 over the ramp
        return {w * (t - 0.5 * c.ramp_s), w, 0.0};
    }
    return {w * t, w, 0.0};
}

TrajectorySample eval_stationary(const Stationary& s, double) {
    TrajectorySample out;
    out.q = quat_from_rotation(euler_to_rotation(s.attitude));
    out.s = s.position;
    return out;
}

TrajectorySample eval_line(const Line& l, double t) {
    TrajectorySample out;
    out.q = quat_from_rotation(euler_to_rotation(l.attitude));
    out.s = l.start + t * l.velocity;
    out.v = l.velocity;
    return out;
}

TrajectorySample eval_circle(const Circle& c, double t) {
    const Rotation plane = circle_plane_rotation(c.plane);
    const double tm = t - c.lead_in_s;
    const CirclePhase ph = (c.lead_in_s > 0.0 && tm <= 0.0)
                               ? CirclePhase{0.0, 0.0, 0.0}
                               : circle_phase(c, std::max(tm, 0.0));
    const double th = ph.theta;
    const Vec3 radial(std::cos(th), std::sin(th), 0.0);
    const Vec3 tangent(-std::sin(th), std::cos(th), 0.0);

    TrajectorySample out;
    out.s = c.center + plane * (c.radius * radial);
    out.v = plane * (c.radius * ph.theta_dot * tangent);
    out.a = plane * (c.radius * (ph.theta_ddot * tangent -
                                 ph.theta_dot * ph.theta_dot * radial));
    out.q = quat_from_rotation(plane * Rotation::about_z(th + M_PI / 2.0));
    out.omega_body = Vec3(0.0, 0.0, ph.theta_dot);
    return out;
}

TrajectorySample eval_stairs(const Stairs& st, double t) {
    const double period = 1.0 / st.cadence_hz;
    const double total = period * st.count;
    TrajectorySample out;
    if (t >= total) {
        out.s = Vec3(st.step_length * st.count, 0.0, st.step_height * st.count);
        return out;
    }
    const double tc = std::max(t, 0.0);
    const double k = std::floor(tc / period);
    const double u = (tc - k * period) / period;
    const double f = st.cadence_hz;
    out.s = Vec3(st.step_length * (k + cyc(u)), 0.0,
                 st.step_height * (k + cyc(u)));
    out.v = Vec3(st.step_length * f * cyc_d(u), 0.0, st.step_height * f * cyc_d(u));
    out.a = Vec3(st.step_length * f * f * cyc_dd(u), 0.0,
                 st.step_height * f * f * cyc_dd(u));
    return out;
}

struct SegmentRate {
    Vec3 axis = Vec3::UnitZ();
    double angle{0.0};
};

SegmentRate relative_rate(const Quaternion& qa, const Quaternion& qb) {
    Quaternion d = qa.conjugate() * qb;
    if (d.w < 0.0) d = -d;
    const double vn = d.vec().norm();
    SegmentRate out;
    if (vn < 1e-15) return out;
    out.axis = d.vec() / vn;
    out.angle = 2.0 * std::atan2(vn, d.w);
    return out;
}

TrajectorySample eval_waypoints(const Waypoints& w, double t) {
    if (w.points.size() < 2) {
        throw ContractViolation("waypoint trajectory needs at least two points");
    }
    for (std::size_t i = 1; i < w.points.size(); ++i) {
        if (!(w.points[i].t > w.points[i - 1].t)) {
            throw ContractViolation("waypoint times must be strictly increasing");
        }
    }
    const double t0 = w.points.front().t;
    const double t1 = w.points.back().t;
    const double tc = std::clamp(t, t0, t1);

    std::size_t i = 0;
    while (i + 2 < w.points.size() && tc >= w.points[i + 1].t) ++i;
    const Waypoint& a = w.points[i];
    const Waypoint& b = w.points[i + 1];
    const double span = b.t - a.t;
    const double u = std::clamp((tc - a.t) / span, 0.0, 1.0);

    const Quaternion qa = quat_from_rotation(euler_to_rotation(a.attitude));
    const Quaternion qb = quat_from_rotation(euler_to_rotation(b.attitude));
    const SegmentRate rate = relative_rate(qa, qb);

    TrajectorySample out;
    out.s = a.position + u * (b.position - a.position);
    out.v = (b.position - a.position) / span;
    out.q = rate.angle < 1e-15
                ? qa
                : qa * quat_from_axis_angle(rate.axis, rate.angle * u);
    out.omega_body = rate.axis * (rate.angle / span);
    if (t < t0 || t > t1) {
        out.v = Vec3::Zero();
        out.omega_body = Vec3::Zero();
    }
    return out;
}

} // namespace

FieldSample field_at(const MagneticFieldModel& field, const Vec3& p) {
    if (!all_finite(p)) {
        throw ContractViolation("field evaluation point must be finite");
    }
    return std::visit(FieldVisitor{p}, field);
}

double trajectory_duration(const TrajectoryVariant& shape) {
    return std::visit(
        [](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Stationary>) {
                return s.duration;
            } else if constexpr (std::is_same_v<T, Line>) {
                return s.duration;
            } else if constexpr (std::is_same_v<T, Circle>) {
                const double lap = 2.0 * M_PI * s.radius / s.speed;
                const double sweep = s.duration > 0.0 ? s.duration
                                                      : lap + 0.5 * s.ramp_s;
                return s.lead_in_s + sweep;
            } else if constexpr (std::is_same_v<T, Stairs>) {
                return s.count / s.cadence_hz;
            } else {
                if (s.points.empty()) return 0.0;
                return s.points.back().t - s.points.front().t;
            }
        },
        shape);
}

TrajectorySample evaluate_trajectory(const TrajectoryVariant& shape, double t) {
    TrajectorySample out = std::visit(
        [t](const auto& s) -> TrajectorySample {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Stationary>) {
                return eval_stationary(s, t);
            } else if constexpr (std::is_same_v<T, Line>) {
                return eval_line(s, t);
            } else if constexpr (std::is_same_v<T, Circle>) {
                return eval_circle(s, t);
            } else if constexpr (std::is_same_v<T, Stairs>) {
                return eval_stairs(s, t);
            } else {
                return eval_waypoints(s, t);
            }
        },
        shape);
    out.t = t;
    return out;
}

std::pair<std::vector<strapdown::ImuSample>, GroundTruth>
synthesize_trace(const TrajectorySpec& traj, const MagneticFieldModel& field,
                 const strapdown::SensorNoiseModel& noise,
                 const std::optional<magcal::MagCalibration>& distortion,
                 std::uint64_t seed) {
    if (!(traj.sample_rate_hz >= 10.0)) {
        throw ContractViolation("sample rate must be at least 10 Hz");
    }
    if (noise.gyro_sigma < 0.0 || noise.acc_sigma < 0.0 || noise.mag_sigma < 0.0) {
        throw ContractViolation("noise sigmas must be non-negative");
    }

    std::optional<Mat3> soft_inverse;
    if (distortion) {
        soft_inverse = distortion->soft_iron.inverse();
    }

    const double duration = trajectory_duration(traj.shape);
    const double dt = 1.0 / traj.sample_rate_hz;
    const auto count = static_cast<std::size_t>(std::floor(duration / dt + 1e-9)) + 1;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto noise3 = [&rng, &gauss](double sigma) {
        if (sigma <= 0.0) return Vec3(Vec3::Zero());
        return Vec3(sigma * gauss(rng), sigma * gauss(rng), sigma * gauss(rng));
    };

    std::vector<strapdown::ImuSample> samples;
    samples.reserve(count);
    GroundTruth truth;
    truth.sensor_id = traj.sensor_id;
    truth.samples.reserve(count);

    for (std::size_t k = 0; k < count; ++k) {
        const double t = static_cast<double>(k) * dt;
        const TrajectorySample ts = evaluate_trajectory(traj.shape, t);
        const FieldSample fs = field_at(field, ts.s);
        const Quaternion q_wb = ts.q.conjugate(); // world -> body

        GroundTruthSample gt;
        gt.t = t;
        gt.q = ts.q;
        gt.v = ts.v;
        gt.s = ts.s;
        gt.a_world = ts.a;
        gt.omega_body = ts.omega_body;
        gt.b_world = fs.b;
        gt.b_body = q_wb.rotate(fs.b);
        gt.grad_b = fs.grad;

        strapdown::ImuSample im;
        im.t = t;
        im.sensor_id = traj.sensor_id;
        im.acc = q_wb.rotate(ts.a - kGravity) + noise.acc_bias +
                 noise3(noise.acc_sigma);
        im.gyro = ts.omega_body + noise.gyro_bias + noise3(noise.gyro_sigma);
        Vec3 mag = gt.b_body;
        if (distortion) {
            // Invert B_c = C (B_raw - b_H): raw reading that calibrates back
            // to the clean field.
            mag = *soft_inverse * mag + distortion->hard_iron;
        }
        im.mag = mag + noise3(noise.mag_sigma);

        samples.push_back(std::move(im));
        truth.samples.push_back(gt);
    }
    return {std::move(samples), std::move(truth)};
}

double eq4_consistency_check(const GroundTruth& truth) {
    const auto& s = truth.samples;
    if (s.size() < 3) return 0.0;
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        const double dt = s[i + 1].t - s[i - 1].t;
        if (!(dt > 0.0)) {
            throw ContractViolation("ground truth samples must be time-ordered");
        }
        const Vec3 lhs = (s[i + 1].b_body - s[i - 1].b_body) / dt;
        const Quaternion q_wb = s[i].q.conjugate();
        const Vec3 rhs = -s[i].omega_body.cross(s[i].b_body) +
                         q_wb.rotate(s[i].grad_b * s[i].v);
        worst = std::max(worst, (lhs - rhs).norm());
    }
    return worst;
}

} // namespace geomag::sim
