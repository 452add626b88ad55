#include "geomag/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace geomag {

double Quaternion::norm() const {
    return std::sqrt(w * w + x * x + y * y + z * z);
}

Quaternion Quaternion::normalized() const {
    const double n = norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw ContractViolation("quaternion norm is zero or non-finite");
    }
    return {w / n, x / n, y / n, z / n};
}

Quaternion Quaternion::operator*(const Quaternion& r) const {
    return {
        w * r.w - x * r.x - y * r.y - z * r.z,
        w * r.x + x * r.w + y * r.z - z * r.y,
        w * r.y - x * r.z + y * r.w + z * r.x,
        w * r.z + x * r.y - y * r.x + z * r.w,
    };
}

Vec3 Quaternion::rotate(const Vec3& v) const {
    // q v q* expanded: v + 2 w (u x v) + 2 u x (u x v), u = vector part
    const Vec3 u = vec();
    const Vec3 t = 2.0 * u.cross(v);
    return v + w * t + u.cross(t);
}

Rotation Rotation::from_matrix(const Mat3& m, double tol) {
    if (!all_finite(m)) {
        throw ContractViolation("rotation matrix has non-finite entries");
    }
    const double ortho = (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
    if (ortho > tol) {
        throw ContractViolation("matrix is not orthonormal within tolerance");
    }
    if (std::abs(m.determinant() - 1.0) > tol) {
        throw ContractViolation("matrix determinant is not +1 (improper rotation)");
    }
    return Rotation(m, unchecked_t{});
}

Rotation Rotation::about_x(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 m;
    m << 1, 0, 0,
         0, c, -s,
         0, s, c;
    return Rotation(m, unchecked_t{});
}

Rotation Rotation::about_y(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 m;
    m << c, 0, s,
         0, 1, 0,
         -s, 0, c;
    return Rotation(m, unchecked_t{});
}

Rotation Rotation::about_z(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 m;
    m << c, -s, 0,
         s, c, 0,
         0, 0, 1;
    return Rotation(m, unchecked_t{});
}

Rotation Rotation::transposed() const {
    return Rotation(m_.transpose(), unchecked_t{});
}

Rotation Rotation::operator*(const Rotation& rhs) const {
    return Rotation(m_ * rhs.m_, unchecked_t{});
}

const char* frame_name(FrameTag tag) {
    switch (tag) {
        case FrameTag::Body: return "body";
        case FrameTag::Camera: return "camera";
        case FrameTag::Inertial: return "inertial";
        case FrameTag::World: return "world";
    }
    return "unknown";
}

FramedRotation FramedRotation::compose(const FramedRotation& rhs) const {
    if (rhs.to != from) {
        throw ContractViolation(std::string("frame mismatch: cannot compose ") +
                                frame_name(from) + "->" + frame_name(to) + " after " +
                                frame_name(rhs.from) + "->" + frame_name(rhs.to));
    }
    return {rot * rhs.rot, rhs.from, to};
}

Quaternion quat_from_axis_angle(const Vec3& axis, double angle) {
    if (!all_finite(axis) || !std::isfinite(angle)) {
        throw ContractViolation("axis-angle input has non-finite entries");
    }
    if (std::abs(axis.norm() - 1.0) > kUnitTol) {
        throw ContractViolation("axis must be unit length");
    }
    const double h = 0.5 * angle;
    const double s = std::sin(h);
    return {std::cos(h), axis.x() * s, axis.y() * s, axis.z() * s};
}

Rotation quat_to_rotation(const Quaternion& q) {
    if (std::abs(q.norm() - 1.0) > kUnitTol) {
        throw ContractViolation("quaternion must be unit length");
    }
    const double w = q.w, x = q.x, y = q.y, z = q.z;
    Mat3 m;
    // All terms bilinear in q, so q and -q yield the identical matrix.
    m << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
         2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
         2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return Rotation(m, Rotation::unchecked_t{});
}

Quaternion quat_from_rotation(const Rotation& r) {
    const Mat3& m = r.matrix();
    // Shepperd's method: pick the largest of the four squared components.
    const double t = m.trace();
    Quaternion q;
    if (t > m(0, 0) && t > m(1, 1) && t > m(2, 2)) {
        const double s = std::sqrt(1.0 + t) * 2.0;
        q = {0.25 * s, (m(2, 1) - m(1, 2)) / s, (m(0, 2) - m(2, 0)) / s,
             (m(1, 0) - m(0, 1)) / s};
    } else if (m(0, 0) > m(1, 1) && m(0, 0) > m(2, 2)) {
        const double s = std::sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2)) * 2.0;
        q = {(m(2, 1) - m(1, 2)) / s, 0.25 * s, (m(0, 1) + m(1, 0)) / s,
             (m(0, 2) + m(2, 0)) / s};
    } else if (m(1, 1) > m(2, 2)) {
        const double s = std::sqrt(1.0 + m(1, 1) - m(0, 0) - m(2, 2)) * 2.0;
        q = {(m(0, 2) - m(2, 0)) / s, (m(0, 1) + m(1, 0)) / s, 0.25 * s,
             (m(1, 2) + m(2, 1)) / s};
    } else {
        const double s = std::sqrt(1.0 + m(2, 2) - m(0, 0) - m(1, 1)) * 2.0;
        q = {(m(1, 0) - m(0, 1)) / s, (m(0, 2) + m(2, 0)) / s,
             (m(1, 2) + m(2, 1)) / s, 0.25 * s};
    }
    q = q.normalized();
    return q.w < 0.0 ? -q : q;
}

Rotation euler_to_rotation(const EulerAngles& e) {
    if (!std::isfinite(e.roll) || !std::isfinite(e.pitch) || !std::isfinite(e.yaw)) {
        throw ContractViolation("euler angles must be finite");
    }
    return Rotation::about_z(e.yaw) * Rotation::about_y(e.pitch) * Rotation::about_x(e.roll);
}

EulerAngles rotation_to_euler(const Rotation& r) {
    const Mat3& m = r.matrix();
    EulerAngles e;
    // R = Rz(yaw) Ry(pitch) Rx(roll): m(2,0) = -sin(pitch)
    const double sp = std::clamp(-m(2, 0), -1.0, 1.0);
    e.pitch = std::asin(sp);
    if (1.0 - std::abs(sp) < 1e-12) {
        // Gimbal lock: only roll -/+ yaw observable; fix yaw = 0.
        e.yaw = 0.0;
        e.roll = std::atan2(sp > 0 ? m(0, 1) : -m(0, 1), m(1, 1));
    } else {
        e.roll = std::atan2(m(2, 1), m(2, 2));
        e.yaw = std::atan2(m(1, 0), m(0, 0));
    }
    return e;
}

bool gimbal_locked(const Rotation& r, double tol) {
    const double pitch = std::asin(std::clamp(-r.matrix()(2, 0), -1.0, 1.0));
    return std::abs(std::abs(pitch) - M_PI / 2.0) <= tol;
}

Mat3 dcm_small_angle(const EulerAngles& e) {
    Mat3 m;
    m << 1.0, e.yaw, -e.pitch,
         -e.yaw, 1.0, e.roll,
         e.pitch, -e.roll, 1.0;
    return m;
}

double rotation_angle_between(const Rotation& a, const Rotation& b) {
    return rotation_angle(a.transposed() * b);
}

double rotation_angle(const Rotation& r) {
    const double c = std::clamp((r.matrix().trace() - 1.0) / 2.0, -1.0, 1.0);
    return std::acos(c);
}

Mat3 skew(const Vec3& v) {
    Mat3 m;
    m << 0, -v.z(), v.y(),
         v.z(), 0, -v.x(),
         -v.y(), v.x(), 0;
    return m;
}

bool all_finite(const Vec3& v) {
    return v.allFinite();
}

bool all_finite(const Mat3& m) {
    return m.allFinite();
}

} // namespace geomag
