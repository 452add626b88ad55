#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "geomag/errors.hpp"

namespace geomag {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

constexpr double kUnitTol = 1e-9;

// Scalar-first unit quaternion. Composition follows Hamilton convention:
// (q1 * q2) rotates by q2 first, then q1, matching matrix order R1*R2.
struct Quaternion {
    double w{1.0};
    double x{0.0};
    double y{0.0};
    double z{0.0};

    static Quaternion identity() { return {1.0, 0.0, 0.0, 0.0}; }

    double norm() const;
    Quaternion normalized() const;
    Quaternion conjugate() const { return {w, -x, -y, -z}; }
    Quaternion operator-() const { return {-w, -x, -y, -z}; }
    Quaternion operator*(const Quaternion& rhs) const;

    // Conjugation q v q*: rotates a body-frame vector into the parent frame.
    Vec3 rotate(const Vec3& v) const;

    Vec3 vec() const { return {x, y, z}; }
};

// Orthonormal right-handed 3x3 matrix with det +1. Construction validates,
// every product of valid Rotations stays valid to machine precision.
class Rotation {
public:
    Rotation() : m_(Mat3::Identity()) {}

    // Validates orthonormality and handedness within tol.
    static Rotation from_matrix(const Mat3& m, double tol = kUnitTol);
    static Rotation identity() { return Rotation(); }
    static Rotation about_x(double angle);
    static Rotation about_y(double angle);
    static Rotation about_z(double angle);

    const Mat3& matrix() const { return m_; }
    Rotation transposed() const;
    Rotation operator*(const Rotation& rhs) const;
    Vec3 operator*(const Vec3& v) const { return m_ * v; }

private:
    struct unchecked_t {};
    Rotation(const Mat3& m, unchecked_t) : m_(m) {}

    Mat3 m_;

    friend Rotation quat_to_rotation(const Quaternion& q);
};

// Intrinsic z-y-x (yaw, pitch, roll) angles in radians. Extraction confines
// pitch to [-pi/2, pi/2] and roll/yaw to (-pi, pi].
struct EulerAngles {
    double roll{0.0};
    double pitch{0.0};
    double yaw{0.0};
};

enum class FrameTag { Body, Camera, Inertial, World };

const char* frame_name(FrameTag tag);

// Rotation with source and destination frame bookkeeping. Composing
// transforms whose frames do not chain is rejected.
struct FramedRotation {
    Rotation rot;
    FrameTag from{FrameTag::Body};
    FrameTag to{FrameTag::World};

    // (this) o (rhs): rhs.from -> rhs.to == this->from -> this->to
    FramedRotation compose(const FramedRotation& rhs) const;
    Vec3 apply(const Vec3& v) const { return rot * v; }
    FramedRotation inverse() const { return {rot.transposed(), to, from}; }
};

// [cos(angle/2), axis*sin(angle/2)]; axis must be unit within 1e-9.
Quaternion quat_from_axis_angle(const Vec3& axis, double angle);

// Requires unit q within 1e-9; q and -q map to the same Rotation.
Rotation quat_to_rotation(const Quaternion& q);

// Inverse of quat_to_rotation; returns the hemisphere with w >= 0.
Quaternion quat_from_rotation(const Rotation& r);

// R = R_z(yaw) * R_y(pitch) * R_x(roll), intrinsic z-y-x.
Rotation euler_to_rotation(const EulerAngles& e);

// Inverse of euler_to_rotation away from gimbal lock. At |pitch| = pi/2
// only (roll - yaw) resp. (roll + yaw) is observable; yaw is set to 0 by
// convention there (see gimbal_locked for the degeneracy test).
EulerAngles rotation_to_euler(const Rotation& r);

// True when |pitch| is within tol of pi/2, i.e. rotation_to_euler returns
// the degenerate yaw = 0 convention.
bool gimbal_locked(const Rotation& r, double tol = 1e-6);

// First-order direction cosine matrix of the world-to-body transform:
//   [   1   yaw  -pitch ]
//   [ -yaw   1    roll  ]
//   [ pitch -roll  1    ]
// Approximates euler_to_rotation(e) transposed for small angles; callers own
// the O(angle^2) error.
Mat3 dcm_small_angle(const EulerAngles& e);

// Geodesic distance: the angle of R1^T * R2, in [0, pi].
double rotation_angle_between(const Rotation& a, const Rotation& b);

// Angle of the rotation itself (geodesic distance from identity).
double rotation_angle(const Rotation& r);

Mat3 skew(const Vec3& v);

bool all_finite(const Vec3& v);
bool all_finite(const Mat3& m);

} // namespace geomag
