// Attitude representations and cyclic-angle arithmetic.
//
// Conventions: navigation frame NED, body frame forward-right-down, heading
// positive clockwise from North, Euler sequence Z-Y-X (yaw, pitch, roll).
// A Dcm C^a_b maps vectors resolved in frame b into frame a.
#pragma once

#include <cmath>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace headalign {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Angle in radians, always stored as the representative in (-pi, pi].
class Angle {
 public:
  constexpr Angle() = default;
  explicit Angle(double radians);

  static Angle from_degrees(double degrees);

  double radians() const { return value_; }
  double degrees() const;

  bool operator==(const Angle&) const = default;

 private:
  double value_ = 0.0;
};

/// Wraps any finite angle into (-pi, pi].
double wrap_pi(double radians);

/// Signed difference a - b wrapped through atan2(sin, cos); result in (-pi, pi].
Angle angle_diff(Angle a, Angle b);

/// Rotation vector in radians.
struct RotVec {
  Vec3 v = Vec3::Zero();

  double angle() const { return v.norm(); }
  /// Equivalent vector with norm < pi (norm exactly pi is kept).
  RotVec canonical() const;
};

/// Unit quaternion [s, eta] (Hamilton), canonical sign s >= 0.
struct Quaternion {
  double s = 1.0;
  Vec3 eta = Vec3::Zero();

  static Quaternion identity() { return {}; }
  /// Normalizes and canonicalizes the sign. Throws on zero or non-finite input.
  static Quaternion normalized(double s, const Vec3& eta);

  double norm() const { return std::sqrt(s * s + eta.squaredNorm()); }
};

/// Proper rotation matrix. Construction validates orthonormality.
class Dcm {
 public:
  Dcm() : m_(Mat3::Identity()) {}

  static Dcm identity() { return Dcm(); }
  /// Throws invalid-argument unless |C^T C - I|_inf < 1e-9 and det = 1 +- 1e-9.
  static Dcm from_matrix(const Mat3& m);
  /// Nearest rotation in the Frobenius sense (polar factor).
  static Dcm nearest(const Mat3& m);

  const Mat3& matrix() const { return m_; }
  double operator()(int row, int col) const { return m_(row, col); }

  Dcm transpose() const { return Dcm(m_.transpose(), Unchecked{}); }
  Dcm operator*(const Dcm& rhs) const { return Dcm(m_ * rhs.m_, Unchecked{}); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

  /// One Newton step towards the polar factor; cheap for near-orthonormal input.
  Dcm renormalized() const;
  /// max |C^T C - I|.
  double orthonormality_error() const;

 private:
  struct Unchecked {};
  Dcm(const Mat3& m, Unchecked) : m_(m) {}

  Mat3 m_;
};

/// [v x], so that skew(v) * w == v.cross(w).
Mat3 skew(const Vec3& v);

Dcm rotvec_to_dcm(const RotVec& phi);
RotVec dcm_to_rotvec(const Dcm& c);

Dcm quat_to_dcm(const Quaternion& q);
Quaternion dcm_to_quat(const Dcm& c);

/// Elementary frame rotations (active, right-handed).
Dcm rot_x(double angle);
Dcm rot_y(double angle);
Dcm rot_z(double angle);

struct EulerZyx {
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;

  bool operator==(const EulerZyx&) const = default;
};

/// C^n_b = Rz(yaw) * Ry(pitch) * Rx(roll).
Dcm euler_to_dcm(const EulerZyx& e);
EulerZyx dcm_to_euler(const Dcm& c);

/// Heading of C^n_b: atan2(c21, c11). Throws degenerate-attitude near gimbal lock.
Angle dcm_to_heading(const Dcm& c_nb);

/// Nearest orthogonal matrix by the Newton iteration X <- (X + X^-T)/2.
Mat3 polar_orthonormalize(const Mat3& m, double tol = 1e-12, int max_iter = 100);

}  // namespace headalign
