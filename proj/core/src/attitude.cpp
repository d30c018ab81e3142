#include "headalign/attitude.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <numbers>

#include "headalign/error.hpp"

namespace headalign {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kSmallAngle = 1e-8;

Vec3 vee(const Mat3& m) {
  return {m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1)};
}

void require_finite(const Vec3& v, const char* what) {
  if (!v.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + ": non-finite input");
  }
}

}  // namespace

double wrap_pi(double radians) {
  double r = std::remainder(radians, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  if (r > kPi) r -= kTwoPi;
  return r;
}

Angle::Angle(double radians) {
  if (!std::isfinite(radians)) {
    throw Error(ErrorCode::kInvalidArgument, "Angle: non-finite value");
  }
  value_ = wrap_pi(radians);
}

Angle Angle::from_degrees(double degrees) { return Angle(degrees * kPi / 180.0); }

double Angle::degrees() const { return value_ * 180.0 / kPi; }

Angle angle_diff(Angle a, Angle b) {
  const double d = a.radians() - b.radians();
  return Angle(std::atan2(std::sin(d), std::cos(d)));
}

RotVec RotVec::canonical() const {
  const double n = v.norm();
  if (n <= kPi) return *this;
  // Reduce the magnitude modulo 2*pi along the same axis.
  const double reduced = wrap_pi(n);
  return RotVec{v * (reduced / n)};
}

Quaternion Quaternion::normalized(double s, const Vec3& eta) {
  const double n = std::sqrt(s * s + eta.squaredNorm());
  if (!std::isfinite(n) || n == 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "Quaternion: zero or non-finite norm");
  }
  Quaternion q{s / n, eta / n};
  if (q.s < 0.0) {
    q.s = -q.s;
    q.eta = -q.eta;
  }
  return q;
}

Dcm Dcm::from_matrix(const Mat3& m) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "Dcm: non-finite entries");
  }
  const double ortho = (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
  const double det = m.determinant();
  if (ortho >= 1e-9 || std::abs(det - 1.0) >= 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "Dcm: matrix is not a proper rotation");
  }
  return Dcm(m, Unchecked{});
}

Dcm Dcm::nearest(const Mat3& m) {
  const Mat3 r = polar_orthonormalize(m);
  if (r.determinant() < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "Dcm: nearest orthogonal matrix is a reflection");
  }
  return Dcm(r, Unchecked{});
}

Dcm Dcm::renormalized() const {
  return Dcm(0.5 * (m_ + m_.inverse().transpose()), Unchecked{});
}

double Dcm::orthonormality_error() const {
  return (m_.transpose() * m_ - Mat3::Identity()).cwiseAbs().maxCoeff();
}

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return s;
}

Dcm rotvec_to_dcm(const RotVec& phi) {
  require_finite(phi.v, "rotvec_to_dcm");
  const double x = phi.v.norm();
  const double x2 = x * x;
  double a;  // sin(x)/x
  double b;  // (1 - cos(x))/x^2
  if (x < kSmallAngle) {
    a = 1.0 - x2 / 6.0;
    b = 0.5 - x2 / 24.0;
  } else {
    a = std::sin(x) / x;
    b = (1.0 - std::cos(x)) / x2;
  }
  const Mat3 k = skew(phi.v);
  return Dcm::from_matrix(Mat3::Identity() + a * k + b * k * k);
}

RotVec dcm_to_rotvec(const Dcm& c) {
  const Mat3& m = c.matrix();
  const Vec3 w = vee(m);  // 2 sin(theta) n
  const double cos_t = std::clamp((m.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double theta = std::atan2(0.5 * w.norm(), cos_t);

  if (theta < kSmallAngle) {
    return RotVec{0.5 * w * (1.0 + theta * theta / 6.0)};
  }
  if (theta < kPi - 1e-2) {
    return RotVec{0.5 * w * (theta / std::sin(theta))};
  }
  // Near pi the antisymmetric part vanishes; take the axis from the
  // symmetric part (1 - cos) n n^T and fix its sign with w.
  const Mat3 sym = 0.5 * (m + m.transpose()) - cos_t * Mat3::Identity();
  Eigen::Index i = 0;
  sym.diagonal().maxCoeff(&i);
  Vec3 axis = sym.col(i).normalized();
  if (axis.dot(w) < 0.0) axis = -axis;
  return RotVec{theta * axis};
}

Dcm quat_to_dcm(const Quaternion& q) {
  if (std::abs(q.norm() - 1.0) > 1e-6) {
    throw Error(ErrorCode::kInvalidArgument, "quat_to_dcm: quaternion is not unit norm");
  }
  const Quaternion u = Quaternion::normalized(q.s, q.eta);
  const Mat3 m = (u.s * u.s - u.eta.squaredNorm()) * Mat3::Identity() +
                 2.0 * u.eta * u.eta.transpose() + 2.0 * u.s * skew(u.eta);
  return Dcm::from_matrix(m);
}

Quaternion dcm_to_quat(const Dcm& c) {
  // Shepperd: branch on the largest of (trace, diagonal).
  const Mat3& m = c.matrix();
  const double tr = m.trace();
  const double d0 = m(0, 0);
  const double d1 = m(1, 1);
  const double d2 = m(2, 2);
  if (tr >= d0 && tr >= d1 && tr >= d2) {
    const double s4 = 2.0 * std::sqrt(1.0 + tr);
    return Quaternion::normalized(0.25 * s4, vee(m) / s4);
  }
  if (d0 >= d1 && d0 >= d2) {
    const double x4 = 2.0 * std::sqrt(1.0 + 2.0 * d0 - tr);
    return Quaternion::normalized((m(2, 1) - m(1, 2)) / x4,
                                  {0.25 * x4, (m(0, 1) + m(1, 0)) / x4, (m(0, 2) + m(2, 0)) / x4});
  }
  if (d1 >= d2) {
    const double y4 = 2.0 * std::sqrt(1.0 + 2.0 * d1 - tr);
    return Quaternion::normalized((m(0, 2) - m(2, 0)) / y4,
                                  {(m(0, 1) + m(1, 0)) / y4, 0.25 * y4, (m(1, 2) + m(2, 1)) / y4});
  }
  const double z4 = 2.0 * std::sqrt(1.0 + 2.0 * d2 - tr);
  return Quaternion::normalized((m(1, 0) - m(0, 1)) / z4,
                                {(m(0, 2) + m(2, 0)) / z4, (m(1, 2) + m(2, 1)) / z4, 0.25 * z4});
}

Dcm rot_x(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 m;
  m << 1, 0, 0,
       0, c, -s,
       0, s, c;
  return Dcm::from_matrix(m);
}

Dcm rot_y(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 m;
  m << c, 0, s,
       0, 1, 0,
       -s, 0, c;
  return Dcm::from_matrix(m);
}

Dcm rot_z(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 m;
  m << c, -s, 0,
       s, c, 0,
       0, 0, 1;
  return Dcm::from_matrix(m);
}

Dcm euler_to_dcm(const EulerZyx& e) {
  return rot_z(e.yaw) * rot_y(e.pitch) * rot_x(e.roll);
}

EulerZyx dcm_to_euler(const Dcm& c) {
  const double s_pitch = std::clamp(-c(2, 0), -1.0, 1.0);
  return {std::atan2(c(1, 0), c(0, 0)), std::asin(s_pitch), std::atan2(c(2, 1), c(2, 2))};
}

Angle dcm_to_heading(const Dcm& c_nb) {
  if (std::abs(c_nb(2, 0)) > 1.0 - 1e-9) {
    throw Error(ErrorCode::kDegenerateAttitude,
                "dcm_to_heading: pitch at gimbal lock, heading undefined");
  }
  return Angle(std::atan2(c_nb(1, 0), c_nb(0, 0)));
}

Mat3 polar_orthonormalize(const Mat3& m, double tol, int max_iter) {
  if (!m.allFinite() || std::abs(m.determinant()) < 1e-300) {
    throw Error(ErrorCode::kInvalidArgument, "polar_orthonormalize: singular matrix");
  }
  Mat3 x = m;
  for (int i = 0; i < max_iter; ++i) {
    const Mat3 next = 0.5 * (x + x.inverse().transpose());
    const double step = (next - x).cwiseAbs().maxCoeff();
    x = next;
    if (step < tol) break;
  }
  return x;
}

}  // namespace headalign
