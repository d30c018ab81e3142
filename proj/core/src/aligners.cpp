#include "headalign/aligners.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <array>
#include <cmath>

#include "headalign/error.hpp"

namespace headalign {
namespace {

const double kMinPairSin = std::sin(1e-5);

Vec3 unit_or_throw(const Vec3& v, const char* label) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorCode::kDegenerateGeometry,
                std::string("dva_solve: observation vector ") + label + " is zero");
  }
  return v / n;
}

}  // namespace

std::string_view method_name(AlignMethod m) {
  switch (m) {
    case AlignMethod::kIDva: return "I-DVA";
    case AlignMethod::kADva: return "A-DVA";
    case AlignMethod::kIOba: return "I-OBA";
    case AlignMethod::kAOba: return "A-OBA";
  }
  return "?";
}

AlignMethod parse_method(std::string_view name) {
  for (const AlignMethod m : kAllMethods) {
    if (method_name(m) == name) return m;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown alignment method '" + std::string(name) + "'");
}

ObservationForm observation_form(AlignMethod m) {
  return (m == AlignMethod::kIDva || m == AlignMethod::kIOba) ? ObservationForm::kIntegrated
                                                               : ObservationForm::kInstantaneous;
}

bool is_dva(AlignMethod m) { return m == AlignMethod::kIDva || m == AlignMethod::kADva; }

Mat4 quat_left_matrix(const Vec3& u) {
  Mat4 h = Mat4::Zero();
  h.block<1, 3>(0, 1) = -u.transpose();
  h.block<3, 1>(1, 0) = u;
  h.block<3, 3>(1, 1) = skew(u);
  return h;
}

Mat4 quat_right_matrix(const Vec3& u) {
  Mat4 h = Mat4::Zero();
  h.block<1, 3>(0, 1) = -u.transpose();
  h.block<3, 1>(1, 0) = u;
  h.block<3, 3>(1, 1) = -skew(u);
  return h;
}

Dcm dva_solve(const Vec3& u1_n0, const Vec3& u2_n0, const Vec3& u1_b0, const Vec3& u2_b0) {
  const Vec3 a1 = unit_or_throw(u1_n0, "u1_n0");
  const Vec3 a2 = unit_or_throw(u2_n0, "u2_n0");
  const Vec3 b1 = unit_or_throw(u1_b0, "u1_b0");
  const Vec3 b2 = unit_or_throw(u2_b0, "u2_b0");

  const Vec3 a3 = a1.cross(a2);
  const Vec3 b3 = b1.cross(b2);
  if (a3.norm() <= kMinPairSin) {
    throw Error(ErrorCode::kDegenerateGeometry,
                "dva_solve: n0-frame pair (u1_n0, u2_n0) is collinear");
  }
  if (b3.norm() <= kMinPairSin) {
    throw Error(ErrorCode::kDegenerateGeometry,
                "dva_solve: b0-frame pair (u1_b0, u2_b0) is collinear");
  }

  Mat3 mn;
  mn.row(0) = a1.transpose();
  mn.row(1) = a2.transpose();
  mn.row(2) = a3.transpose();
  Mat3 mb;
  mb.row(0) = b1.transpose();
  mb.row(1) = b2.transpose();
  mb.row(2) = b3.transpose();

  const Eigen::FullPivLU<Mat3> lu(mn);
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::kDegenerateGeometry, "dva_solve: n0-frame triad is singular");
  }
  return Dcm::nearest(lu.solve(mb));
}

SymmetricEigen jacobi_eigen(const Mat4& input, double tol, int max_sweeps) {
  Mat4 a = 0.5 * (input + input.transpose());
  Mat4 v = Mat4::Identity();
  const double scale = std::max(1.0, a.norm());

  auto off_norm = [](const Mat4& m) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (i != j) s += m(i, j) * m(i, j);
    return std::sqrt(s);
  };

  int sweep = 0;
  for (; sweep < max_sweeps && off_norm(a) > tol * scale; ++sweep) {
    for (int p = 0; p < 3; ++p) {
      for (int q = p + 1; q < 4; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::hypot(t, 1.0);
        const double s = t * c;

        for (int k = 0; k < 4; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < 4; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (int k = 0; k < 4; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::array<int, 4> order{0, 1, 2, 3};
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) < a(j, j); });
  SymmetricEigen out;
  out.sweeps = sweep;
  for (int i = 0; i < 4; ++i) {
    out.values[i] = a(order[i], order[i]);
    out.vectors.col(i) = v.col(order[i]);
  }
  return out;
}

void WahbaAccumulator::accumulate(const Vec3& u_n0, const Vec3& u_b0) {
  const double nn = u_n0.norm();
  const double nb = u_b0.norm();
  if (!(nn > 0.0) || !(nb > 0.0) || !std::isfinite(nn) || !std::isfinite(nb)) {
    ++skipped_;
    return;
  }
  const Mat4 m = quat_left_matrix(u_n0 / nn) - quat_right_matrix(u_b0 / nb);
  k_ += m.transpose() * m;
  ++count_;
}

WahbaSolution oba_solve(const WahbaAccumulator& acc, double gap_tol) {
  if (acc.count() < 2) {
    throw Error(ErrorCode::kInsufficientData, "oba_solve: need at least 2 observation pairs");
  }
  const SymmetricEigen eig = jacobi_eigen(acc.k());
  if (eig.values[1] - eig.values[0] < gap_tol) {
    throw Error(ErrorCode::kAmbiguousAttitude,
                "oba_solve: smallest eigenvalue is not isolated; geometry cannot fix the attitude");
  }
  const Vec4 q = eig.vectors.col(0);
  WahbaSolution sol;
  sol.q = Quaternion::normalized(q[0], q.tail<3>());
  sol.c_n0_b0 = quat_to_dcm(sol.q);
  sol.eigenvalues = eig.values;
  return sol;
}

HeadingEstimate HeadingEstimate::make(std::string method, double t_align, Angle psi_hat,
                                      Angle psi_gt) {
  HeadingEstimate e;
  e.method = std::move(method);
  e.t_align = t_align;
  e.psi_hat = psi_hat;
  e.psi_gt = psi_gt;
  e.ae_deg = std::abs(angle_diff(psi_hat, psi_gt).degrees());
  return e;
}

HeadingEstimate align_window(std::span<const ImuSample> imu, std::span<const NavAidSample> aid,
                             AlignMethod method, const AlignOptions& options) {
  if (imu.size() < 2 || aid.size() < 2) {
    throw Error(ErrorCode::kInsufficientData, "align_window: window holds fewer than 2 samples");
  }
  const FrameTracks tracks = build_frame_tracks(imu, aid, options.nav);
  const ObservationSeries obs =
      observation_form(method) == ObservationForm::kIntegrated
          ? observation_integrated(imu, aid, options.nav, tracks)
          : observation_instantaneous(imu, aid, options.nav, tracks);

  Dcm c_n0_b0;
  const std::size_t last = obs.size() - 1;
  if (is_dva(method)) {
    auto pick = [&](double fraction) {
      const auto j = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(last)));
      return std::clamp<std::size_t>(j, 1, last);
    };
    const std::size_t j1 = pick(options.dva_first_fraction);
    const std::size_t j2 = pick(options.dva_second_fraction);
    if (j1 == j2) {
      throw Error(ErrorCode::kInsufficientData,
                  "align_window: DVA instants coincide; window too short");
    }
    c_n0_b0 = dva_solve(obs.u_n0[j1], obs.u_n0[j2], obs.u_b0[j1], obs.u_b0[j2]);
  } else {
    WahbaAccumulator acc;
    for (std::size_t j = 0; j < obs.size(); ++j) acc.accumulate(obs.u_n0[j], obs.u_b0[j]);
    c_n0_b0 = oba_solve(acc).c_n0_b0;
  }

  const std::vector<std::size_t> idx = pair_aid_to_imu(imu, aid);
  const Dcm c_nb = tracks.nav[last].transpose() * c_n0_b0 * tracks.body[idx[last]];
  const double dt = imu[1].t - imu[0].t;
  const double t_align = imu.back().t - imu.front().t + dt;
  return HeadingEstimate::make(std::string(method_name(method)), t_align, dcm_to_heading(c_nb),
                               aid[last].heading_gt);
}

WindowSpans window_spans(const Recording& rec, double t_begin, double length) {
  const double eps = 1e-6;
  if (rec.imu.empty() || rec.aid.empty()) {
    throw Error(ErrorCode::kInsufficientData, "window: recording is empty");
  }
  const double rec_end = rec.imu.front().t + rec.duration();
  if (t_begin < rec.imu.front().t - eps || t_begin + length > rec_end + eps) {
    throw Error(ErrorCode::kInsufficientData,
                "window [" + std::to_string(t_begin) + ", " + std::to_string(t_begin + length) +
                    ") exceeds recording '" + rec.name() + "'");
  }
  auto imu_lo = std::lower_bound(rec.imu.begin(), rec.imu.end(), t_begin - eps,
                                 [](const ImuSample& s, double t) { return s.t < t; });
  auto imu_hi = std::lower_bound(imu_lo, rec.imu.end(), t_begin + length - eps,
                                 [](const ImuSample& s, double t) { return s.t < t; });
  auto aid_lo = std::lower_bound(rec.aid.begin(), rec.aid.end(), t_begin - eps,
                                 [](const NavAidSample& s, double t) { return s.t < t; });
  auto aid_hi = std::lower_bound(aid_lo, rec.aid.end(), t_begin + length - eps,
                                 [](const NavAidSample& s, double t) { return s.t < t; });
  return {std::span<const ImuSample>(imu_lo, imu_hi),
          std::span<const NavAidSample>(aid_lo, aid_hi)};
}

HeadingEstimate align_heading(const Recording& rec, AlignMethod method, double t_align,
                              const AlignOptions& options, double t_start) {
  if (t_align < 2.0) {
    throw Error(ErrorCode::kInvalidArgument, "align_heading: t_align must be at least 2 s");
  }
  const WindowSpans w = window_spans(rec, rec.imu.empty() ? 0.0 : rec.imu.front().t + t_start,
                                     t_align);
  return align_window(w.imu, w.aid, method, options);
}

}  // namespace headalign
