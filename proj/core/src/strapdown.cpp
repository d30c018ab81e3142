#include "headalign/strapdown.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "headalign/error.hpp"

namespace headalign {
namespace {

constexpr double kMaxPairSkew = 0.010;

void check_latitude(double lat, const char* who) {
  if (!std::isfinite(lat) || std::abs(lat) > std::numbers::pi / 2.0) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(who) + ": latitude outside [-pi/2, pi/2]");
  }
}

}  // namespace

Vec3 earth_rate_nav(double lat) {
  check_latitude(lat, "earth_rate_nav");
  return {kEarthRate * std::cos(lat), 0.0, -kEarthRate * std::sin(lat)};
}

Vec3 gravity_nav(double lat) {
  check_latitude(lat, "gravity_nav");
  const double s2 = std::sin(lat) * std::sin(lat);
  const double g = 9.7803253359 * (1.0 + 0.00193185265241 * s2) /
                   std::sqrt(1.0 - 0.00669437999013 * s2);
  return {0.0, 0.0, g};
}

Vec3 NavRateModel::omega_in_n(double lat) const {
  return earth_rate_nav(lat) * (earth_rate / kEarthRate);
}

Vec3 NavRateModel::g_n(double lat) const { return gravity_nav(lat); }

std::vector<Dcm> integrate_body_frame(std::span<const ImuSample> samples,
                                      int renorm_interval) {
  if (samples.size() < 2) {
    throw Error(ErrorCode::kInsufficientData,
                "integrate_body_frame: need at least 2 IMU samples");
  }
  std::vector<Dcm> out;
  out.reserve(samples.size());
  out.push_back(Dcm::identity());

  Dcm c = Dcm::identity();
  Vec3 prev_increment = Vec3::Zero();
  for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
    const double dt = samples[k + 1].t - samples[k].t;
    if (!(dt > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "integrate_body_frame: timestamps not strictly increasing at sample " +
                      std::to_string(k + 1));
    }
    const Vec3 increment = 0.5 * (samples[k].omega_ib_b + samples[k + 1].omega_ib_b) * dt;
    const Vec3 dphi = increment + prev_increment.cross(increment) / 12.0;
    prev_increment = increment;

    c = c * rotvec_to_dcm(RotVec{dphi});
    if (renorm_interval > 0 && (k + 1) % static_cast<std::size_t>(renorm_interval) == 0) {
      c = c.renormalized();
    }
    out.push_back(c);
  }
  return out;
}

std::vector<Dcm> integrate_nav_frame(std::span<const NavAidSample> aid,
                                     const NavRateModel& model) {
  if (aid.size() < 2) {
    throw Error(ErrorCode::kInsufficientData,
                "integrate_nav_frame: need at least 2 aiding samples");
  }
  std::vector<Dcm> out;
  out.reserve(aid.size());
  out.push_back(Dcm::identity());

  Dcm c = Dcm::identity();
  Vec3 w_prev = model.omega_in_n(aid[0].lat);
  for (std::size_t k = 0; k + 1 < aid.size(); ++k) {
    const double dt = aid[k + 1].t - aid[k].t;
    if (!(dt > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "integrate_nav_frame: timestamps not strictly increasing at sample " +
                      std::to_string(k + 1));
    }
    const Vec3 w_next = model.omega_in_n(aid[k + 1].lat);
    c = c * rotvec_to_dcm(RotVec{0.5 * (w_prev + w_next) * dt});
    w_prev = w_next;
    out.push_back(c);
  }
  return out;
}

FrameTracks build_frame_tracks(std::span<const ImuSample> imu,
                               std::span<const NavAidSample> aid,
                               const NavRateModel& model) {
  return {integrate_body_frame(imu), integrate_nav_frame(aid, model)};
}

std::vector<std::size_t> pair_aid_to_imu(std::span<const ImuSample> imu,
                                         std::span<const NavAidSample> aid) {
  if (imu.empty() || aid.empty()) {
    throw Error(ErrorCode::kInsufficientData, "pair_aid_to_imu: empty stream");
  }
  if (std::abs(imu.front().t - aid.front().t) > kMaxPairSkew ||
      aid.back().t > imu.back().t + kMaxPairSkew) {
    throw Error(ErrorCode::kAlignmentWindow,
                "observation window: IMU and aiding time ranges do not match");
  }
  std::vector<std::size_t> idx;
  idx.reserve(aid.size());
  for (const NavAidSample& a : aid) {
    auto it = std::upper_bound(imu.begin(), imu.end(), a.t + 1e-9,
                               [](double t, const ImuSample& s) { return t < s.t; });
    const std::size_t i = it == imu.begin() ? 0 : static_cast<std::size_t>(it - imu.begin()) - 1;
    if (std::abs(imu[i].t - a.t) > kMaxPairSkew) {
      throw Error(ErrorCode::kAlignmentWindow,
                  "observation window: no IMU sample within 10 ms of aiding time " +
                      std::to_string(a.t));
    }
    idx.push_back(i);
  }
  return idx;
}

namespace {

void check_tracks(std::span<const ImuSample> imu, std::span<const NavAidSample> aid,
                  const FrameTracks& tracks) {
  if (tracks.body.size() != imu.size() || tracks.nav.size() != aid.size()) {
    throw Error(ErrorCode::kAlignmentWindow,
                "observation window: frame tracks do not cover the sample streams");
  }
}

}  // namespace

ObservationSeries observation_integrated(std::span<const ImuSample> imu,
                                         std::span<const NavAidSample> aid,
                                         const NavRateModel& model,
                                         const FrameTracks& tracks) {
  check_tracks(imu, aid, tracks);
  const std::vector<std::size_t> idx = pair_aid_to_imu(imu, aid);
  const Vec3 g = model.g_n(aid.front().lat);

  // Cumulative body-side integral at the IMU rate.
  std::vector<Vec3> body(imu.size());
  body[0] = Vec3::Zero();
  Vec3 v_prev = -(tracks.body[0] * imu[0].f_b);
  for (std::size_t k = 1; k < imu.size(); ++k) {
    const Vec3 v = -(tracks.body[k] * imu[k].f_b);
    body[k] = body[k - 1] + 0.5 * (v_prev + v) * (imu[k].t - imu[k - 1].t);
    v_prev = v;
  }

  ObservationSeries out;
  out.form = ObservationForm::kIntegrated;
  out.times.reserve(aid.size());
  out.u_b0.reserve(aid.size());
  out.u_n0.reserve(aid.size());

  Vec3 nav_sum = Vec3::Zero();
  Vec3 w_prev = tracks.nav[0] * g;
  for (std::size_t j = 0; j < aid.size(); ++j) {
    if (j > 0) {
      const Vec3 w = tracks.nav[j] * g;
      nav_sum += 0.5 * (w_prev + w) * (aid[j].t - aid[j - 1].t);
      w_prev = w;
    }
    out.times.push_back(aid[j].t);
    out.u_b0.push_back(body[idx[j]]);
    out.u_n0.push_back(nav_sum);
  }
  return out;
}

ObservationSeries observation_instantaneous(std::span<const ImuSample> imu,
                                            std::span<const NavAidSample> aid,
                                            const NavRateModel& model,
                                            const FrameTracks& tracks) {
  check_tracks(imu, aid, tracks);
  const std::vector<std::size_t> idx = pair_aid_to_imu(imu, aid);
  const Vec3 g = model.g_n(aid.front().lat);

  ObservationSeries out;
  out.form = ObservationForm::kInstantaneous;
  out.times.reserve(aid.size());
  out.u_b0.reserve(aid.size());
  out.u_n0.reserve(aid.size());
  for (std::size_t j = 0; j < aid.size(); ++j) {
    out.times.push_back(aid[j].t);
    out.u_b0.push_back(-(tracks.body[idx[j]] * imu[idx[j]].f_b));
    out.u_n0.push_back(tracks.nav[j] * g);
  }
  return out;
}

}  // namespace headalign
