// Reference models, frame-tracking integration and observation vectors for
// attitude-decomposition alignment:
//
//   C^n_b(t) = C^n_{n0}(t) * C^{n0}_{b0} * C^{b0}_b(t)
//
// C^{b0}_b is integrated from gyro rates, C^{n0}_n from the navigation-frame
// rate; the observation pairs then satisfy u^{b0}(t) = C^{b0}_{n0} u^{n0}(t).
#pragma once

#include <span>
#include <vector>

#include "headalign/attitude.hpp"

namespace headalign {

/// WGS-84 Earth rotation rate [rad/s].
inline constexpr double kEarthRate = 7.292115e-5;

struct ImuSample {
  double t = 0.0;                        ///< [s] since recording start
  Vec3 omega_ib_b = Vec3::Zero();        ///< gyro [rad/s]
  Vec3 f_b = Vec3::Zero();               ///< specific force [m/s^2]

  bool operator==(const ImuSample&) const = default;
};

struct NavAidSample {
  double t = 0.0;    ///< [s]
  double lat = 0.0;  ///< [rad]
  double lon = 0.0;  ///< [rad]
  Angle heading_gt;  ///< reference heading label

  bool operator==(const NavAidSample&) const = default;
};

/// Earth rate resolved in NED: [W cos(lat), 0, -W sin(lat)].
Vec3 earth_rate_nav(double lat);
/// Somigliana normal gravity, Down-positive: [0, 0, g(lat)].
Vec3 gravity_nav(double lat);

/// Quasi-stationary navigation-frame model: the transport rate is the Earth
/// rate (no craft-rate term). `earth_rate` is exposed so tests can switch the
/// nav-frame rotation off.
struct NavRateModel {
  double earth_rate = kEarthRate;

  Vec3 omega_in_n(double lat) const;
  Vec3 g_n(double lat) const;
};

/// C^{b0}_b at every IMU sample; first element is identity.
///
/// Per step, dphi_k = (w_k + w_{k+1})/2 * dt + (dphi_{k-1} x dphi_k)/12, where
/// the coning term uses the uncorrected increments. The chain is
/// re-orthonormalized every `renorm_interval` steps.
std::vector<Dcm> integrate_body_frame(std::span<const ImuSample> samples,
                                      int renorm_interval = 1000);

/// C^{n0}_n at every aiding sample (trapezoidal rate averaging, no coning).
std::vector<Dcm> integrate_nav_frame(std::span<const NavAidSample> aid,
                                     const NavRateModel& model = {});

struct FrameTracks {
  std::vector<Dcm> body;  ///< C^{b0}_b, one per IMU sample
  std::vector<Dcm> nav;   ///< C^{n0}_n, one per aiding sample
};

FrameTracks build_frame_tracks(std::span<const ImuSample> imu,
                               std::span<const NavAidSample> aid,
                               const NavRateModel& model = {});

enum class ObservationForm { kIntegrated, kInstantaneous };

/// Paired observation vectors at the aiding timestamps.
struct ObservationSeries {
  std::vector<double> times;
  std::vector<Vec3> u_b0;
  std::vector<Vec3> u_n0;
  ObservationForm form = ObservationForm::kIntegrated;

  std::size_t size() const { return times.size(); }
};

/// For every aiding sample, the index of the nearest preceding IMU sample.
/// Throws alignment-window when the skew exceeds 10 ms or the ranges differ.
std::vector<std::size_t> pair_aid_to_imu(std::span<const ImuSample> imu,
                                         std::span<const NavAidSample> aid);

/// u^{b0}(t) = -int C^{b0}_b f^b, u^{n0}(t) = int C^{n0}_n g^n (trapezoidal,
/// body side at the IMU rate, nav side at the aiding rate). Units m/s.
ObservationSeries observation_integrated(std::span<const ImuSample> imu,
                                         std::span<const NavAidSample> aid,
                                         const NavRateModel& model,
                                         const FrameTracks& tracks);

/// u^{b0}(t) = -C^{b0}_b f^b, u^{n0}(t) = C^{n0}_n g^n. Units m/s^2.
ObservationSeries observation_instantaneous(std::span<const ImuSample> imu,
                                            std::span<const NavAidSample> aid,
                                            const NavRateModel& model,
                                            const FrameTracks& tracks);

}  // namespace headalign
