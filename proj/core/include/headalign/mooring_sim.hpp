// Synthetic moored-vessel recordings: analytic ground-truth attitude plus
// IMU and aiding measurements with a configurable sensor error model.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "headalign/attitude.hpp"
#include "headalign/strapdown.hpp"

namespace headalign {

/// One sinusoidal component: amplitude * sin(2 pi t / period + phase).
struct Oscillation {
  double amplitude_deg = 0.0;
  double period_s = 1.0;
  double phase_rad = 0.0;

  bool operator==(const Oscillation&) const = default;
};

struct ScenarioConfig {
  std::string name = "scenario";
  double duration = 120.0;  ///< [s]
  double lat = 0.0;         ///< [rad]
  double lon = 0.0;         ///< [rad]
  Angle psi0;               ///< mean heading
  std::vector<Oscillation> heading_osc;
  std::vector<Oscillation> roll_osc;
  std::vector<Oscillation> pitch_osc;
  int imu_rate = 100;  ///< [Hz]
  int aid_rate = 5;    ///< [Hz]
  std::uint64_t seed = 0;
  bool eval = true;  ///< false for train-only scenarios

  /// Throws invalid-argument naming the offending field.
  void validate() const;
  int rate_ratio() const { return imu_rate / aid_rate; }
  std::size_t imu_count() const;

  bool operator==(const ScenarioConfig&) const = default;
};

/// Sensor error magnitudes, in datasheet units.
struct SensorSpec {
  double gyro_bias_instability = 0.0;  ///< [deg/s]
  double gyro_arw = 0.0;               ///< [deg/sqrt(hr)]
  double accel_bias = 0.0;             ///< [micro-g]
  double accel_vrw = 0.0;              ///< [m/s/sqrt(hr)]
  double gnss_heading_sigma = 0.0;     ///< [deg]
  double gnss_pos_sigma = 0.0;         ///< [m]

  void validate() const;

  static SensorSpec noise_free() { return {}; }
  /// The surface-vessel IMU / GNSS-RTK grade used for the default bank.
  static SensorSpec marine_grade();

  bool operator==(const SensorSpec&) const = default;
};

/// Per-sample white-noise standard deviations implied by a SensorSpec.
double gyro_white_sigma(const SensorSpec& spec, double rate_hz);   ///< [rad/s]
double accel_white_sigma(const SensorSpec& spec, double rate_hz);  ///< [m/s^2]

struct TruthSample {
  double t = 0.0;
  EulerZyx euler;
  Vec3 omega_ib_b = Vec3::Zero();  ///< exact body rate [rad/s]

  bool operator==(const TruthSample&) const = default;
};

struct RecordingMeta {
  ScenarioConfig scenario;
  SensorSpec sensors;
  std::uint64_t seed = 0;

  bool operator==(const RecordingMeta&) const = default;
};

struct Recording {
  std::vector<ImuSample> imu;
  std::vector<NavAidSample> aid;
  std::vector<TruthSample> truth;
  RecordingMeta meta;

  const std::string& name() const { return meta.scenario.name; }
  /// Span covered by the IMU stream, counting the last sample period.
  double duration() const;

  bool operator==(const Recording&) const = default;
};

/// Euler angles at time t (sums of the configured sinusoids).
EulerZyx truth_euler(const ScenarioConfig& cfg, double t);
/// Analytic body rate: E(angles) * euler_rates + C^b_n * w_ie^n.
Vec3 truth_body_rate(const ScenarioConfig& cfg, double t);

/// Ground-truth attitude track at the IMU rate.
std::vector<TruthSample> simulate_truth(const ScenarioConfig& cfg);

/// Measurements from a truth track. All randomness comes from streams
/// derived from `seed`, one per sensor axis.
Recording synthesize_imu(const std::vector<TruthSample>& truth, const ScenarioConfig& cfg,
                         const SensorSpec& spec, std::uint64_t seed);

/// simulate_truth + synthesize_imu with the scenario's own seed.
Recording simulate_recording(const ScenarioConfig& cfg, const SensorSpec& spec);

/// Samples with t in [t_begin, t_end), times kept absolute.
Recording slice_recording(const Recording& rec, double t_begin, double t_end);

/// Five named mooring scenarios S1..S5; S5 has the largest heading variance
/// and is train-only.
std::vector<ScenarioConfig> default_scenario_bank(std::uint64_t base_seed = 1);

}  // namespace headalign
