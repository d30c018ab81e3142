#include "headalign/mooring_sim.hpp"

#include <cmath>
#include <numbers>

#include "headalign/error.hpp"
#include "headalign/random.hpp"

namespace headalign {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kStandardGravity = 9.80665;
constexpr double kEarthRadius = 6378137.0;

void require(bool ok, const std::string& field, const std::string& why) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, field + ": " + why);
}

void validate_osc(const std::vector<Oscillation>& osc, const std::string& field) {
  for (std::size_t i = 0; i < osc.size(); ++i) {
    const std::string f = field + "[" + std::to_string(i) + "]";
    require(std::isfinite(osc[i].amplitude_deg), f + ".amplitude_deg", "must be finite");
    require(osc[i].period_s > 0.0, f + ".period_s", "must be positive");
    require(std::isfinite(osc[i].phase_rad), f + ".phase_rad", "must be finite");
  }
}

// Value and time derivative of a sum of sinusoids, in radians.
struct Wave {
  double value = 0.0;
  double rate = 0.0;
};

Wave evaluate(const std::vector<Oscillation>& osc, double t) {
  Wave w;
  for (const Oscillation& o : osc) {
    const double omega = 2.0 * std::numbers::pi / o.period_s;
    const double arg = omega * t + o.phase_rad;
    w.value += o.amplitude_deg * kDeg * std::sin(arg);
    w.rate += o.amplitude_deg * kDeg * omega * std::cos(arg);
  }
  return w;
}

}  // namespace

void ScenarioConfig::validate() const {
  require(duration > 0.0 && std::isfinite(duration), "duration", "must be positive");
  require(std::abs(lat) <= std::numbers::pi / 2.0, "lat", "must lie in [-pi/2, pi/2]");
  require(std::isfinite(lon), "lon", "must be finite");
  require(imu_rate > 0, "imu_rate", "must be positive");
  require(aid_rate > 0, "aid_rate", "must be positive");
  require(imu_rate % aid_rate == 0, "imu_rate", "must be an integer multiple of aid_rate");
  validate_osc(heading_osc, "heading_osc");
  validate_osc(roll_osc, "roll_osc");
  validate_osc(pitch_osc, "pitch_osc");
}

std::size_t ScenarioConfig::imu_count() const {
  return static_cast<std::size_t>(std::llround(duration * imu_rate));
}

void SensorSpec::validate() const {
  require(gyro_bias_instability >= 0.0, "gyro_bias_instability", "must be non-negative");
  require(gyro_arw >= 0.0, "gyro_arw", "must be non-negative");
  require(accel_bias >= 0.0, "accel_bias", "must be non-negative");
  require(accel_vrw >= 0.0, "accel_vrw", "must be non-negative");
  require(gnss_heading_sigma >= 0.0, "gnss_heading_sigma", "must be non-negative");
  require(gnss_pos_sigma >= 0.0, "gnss_pos_sigma", "must be non-negative");
}

SensorSpec SensorSpec::marine_grade() {
  SensorSpec s;
  s.gyro_bias_instability = 0.02;
  s.gyro_arw = 0.032;
  s.accel_bias = 1000.0;
  s.accel_vrw = 0.012;
  s.gnss_heading_sigma = 0.09;
  s.gnss_pos_sigma = 0.008;
  return s;
}

double gyro_white_sigma(const SensorSpec& spec, double rate_hz) {
  // deg/sqrt(hr) -> rad/sqrt(s), then scale by sqrt(rate) for a sample PSD.
  return spec.gyro_arw * kDeg / 60.0 * std::sqrt(rate_hz);
}

double accel_white_sigma(const SensorSpec& spec, double rate_hz) {
  return spec.accel_vrw / 60.0 * std::sqrt(rate_hz);
}

double Recording::duration() const {
  if (imu.size() < 2) return 0.0;
  const double dt = imu[1].t - imu[0].t;
  return imu.back().t - imu.front().t + dt;
}

EulerZyx truth_euler(const ScenarioConfig& cfg, double t) {
  return {cfg.psi0.radians() + evaluate(cfg.heading_osc, t).value,
          evaluate(cfg.pitch_osc, t).value, evaluate(cfg.roll_osc, t).value};
}

Vec3 truth_body_rate(const ScenarioConfig& cfg, double t) {
  const Wave yaw = evaluate(cfg.heading_osc, t);
  const Wave pitch = evaluate(cfg.pitch_osc, t);
  const Wave roll = evaluate(cfg.roll_osc, t);
  const double th = pitch.value;
  const double ph = roll.value;

  const Vec3 omega_nb_b{roll.rate - yaw.rate * std::sin(th),
                        pitch.rate * std::cos(ph) + yaw.rate * std::sin(ph) * std::cos(th),
                        -pitch.rate * std::sin(ph) + yaw.rate * std::cos(ph) * std::cos(th)};
  const Dcm c_nb = euler_to_dcm({cfg.psi0.radians() + yaw.value, th, ph});
  return omega_nb_b + c_nb.transpose() * earth_rate_nav(cfg.lat);
}

std::vector<TruthSample> simulate_truth(const ScenarioConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.imu_count();
  std::vector<TruthSample> truth;
  truth.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / cfg.imu_rate;
    truth.push_back({t, truth_euler(cfg, t), truth_body_rate(cfg, t)});
  }
  return truth;
}

Recording synthesize_imu(const std::vector<TruthSample>& truth, const ScenarioConfig& cfg,
                         const SensorSpec& spec, std::uint64_t seed) {
  cfg.validate();
  spec.validate();

  const double rate = cfg.imu_rate;
  const double gyro_sigma = gyro_white_sigma(spec, rate);
  const double accel_sigma = accel_white_sigma(spec, rate);
  const double gyro_bias_bound = spec.gyro_bias_instability * kDeg;
  const double accel_bias_bound = spec.accel_bias * 1e-6 * kStandardGravity;

  std::vector<Rng> gyro_noise;
  std::vector<Rng> accel_noise;
  Vec3 gyro_bias;
  Vec3 accel_bias;
  for (std::uint64_t axis = 0; axis < 3; ++axis) {
    Rng gb = Rng::derive(seed, {hash_name("gyro_bias"), axis});
    Rng ab = Rng::derive(seed, {hash_name("accel_bias"), axis});
    gyro_bias[axis] = gb.uniform(-gyro_bias_bound, gyro_bias_bound);
    accel_bias[axis] = ab.uniform(-accel_bias_bound, accel_bias_bound);
    gyro_noise.push_back(Rng::derive(seed, {hash_name("gyro_noise"), axis}));
    accel_noise.push_back(Rng::derive(seed, {hash_name("accel_noise"), axis}));
  }
  Rng heading_noise = Rng::derive(seed, "gnss_heading");
  Rng lat_noise = Rng::derive(seed, "gnss_lat");
  Rng lon_noise = Rng::derive(seed, "gnss_lon");

  const Vec3 g_n = gravity_nav(cfg.lat);
  const double lat_sigma = spec.gnss_pos_sigma / kEarthRadius;
  const double lon_sigma = spec.gnss_pos_sigma / (kEarthRadius * std::max(std::cos(cfg.lat), 1e-6));
  const std::size_t ratio = static_cast<std::size_t>(cfg.rate_ratio());

  Recording rec;
  rec.meta = {cfg, spec, seed};
  rec.truth = truth;
  rec.imu.reserve(truth.size());
  rec.aid.reserve(truth.size() / ratio + 1);

  for (std::size_t k = 0; k < truth.size(); ++k) {
    const TruthSample& ts = truth[k];
    const Dcm c_nb = euler_to_dcm(ts.euler);

    ImuSample s;
    s.t = ts.t;
    s.f_b = -(c_nb.transpose() * g_n);
    s.omega_ib_b = ts.omega_ib_b;
    for (int axis = 0; axis < 3; ++axis) {
      // Zero-sigma streams are still drawn so that the noise sequence of one
      // sensor never depends on another sensor's configuration.
      s.omega_ib_b[axis] += gyro_bias[axis] + gyro_sigma * gyro_noise[axis].normal();
      s.f_b[axis] += accel_bias[axis] + accel_sigma * accel_noise[axis].normal();
    }
    rec.imu.push_back(s);

    if (k % ratio == 0) {
      NavAidSample a;
      a.t = ts.t;
      a.lat = cfg.lat + lat_sigma * lat_noise.normal();
      a.lon = cfg.lon + lon_sigma * lon_noise.normal();
      a.heading_gt = Angle(ts.euler.yaw + spec.gnss_heading_sigma * kDeg * heading_noise.normal());
      rec.aid.push_back(a);
    }
  }
  return rec;
}

Recording simulate_recording(const ScenarioConfig& cfg, const SensorSpec& spec) {
  return synthesize_imu(simulate_truth(cfg), cfg, spec, cfg.seed);
}

Recording slice_recording(const Recording& rec, double t_begin, double t_end) {
  // Half-sample tolerance keeps index-derived timestamps on the right side.
  const double eps = 1e-6;
  Recording out;
  out.meta = rec.meta;
  for (const ImuSample& s : rec.imu) {
    if (s.t >= t_begin - eps && s.t < t_end - eps) out.imu.push_back(s);
  }
  for (const NavAidSample& a : rec.aid) {
    if (a.t >= t_begin - eps && a.t < t_end - eps) out.aid.push_back(a);
  }
  for (const TruthSample& ts : rec.truth) {
    if (ts.t >= t_begin - eps && ts.t < t_end - eps) out.truth.push_back(ts);
  }
  return out;
}

std::vector<ScenarioConfig> default_scenario_bank(std::uint64_t base_seed) {
  struct Row {
    const char* name;
    double duration;
    double psi0_deg;
    std::vector<Oscillation> heading;
    std::vector<Oscillation> roll;
    std::vector<Oscillation> pitch;
    bool eval;
  };
  const std::vector<Row> rows = {
      {"S1", 560.0, 110.0,
       {{2.0, 40.0, 0.0}, {1.0, 95.0, 1.1}},
       {{1.5, 6.5, 0.3}, {0.6, 11.0, 2.0}},
       {{0.8, 5.2, 1.4}, {0.3, 9.0, 0.2}},
       true},
      {"S2", 600.0, -35.0,
       {{3.0, 60.0, 0.7}, {1.2, 25.0, 2.4}},
       {{2.0, 7.0, 1.0}, {0.5, 13.0, 0.4}},
       {{1.0, 6.0, 0.1}, {0.4, 10.0, 2.8}},
       true},
      {"S3", 600.0, -160.0,
       {{1.5, 30.0, 2.0}, {2.5, 110.0, 0.5}, {0.5, 21.0, 1.7}},
       {{1.2, 5.8, 2.2}, {0.8, 9.5, 1.3}},
       {{0.6, 4.8, 0.9}, {0.5, 8.3, 0.0}},
       true},
      {"S4", 430.0, 60.0,
       {{4.0, 80.0, 1.5}, {1.0, 35.0, 0.2}},
       {{2.5, 7.5, 0.6}, {0.7, 12.5, 2.9}},
       {{1.2, 6.3, 1.8}, {0.4, 11.5, 0.6}},
       true},
      {"S5", 440.0, -100.0,
       {{8.0, 70.0, 0.4}, {5.0, 28.0, 1.9}, {2.0, 120.0, 2.6}},
       {{3.0, 6.8, 1.2}, {1.0, 10.5, 0.8}},
       {{1.5, 5.5, 2.1}, {0.6, 9.8, 1.0}},
       false},
  };

  std::vector<ScenarioConfig> bank;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    ScenarioConfig cfg;
    cfg.name = r.name;
    cfg.duration = r.duration;
    cfg.lat = 32.5 * kDeg;
    cfg.lon = 34.95 * kDeg;
    cfg.psi0 = Angle::from_degrees(r.psi0_deg);
    cfg.heading_osc = r.heading;
    cfg.roll_osc = r.roll;
    cfg.pitch_osc = r.pitch;
    cfg.seed = base_seed * 1000 + i + 1;
    cfg.eval = r.eval;
    bank.push_back(cfg);
  }
  return bank;
}

}  // namespace headalign
