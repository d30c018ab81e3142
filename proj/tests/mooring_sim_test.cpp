#include "headalign/mooring_sim.hpp"

#include <gtest/gtest.h>

#include <numbers>

#include "headalign/aligners.hpp"
#include "headalign/error.hpp"

namespace headalign {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

ScenarioConfig swaying(double duration = 60.0) {
  ScenarioConfig cfg;
  cfg.name = "sway";
  cfg.duration = duration;
  cfg.lat = 32.5 * kDeg;
  cfg.lon = 34.95 * kDeg;
  cfg.psi0 = Angle::from_degrees(60);
  cfg.heading_osc = {{2.0, 40.0, 0.0}, {1.0, 75.0, 0.4}};
  cfg.roll_osc = {{3.0, 8.0, 0.2}, {1.0, 21.0, 1.0}};
  cfg.pitch_osc = {{1.0, 6.5, 2.0}};
  cfg.seed = 5;
  return cfg;
}

ScenarioConfig still(double duration) {
  ScenarioConfig cfg;
  cfg.name = "still";
  cfg.duration = duration;
  cfg.lat = 32.5 * kDeg;
  cfg.seed = 9;
  return cfg;
}

TEST(ScenarioConfig, Validation) {
  EXPECT_NO_THROW(swaying().validate());
  auto expect_field = [](ScenarioConfig cfg, const std::string& field) {
    try {
      cfg.validate();
      FAIL() << field;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
    }
  };
  auto cfg = swaying();
  cfg.duration = 0.0;
  expect_field(cfg, "duration");
  cfg = swaying();
  cfg.aid_rate = 7;
  expect_field(cfg, "aid_rate");
  cfg = swaying();
  cfg.imu_rate = -100;
  expect_field(cfg, "imu_rate");
  cfg = swaying();
  cfg.lat = 2.0;
  expect_field(cfg, "lat");
}

TEST(SensorSpec, Validation) {
  EXPECT_NO_THROW(SensorSpec::marine_grade().validate());
  SensorSpec s;
  s.gyro_arw = -1.0;
  EXPECT_THROW(s.validate(), Error);
}

TEST(SimulateTruth, ZeroAmplitudeIsEarthRateOnly) {
  auto cfg = still(2.0);
  cfg.psi0 = Angle::from_degrees(30);
  const auto truth = simulate_truth(cfg);
  ASSERT_EQ(truth.size(), 200u);
  const Dcm c_nb = rot_z(30 * kDeg);
  const Vec3 expected = c_nb.transpose() * earth_rate_nav(cfg.lat);
  for (const TruthSample& s : truth) {
    EXPECT_NEAR(s.euler.yaw, 30 * kDeg, 1e-15);
    EXPECT_EQ(s.euler.pitch, 0.0);
    EXPECT_LT((s.omega_ib_b - expected).norm(), 1e-18);
  }
}

TEST(SimulateTruth, HeadingIsSumOfSinusoids) {
  ScenarioConfig cfg = still(50.0);
  cfg.psi0 = Angle::from_degrees(10);
  cfg.heading_osc = {{2.0, 40.0, 0.0}};
  for (const double t : {0.0, 3.3, 10.0, 27.71}) {
    EXPECT_NEAR(truth_euler(cfg, t).yaw, (10.0 + 2.0 * std::sin(2 * kPi * t / 40.0)) * kDeg, 1e-15);
  }
}

TEST(SimulateTruth, FiniteDifferenceReproducesBodyRate) {
  const ScenarioConfig cfg = swaying();
  const auto truth = simulate_truth(cfg);
  const double dt = 1.0 / cfg.imu_rate;
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < truth.size(); ++k) {
    // Central difference of the attitude track: relative rotation across two
    // samples over 2 dt, plus the Earth rate seen in body axes.
    const Dcm before = euler_to_dcm(truth[k - 1].euler);
    const Dcm after = euler_to_dcm(truth[k + 1].euler);
    const Dcm now = euler_to_dcm(truth[k].euler);
    const Vec3 omega_nb = dcm_to_rotvec(before.transpose() * after).v / (2.0 * dt);
    const Vec3 omega_ib = omega_nb + now.transpose() * earth_rate_nav(cfg.lat);
    worst = std::max(worst, (omega_ib - truth[k].omega_ib_b).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(SynthesizeImu, NoiseFreeClosure) {
  const ScenarioConfig cfg = swaying(20.0);
  const auto rec = simulate_recording(cfg, SensorSpec::noise_free());
  ASSERT_EQ(rec.imu.size(), rec.truth.size());
  ASSERT_EQ(rec.aid.size(), 100u);
  const Vec3 g = gravity_nav(cfg.lat);
  for (std::size_t k = 0; k < rec.imu.size(); ++k) {
    const Dcm c_bn = euler_to_dcm(rec.truth[k].euler).transpose();
    EXPECT_EQ(rec.imu[k].f_b, -(c_bn * g));
    EXPECT_EQ(rec.imu[k].omega_ib_b, rec.truth[k].omega_ib_b);
  }
  for (std::size_t j = 0; j < rec.aid.size(); ++j) {
    EXPECT_EQ(rec.aid[j].t, rec.imu[j * 20].t);
    EXPECT_EQ(rec.aid[j].heading_gt, Angle(rec.truth[j * 20].euler.yaw));
    EXPECT_EQ(rec.aid[j].lat, cfg.lat);
  }
}

TEST(SynthesizeImu, LevelSpecificForceNormIsGravity) {
  const auto rec = simulate_recording(still(1.0), SensorSpec::noise_free());
  for (const ImuSample& s : rec.imu) EXPECT_NEAR(s.f_b.norm(), gravity_nav(32.5 * kDeg).z(), 1e-14);
}

TEST(SynthesizeImu, WhiteNoiseSigmaConversion) {
  SensorSpec s;
  s.gyro_arw = 0.032;
  s.accel_vrw = 0.012;
  EXPECT_NEAR(gyro_white_sigma(s, 100.0) / kDeg, 0.032 / 60.0 * 10.0, 1e-15);
  EXPECT_NEAR(gyro_white_sigma(s, 100.0) / kDeg, 5.33e-3, 1e-5);
  EXPECT_NEAR(accel_white_sigma(s, 100.0), 0.012 / 60.0 * 10.0, 1e-15);
}

class GyroNoiseCalibration : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    SensorSpec spec;
    spec.gyro_arw = 0.032;
    rec_ = new Recording(simulate_recording(still(10000.0), spec));
  }
  static void TearDownTestSuite() { delete rec_; }
  static Recording* rec_;
};
Recording* GyroNoiseCalibration::rec_ = nullptr;

TEST_F(GyroNoiseCalibration, SampleVarianceMatchesArw) {
  const double sigma = 0.032 / 60.0 * 10.0 * kDeg;
  ASSERT_EQ(rec_->imu.size(), 1000000u);
  for (int axis = 0; axis < 3; ++axis) {
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t k = 0; k < rec_->imu.size(); ++k) {
      const double e = rec_->imu[k].omega_ib_b[axis] - rec_->truth[k].omega_ib_b[axis];
      sum += e;
      sum2 += e * e;
    }
    const double n = static_cast<double>(rec_->imu.size());
    const double var = (sum2 - sum * sum / n) / (n - 1.0);
    EXPECT_NEAR(var / (sigma * sigma), 1.0, 0.02) << "axis " << axis;
  }
}

TEST_F(GyroNoiseCalibration, AllanDeviationAtOneSecondMatchesArw) {
  // For white rate noise the Allan deviation at tau is ARW / sqrt(tau).
  const double arw = 0.032 / 60.0 * kDeg;  // rad/sqrt(s)
  const std::size_t m = 100;                // tau = 1 s
  for (int axis = 0; axis < 3; ++axis) {
    std::vector<double> means;
    for (std::size_t c = 0; c + m <= rec_->imu.size(); c += m) {
      double s = 0.0;
      for (std::size_t k = c; k < c + m; ++k) {
        s += rec_->imu[k].omega_ib_b[axis] - rec_->truth[k].omega_ib_b[axis];
      }
      means.push_back(s / m);
    }
    double avar = 0.0;
    for (std::size_t i = 1; i < means.size(); ++i) {
      avar += (means[i] - means[i - 1]) * (means[i] - means[i - 1]);
    }
    avar /= 2.0 * static_cast<double>(means.size() - 1);
    EXPECT_NEAR(std::sqrt(avar) / arw, 1.0, 0.05) << "axis " << axis;
  }
}

TEST(SynthesizeImu, BiasStaysWithinBound) {
  SensorSpec spec;
  spec.gyro_bias_instability = 0.02;
  spec.accel_bias = 1000.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto cfg = still(0.1);
    cfg.seed = seed;
    const auto rec = simulate_recording(cfg, spec);
    const Vec3 gyro_err = rec.imu[3].omega_ib_b - rec.truth[3].omega_ib_b;
    const Vec3 accel_err = rec.imu[3].f_b + euler_to_dcm(rec.truth[3].euler).transpose() *
                                                gravity_nav(cfg.lat);
    EXPECT_LE(gyro_err.cwiseAbs().maxCoeff(), 0.02 * kDeg);
    EXPECT_LE(accel_err.cwiseAbs().maxCoeff(), 1000e-6 * 9.80665 + 1e-12);
    // Constant per run: identical error at every sample.
    EXPECT_LT((rec.imu[7].omega_ib_b - rec.truth[7].omega_ib_b - gyro_err).norm(), 1e-18);
  }
}

TEST(SynthesizeImu, DeterministicPerSeed) {
  const auto a = simulate_recording(swaying(10.0), SensorSpec::marine_grade());
  const auto b = simulate_recording(swaying(10.0), SensorSpec::marine_grade());
  EXPECT_TRUE(a == b);
  auto cfg = swaying(10.0);
  cfg.seed = 6;
  EXPECT_FALSE(a.imu == simulate_recording(cfg, SensorSpec::marine_grade()).imu);
}

TEST(SynthesizeImu, HeadingLabelNoise) {
  SensorSpec spec;
  spec.gnss_heading_sigma = 0.09;
  const auto rec = simulate_recording(still(2000.0), spec);
  double sum2 = 0.0;
  for (std::size_t j = 0; j < rec.aid.size(); ++j) {
    const double e = angle_diff(rec.aid[j].heading_gt, Angle(rec.truth[j * 20].euler.yaw)).degrees();
    sum2 += e * e;
  }
  EXPECT_NEAR(std::sqrt(sum2 / rec.aid.size()) / 0.09, 1.0, 0.03);
}

TEST(SliceRecording, KeepsAbsoluteTimes) {
  const auto rec = simulate_recording(swaying(20.0), SensorSpec::noise_free());
  const auto part = slice_recording(rec, 5.0, 15.0);
  ASSERT_EQ(part.imu.size(), 1000u);
  ASSERT_EQ(part.aid.size(), 50u);
  EXPECT_EQ(part.imu.front().t, 5.0);
  EXPECT_EQ(part.aid.front().t, 5.0);
  EXPECT_EQ(part.imu.front(), rec.imu[500]);
  EXPECT_NEAR(part.duration(), 10.0, 1e-9);
}

TEST(ScenarioBank, FiveNamedScenarios) {
  const auto bank = default_scenario_bank();
  ASSERT_EQ(bank.size(), 5u);
  int eval_count = 0;
  double max_heading_amp = 0.0;
  std::string widest;
  for (const auto& cfg : bank) {
    EXPECT_NO_THROW(cfg.validate());
    eval_count += cfg.eval ? 1 : 0;
    double amp = 0.0;
    for (const auto& o : cfg.heading_osc) amp += o.amplitude_deg * o.amplitude_deg;
    if (amp > max_heading_amp) {
      max_heading_amp = amp;
      widest = cfg.name;
    }
  }
  EXPECT_EQ(eval_count, 4);
  EXPECT_EQ(widest, "S5");
  EXPECT_FALSE(bank[4].eval);
  EXPECT_NE(default_scenario_bank(2)[0].seed, bank[0].seed);
}

TEST(NoiseFreeClosure, IntegratedAlignersRecoverHeadingOnAnyWindow) {
  const auto rec = simulate_recording(swaying(300.0), SensorSpec::noise_free());
  for (const double start : {0.0, 55.0, 170.0}) {
    for (AlignMethod m : {AlignMethod::kIDva, AlignMethod::kIOba}) {
      const auto e = align_heading(rec, m, 120.0, {}, start);
      EXPECT_LT(e.ae_deg, 0.1) << method_name(m) << " @" << start;
    }
  }
}

}  // namespace
}  // namespace headalign
