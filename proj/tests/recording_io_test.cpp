#include "headalign/recording_io.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <numbers>
#include <sstream>

#include "headalign/error.hpp"
#include "headalign/random.hpp"

namespace headalign {
namespace {

namespace fs = std::filesystem;
constexpr double kDeg = std::numbers::pi / 180.0;

class RecordingIo : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("headalign_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    ScenarioConfig cfg;
    cfg.name = "r1";
    cfg.duration = 4.0;
    cfg.lat = 32.5 * kDeg;
    cfg.lon = 34.95 * kDeg;
    cfg.psi0 = Angle::from_degrees(-160);
    cfg.heading_osc = {{2.0, 40.0, 0.1}};
    cfg.roll_osc = {{3.0, 7.0, 0.0}};
    cfg.seed = 123;
    rec_ = simulate_recording(cfg, SensorSpec::marine_grade());
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::vector<std::string> lines(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
  }
  void rewrite(const fs::path& p, const std::vector<std::string>& ls, bool final_newline = true) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    for (std::size_t i = 0; i < ls.size(); ++i) {
      out << ls[i];
      if (i + 1 < ls.size() || final_newline) out << '\n';
    }
  }
  Error read_error() {
    try {
      read_recording(dir_, "r1");
    } catch (const Error& e) {
      return e;
    }
    ADD_FAILURE() << "read succeeded";
    return Error(ErrorCode::kUsage, "none");
  }

  fs::path dir_;
  Recording rec_;
};

TEST(FormatDouble, RoundTripsExactly) {
  Rng rng(2);
  for (int i = 0; i < 10000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform(-300, 300));
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.25), "0.25");
}

TEST_F(RecordingIo, WriteThenReadIsEqual) {
  write_recording(rec_, dir_);
  EXPECT_EQ(lines(dir_ / "r1.imu.csv").front(), "t,wx,wy,wz,fx,fy,fz");
  EXPECT_EQ(lines(dir_ / "r1.aid.csv").front(), "t,lat,lon,heading_gt");
  const Recording back = read_recording(dir_, "r1");
  EXPECT_TRUE(back == rec_);
  EXPECT_EQ(list_recordings(dir_), std::vector<std::string>{"r1"});
}

TEST_F(RecordingIo, DigestIsStableAcrossWrites) {
  write_recording(rec_, dir_);
  const std::string d1 = file_digest(dir_ / "r1.imu.csv");
  write_recording(read_recording(dir_, "r1"), dir_);
  EXPECT_EQ(file_digest(dir_ / "r1.imu.csv"), d1);
  EXPECT_EQ(d1.size(), 16u);
}

TEST_F(RecordingIo, DecreasingTimestampCitesLine) {
  write_recording(rec_, dir_);
  auto ls = lines(dir_ / "r1.imu.csv");
  // File line 8 is sample index 6; give it the previous sample's time.
  const std::string prev_t = ls[6].substr(0, ls[6].find(','));
  ls[7] = prev_t + ls[7].substr(ls[7].find(','));
  rewrite(dir_ / "r1.imu.csv", ls);
  const Error e = read_error();
  EXPECT_EQ(e.code(), ErrorCode::kParse);
  EXPECT_NE(std::string(e.what()).find("r1.imu.csv:8:"), std::string::npos) << e.what();
}

TEST_F(RecordingIo, TruncatedFinalLineIsRejected) {
  write_recording(rec_, dir_);
  auto ls = lines(dir_ / "r1.aid.csv");
  ls.back() = ls.back().substr(0, ls.back().size() / 2);
  rewrite(dir_ / "r1.aid.csv", ls, false);
  const Error e = read_error();
  EXPECT_EQ(e.code(), ErrorCode::kParse);
  EXPECT_NE(std::string(e.what()).find("truncated"), std::string::npos) << e.what();
}

TEST_F(RecordingIo, MalformedRowsAreRejected) {
  write_recording(rec_, dir_);
  auto ls = lines(dir_ / "r1.imu.csv");
  const auto original = ls;
  ls[3] += ",1.0";
  rewrite(dir_ / "r1.imu.csv", ls);
  EXPECT_NE(std::string(read_error().what()).find("r1.imu.csv:4:"), std::string::npos);

  ls = original;
  ls[5].replace(ls[5].find(','), 2, ",x");
  rewrite(dir_ / "r1.imu.csv", ls);
  EXPECT_NE(std::string(read_error().what()).find("r1.imu.csv:6:"), std::string::npos);

  ls = original;
  ls[0] = "t,wx,wy,wz,fx,fy";
  rewrite(dir_ / "r1.imu.csv", ls);
  EXPECT_NE(std::string(read_error().what()).find("header"), std::string::npos);
}

TEST_F(RecordingIo, RateMismatchIsRejected) {
  write_recording(rec_, dir_);
  auto ls = lines(dir_ / "r1.imu.csv");
  ls.erase(ls.begin() + 50);
  rewrite(dir_ / "r1.imu.csv", ls);
  const Error e = read_error();
  EXPECT_EQ(e.code(), ErrorCode::kParse);
  EXPECT_NE(std::string(e.what()).find("r1.imu.csv:51:"), std::string::npos) << e.what();
}

TEST_F(RecordingIo, MissingFileIsIoError) {
  write_recording(rec_, dir_);
  fs::remove(dir_ / "r1.aid.csv");
  EXPECT_EQ(read_error().code(), ErrorCode::kIo);
}

TEST(ScenarioJson, RoundTripAndFieldErrors) {
  const auto bank = default_scenario_bank(3);
  for (const auto& cfg : bank) EXPECT_EQ(scenario_from_json(scenario_to_json(cfg)), cfg);
  auto j = scenario_to_json(bank[0]);
  j.erase("duration");
  try {
    scenario_from_json(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
    EXPECT_NE(std::string(e.what()).find("duration"), std::string::npos);
  }
  j = scenario_to_json(bank[0]);
  j["lat"] = "north";
  EXPECT_THROW(scenario_from_json(j), Error);
  const SensorSpec s = SensorSpec::marine_grade();
  EXPECT_EQ(sensors_from_json(sensors_to_json(s)), s);
}

}  // namespace
}  // namespace headalign
