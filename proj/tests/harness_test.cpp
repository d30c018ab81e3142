#include "headalign/harness/evaluate.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "headalign/error.hpp"
#include "headalign/mooring_sim.hpp"

namespace headalign::harness {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

EvalReport synthetic_report() {
  EvalReport r;
  // Two recordings, three methods, two alignment times.
  r.rows = {{"I-DVA", 10, "S1", 12, 4.0},  {"I-DVA", 10, "S2", 12, 6.0},
            {"A-OBA", 10, "S1", 12, 5.0},  {"A-OBA", 10, "S2", 12, 5.0},
            {"HeadingNet", 10, "S1", 12, 1.0}, {"HeadingNet", 10, "S2", 12, 2.0},
            {"I-DVA", 30, "S1", 4, 2.0},   {"I-DVA", 30, "S2", 4, 3.0},
            {"A-OBA", 30, "S1", 4, 1.0},   {"A-OBA", 30, "S2", 4, 1.5},
            {"HeadingNet", 30, "S1", 4, 1.0}, {"HeadingNet", 30, "S2", 4, 1.5}};
  summarize(r);
  return r;
}

TEST(Summarize, AveragesAndImprovement) {
  const EvalReport r = synthetic_report();
  ASSERT_EQ(r.summary.size(), 6u);
  EXPECT_EQ(r.summary[0].method, "I-DVA");
  EXPECT_EQ(r.summary[0].mean_ae_deg, 5.0);
  EXPECT_EQ(r.summary[2].mean_ae_deg, 1.5);
  ASSERT_EQ(r.improvements.size(), 2u);
  // 10 s: I-DVA and A-OBA tie at 5.0; the lexicographically smaller name wins.
  EXPECT_EQ(r.improvements[0].best_baseline, "A-OBA");
  EXPECT_DOUBLE_EQ(r.improvements[0].improvement_pct, 100.0 * (5.0 - 1.5) / 5.0);
  // 30 s: the network equals the best baseline.
  EXPECT_EQ(r.improvements[1].best_baseline, "A-OBA");
  EXPECT_EQ(r.improvements[1].improvement_pct, 0.0);
}

TEST(Summarize, RecomputesFromRows) {
  EvalReport r = synthetic_report();
  const EvalReport copy = r;
  r.summary.clear();
  r.improvements.clear();
  summarize(r);
  EXPECT_EQ(r, copy);
}

TEST(ReportJson, RoundTripAndSchema) {
  const EvalReport r = synthetic_report();
  nlohmann::json j = report_to_json(r);
  EXPECT_EQ(j.at("schema_version"), "1");
  EXPECT_EQ(report_from_json(j), r);
  j["schema_version"] = "2";
  try {
    report_from_json(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
  }
}

TEST(ReportFiles, FixedHeadersAndByteIdentical) {
  const fs::path a = fs::temp_directory_path() / "headalign_report_a";
  const fs::path b = fs::temp_directory_path() / "headalign_report_b";
  fs::remove_all(a);
  fs::remove_all(b);
  const EvalReport r = synthetic_report();
  const auto fa = write_report_files(r, a);
  const auto fb = write_report_files(r, b);
  write_plot_files(r, a);
  ASSERT_EQ(fa.size(), fb.size());
  for (std::size_t i = 0; i < fa.size(); ++i) EXPECT_EQ(slurp(fa[i]), slurp(fb[i])) << fa[i];
  EXPECT_TRUE(slurp(a / "improvement.csv")
                  .starts_with("t_align,best_baseline_name,best_ae,nn_ae,improvement_pct\n"));
  EXPECT_TRUE(slurp(a / "eval_rows.csv").starts_with("method,t_align,recording,windows,mean_ae_deg\n"));
  EXPECT_TRUE(slurp(a / "eval_summary.csv").starts_with("method,t_align,mean_ae_deg\n"));
  EXPECT_TRUE(slurp(a / "fig_ae_vs_talign.csv").starts_with("t_align,I-DVA,A-OBA,HeadingNet\n10,5,5,1.5\n"));
  EXPECT_NE(format_ae_table(r).find("HeadingNet"), std::string::npos);
  EXPECT_NE(format_improvement_table(r).find("A-OBA"), std::string::npos);
}

class Evaluate : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    ScenarioConfig s1 = default_scenario_bank(1)[0];
    s1.duration = 250.0;
    recs_ = new std::vector<Recording>{simulate_recording(s1, SensorSpec::noise_free())};
  }
  static void TearDownTestSuite() { delete recs_; }
  static std::vector<Recording>* recs_;
};
std::vector<Recording>* Evaluate::recs_ = nullptr;

TEST_F(Evaluate, NoiseFreeIObaAt120s) {
  EvalRequest req;
  req.segments = eval_segments(*recs_);
  req.methods = {"I-OBA"};
  req.t_aligns = {120};
  const EvalReport r = evaluate(req);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0].windows, 1u);
  EXPECT_LT(r.summary[0].mean_ae_deg, 0.1);
}

TEST_F(Evaluate, RowCountIsMethodsTimesAlignTimes) {
  EvalRequest req;
  req.segments = eval_segments(*recs_);
  req.methods = classical_method_names();
  req.t_aligns = {10, 30, 60};
  const EvalReport r = evaluate(req);
  EXPECT_EQ(r.summary.size(), 12u);
  EXPECT_EQ(r.rows[0].windows, 12u);
  EXPECT_TRUE(r.improvements.empty());
}

TEST_F(Evaluate, NetworkUsesTheClassicalWindows) {
  const nn::HeadingNet net = nn::HeadingNet::build(30, 1);
  EvalRequest req;
  req.segments = eval_segments(*recs_);
  req.methods = {"I-OBA", "HeadingNet"};
  req.t_aligns = {30};
  req.models[30] = &net;
  const EvalReport r = evaluate(req);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.rows[0].windows, r.rows[1].windows);
  EXPECT_EQ(r.improvements.size(), 1u);
}

TEST_F(Evaluate, Errors) {
  EvalRequest req;
  req.segments = eval_segments(*recs_);
  req.methods = {"HeadingNet"};
  req.t_aligns = {10};
  try {
    evaluate(req);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingCheckpoint);
  }
  req.methods = {};
  try {
    evaluate(req);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUsage);
  }
  req.methods = {"I-DVA"};
  req.t_aligns = {150};
  try {
    evaluate(req);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientData);
  }
}

TEST(Split, SegmentsFollowTheHeldOutRange) {
  std::vector<Recording> recs;
  for (const ScenarioConfig& c : default_scenario_bank(1)) {
    ScenarioConfig s = c;
    s.duration = c.eval ? 200.0 : 150.0;
    recs.push_back(simulate_recording(s, SensorSpec::noise_free()));
  }
  const auto ev = eval_segments(recs);
  const auto tr = train_segments(recs);
  EXPECT_EQ(ev.size(), 4u);
  EXPECT_EQ(tr.size(), 5u);
  EXPECT_EQ(ev[0].t_begin, 10.0);
  EXPECT_EQ(ev[0].t_end, 130.0);
  EXPECT_EQ(tr[4].t_begin, 130.0);
  EXPECT_DOUBLE_EQ(tr[4].t_end, 150.0);
}

}  // namespace
}  // namespace headalign::harness
