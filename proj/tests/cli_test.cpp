// Drives the headalign executable end to end.
#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace {

namespace fs = std::filesystem;

struct CliRun {
  int status = 0;
  std::string out;
  std::string err;
};

CliRun run(const std::string& args) {
  const fs::path err_file = fs::temp_directory_path() / "headalign_cli_stderr.txt";
  const std::string cmd = std::string(HEADALIGN_CLI) + " " + args + " 2>" + err_file.string();
  CliRun r;
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) return {-1, "", "popen failed"};
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int raw = pclose(p);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream is(err_file);
  std::ostringstream os;
  os << is.rdbuf();
  r.err = os.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = new fs::path(fs::temp_directory_path() / "headalign_cli_test");
    fs::remove_all(*root_);
    first_ = new CliRun(run("simulate --seed 4 --out-dir " + (*root_ / "data").string()));
  }
  static void TearDownTestSuite() {
    delete root_;
    delete first_;
  }
  static fs::path* root_;
  static CliRun* first_;
};
fs::path* Cli::root_ = nullptr;
CliRun* Cli::first_ = nullptr;

TEST_F(Cli, SimulateWritesTheBankReproducibly) {
  ASSERT_EQ(first_->status, 0) << first_->err;
  for (const char* name : {"S1", "S2", "S3", "S4", "S5"}) {
    EXPECT_TRUE(fs::exists(*root_ / "data" / (std::string(name) + ".meta.json"))) << name;
  }
  const CliRun again = run("simulate --seed 4 --out-dir " + (*root_ / "again").string());
  EXPECT_EQ(again.out, first_->out);
  const CliRun other = run("simulate --seed 5 --out-dir " + (*root_ / "other").string());
  EXPECT_NE(other.out, first_->out);
}

TEST_F(Cli, TrainRefusesToRunUnseeded) {
  const CliRun r = run("train --variation 10 --dry-run");
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find("error[usage]"), std::string::npos) << r.err;
}

TEST_F(Cli, TrainDefaultsAndOverrides) {
  auto cfg = [](const std::string& args) {
    const CliRun r = run("train --seed 1 --dry-run " + args);
    EXPECT_EQ(r.status, 0) << r.err;
    return nlohmann::json::parse(r.out);
  };
  const auto c10 = cfg("--variation 10");
  EXPECT_EQ(c10.at("epochs"), 1000);
  EXPECT_EQ(c10.at("loss_scale"), 10.0);
  EXPECT_EQ(c10.at("lr"), 0.0009);
  EXPECT_EQ(c10.at("weight_decay"), 0.08);
  EXPECT_EQ(c10.at("scheduler_step"), 120);
  EXPECT_EQ(c10.at("batch_size"), 512);
  EXPECT_EQ(c10.at("gamma"), 0.8);
  const auto c90 = cfg("--variation 90");
  EXPECT_EQ(c90.at("loss_scale"), 100.0);
  EXPECT_EQ(c90.at("weight_decay"), 0.8);
  EXPECT_EQ(c90.at("scheduler_step"), 150);
  EXPECT_EQ(cfg("--variation 10 --epochs 5").at("epochs"), 5);
  EXPECT_NE(run("train --seed 1 --dry-run --variation 45").status, 0);
}

TEST_F(Cli, EvaluateAndReportAreDeterministic) {
  const std::string data = (*root_ / "data").string();
  const fs::path a = *root_ / "eval_a", b = *root_ / "eval_b";
  const std::string common = "evaluate --data " + data + " --methods I-DVA,I-OBA --t-align 30,60";
  const CliRun ra = run(common + " --out-dir " + a.string());
  const CliRun rb = run(common + " --out-dir " + b.string());
  ASSERT_EQ(ra.status, 0) << ra.err;
  EXPECT_EQ(ra.out, rb.out);
  for (const char* f : {"eval_rows.csv", "eval_summary.csv", "improvement.csv", "eval_report.json"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  const CliRun p1 = run("report --out-dir " + a.string());
  const CliRun p2 = run("report --out-dir " + a.string());
  ASSERT_EQ(p1.status, 0) << p1.err;
  EXPECT_EQ(p1.out, p2.out);
  EXPECT_TRUE(fs::exists(a / "fig_ae_vs_talign.csv"));
  EXPECT_TRUE(fs::exists(a / "fig_improvement.csv"));
}

TEST_F(Cli, EvaluateSweepsTheCheckpointVariations) {
  const std::string data = (*root_ / "data").string();
  const fs::path out = *root_ / "trained";
  const CliRun tr = run("train --seed 3 --quiet --epochs 1 --variation 10 --data " + data + " --out-dir " +
                        out.string());
  ASSERT_EQ(tr.status, 0) << tr.err;
  const std::string ckpt = (out / "headingnet10.ckpt").string();

  const CliRun ev = run("evaluate --format json --data " + data + " --checkpoint " + ckpt + " --out-dir " +
                        out.string());
  ASSERT_EQ(ev.status, 0) << ev.err;
  const auto report = nlohmann::json::parse(ev.out);
  EXPECT_EQ(report.at("summary").size(), 5u);  // four classical methods and HeadingNet, at 10 s only
  for (const auto& row : report.at("summary")) EXPECT_EQ(row.at("t_align"), 10);

  const CliRun wider = run("evaluate --data " + data + " --checkpoint " + ckpt + " --t-align 10,30 --out-dir " +
                           out.string());
  EXPECT_NE(wider.status, 0);
  EXPECT_NE(wider.err.find("error[missing-checkpoint]"), std::string::npos) << wider.err;
}

TEST_F(Cli, ErrorsCarryCodes) {
  const std::string data = (*root_ / "data").string();
  const CliRun missing = run("evaluate --data " + data + " --methods HeadingNet --t-align 10 --out-dir " +
                          (*root_ / "x").string());
  EXPECT_NE(missing.status, 0);
  EXPECT_NE(missing.err.find("error[missing-checkpoint]"), std::string::npos) << missing.err;

  const CliRun nockpt = run("evaluate --data " + data + " --checkpoint " + (*root_ / "none.ckpt").string());
  EXPECT_NE(nockpt.status, 0);
  EXPECT_NE(nockpt.err.find("error[missing-checkpoint]"), std::string::npos) << nockpt.err;

  const fs::path ev = *root_ / "errors_eval";
  ASSERT_EQ(run("evaluate --data " + data + " --methods I-OBA --t-align 30 --out-dir " + ev.string()).status, 0);
  const CliRun empty = run("report --methods \"\" --out-dir " + ev.string());
  EXPECT_NE(empty.status, 0);
  EXPECT_NE(empty.err.find("error[usage]"), std::string::npos) << empty.err;

  const CliRun no_sub = run("");
  EXPECT_NE(no_sub.status, 0);

  const CliRun bad_method = run("align --data " + data + " --recording S1 --method X-DVA");
  EXPECT_NE(bad_method.status, 0);
  EXPECT_NE(bad_method.err.find("error[invalid-argument]"), std::string::npos) << bad_method.err;
}

TEST_F(Cli, AlignPrintsOneRowPerMethod) {
  const CliRun r = run("align --data " + (*root_ / "data").string() + " --recording S2 --t-align 60");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 5);
}

}  // namespace
