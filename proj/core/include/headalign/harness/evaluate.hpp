// Evaluation sweeps over methods x alignment times on held-out segments,
// with classical aligners and HeadingNet scored on identical windows.
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "headalign/mooring_sim.hpp"
#include "headalign/nn/dataset.hpp"
#include "headalign/nn/headingnet.hpp"

namespace headalign::harness {

inline constexpr const char* kNetworkMethod = "HeadingNet";
inline constexpr const char* kReportSchemaVersion = "1";

/// Time split of every recording: [eval_begin, eval_end) is held out for
/// evaluation (scenarios flagged eval only); [eval_end, end) trains.
struct DataSplit {
  double eval_begin = 10.0;
  double eval_end = 130.0;
};

std::vector<nn::Segment> train_segments(const std::vector<Recording>& recs, const DataSplit& split = {});
std::vector<nn::Segment> eval_segments(const std::vector<Recording>& recs, const DataSplit& split = {});

/// "I-DVA", "A-DVA", "I-OBA", "A-OBA".
std::vector<std::string> classical_method_names();
/// Classical names plus HeadingNet.
std::vector<std::string> all_method_names();

struct EvalRow {
  std::string method;
  int t_align = 0;
  std::string recording;
  std::size_t windows = 0;
  double mean_ae_deg = 0.0;

  bool operator==(const EvalRow&) const = default;
};

struct EvalSummary {
  std::string method;
  int t_align = 0;
  double mean_ae_deg = 0.0;  ///< mean of the per-recording means

  bool operator==(const EvalSummary&) const = default;
};

struct Improvement {
  int t_align = 0;
  std::string best_baseline;
  double best_ae = 0.0;
  double nn_ae = 0.0;
  double improvement_pct = 0.0;  ///< 100 (best - nn) / best

  bool operator==(const Improvement&) const = default;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::vector<EvalSummary> summary;
  std::vector<Improvement> improvements;

  bool operator==(const EvalReport&) const = default;
};

struct EvalRequest {
  std::vector<nn::Segment> segments;
  std::vector<std::string> methods;
  std::vector<int> t_aligns;
  /// Trained networks by alignment time; required for each t_align when
  /// HeadingNet is among the methods.
  std::map<int, const nn::HeadingNet*> models;
};

/// Per-window absolute errors of one method on one segment's eval windows.
std::vector<double> window_errors_deg(const nn::Segment& seg, const std::string& method, int t_align,
                                      const nn::HeadingNet* model = nullptr);

/// Rows ordered by (method as requested, t_align as requested, segment
/// order). Missing models raise missing-checkpoint; segments shorter than a
/// window raise insufficient-data.
EvalReport evaluate(const EvalRequest& req);

/// Summary and improvement rows recomputed from the per-recording rows.
/// The best baseline is the strict minimum over classical methods, ties
/// going to the lexicographically smallest name.
void summarize(EvalReport& report);

nlohmann::json report_to_json(const EvalReport& r);
/// Throws parse error on schema mismatch.
EvalReport report_from_json(const nlohmann::json& j);

/// Writes eval_rows.csv, eval_summary.csv, improvement.csv and
/// eval_report.json into `dir`; returns the written paths.
std::vector<std::filesystem::path> write_report_files(const EvalReport& r,
                                                      const std::filesystem::path& dir);

/// Plot data: fig_ae_vs_talign.csv (t_align, then one column per method)
/// and fig_improvement.csv (same columns as improvement.csv).
std::vector<std::filesystem::path> write_plot_files(const EvalReport& r,
                                                    const std::filesystem::path& dir);

/// Text table of mean AE with one row per method and one column per t_align.
std::string format_ae_table(const EvalReport& r);
/// Text table of the improvement rows.
std::string format_improvement_table(const EvalReport& r);

}  // namespace headalign::harness
