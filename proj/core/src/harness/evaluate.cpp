#include "headalign/harness/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "headalign/aligners.hpp"
#include "headalign/error.hpp"
#include "headalign/nn/train.hpp"
#include "headalign/recording_io.hpp"

namespace headalign::harness {

using nlohmann::json;

std::vector<nn::Segment> train_segments(const std::vector<Recording>& recs, const DataSplit& split) {
  std::vector<nn::Segment> out;
  for (const Recording& r : recs) {
    if (r.duration() > split.eval_end) out.push_back({&r, split.eval_end, r.duration()});
  }
  return out;
}

std::vector<nn::Segment> eval_segments(const std::vector<Recording>& recs, const DataSplit& split) {
  std::vector<nn::Segment> out;
  for (const Recording& r : recs) {
    if (!r.meta.scenario.eval) continue;
    out.push_back({&r, split.eval_begin, std::min(split.eval_end, r.duration())});
  }
  return out;
}

std::vector<std::string> classical_method_names() {
  std::vector<std::string> names;
  for (AlignMethod m : {AlignMethod::kIDva, AlignMethod::kADva, AlignMethod::kIOba, AlignMethod::kAOba}) {
    names.emplace_back(method_name(m));
  }
  return names;
}

std::vector<std::string> all_method_names() {
  auto names = classical_method_names();
  names.emplace_back(kNetworkMethod);
  return names;
}

std::vector<double> window_errors_deg(const nn::Segment& seg, const std::string& method, int t_align,
                                      const nn::HeadingNet* model) {
  const std::vector<double> starts = nn::window_starts(seg, t_align, nn::WindowMode::kEval);
  std::vector<double> errors;
  if (method == kNetworkMethod) {
    if (model == nullptr) {
      throw Error(ErrorCode::kMissingCheckpoint,
                  "no HeadingNet" + std::to_string(t_align) + " model loaded");
    }
    const nn::NormStats stats = model->norm();
    const nn::WindowSet set = nn::make_windows({seg}, t_align, nn::WindowMode::kEval, 0, &stats);
    for (std::size_t i = 0; i < set.windows.size(); ++i) {
      const nn::Window& w = set.windows[i];
      if (i >= starts.size() || w.t_begin != starts[i]) {
        throw Error(ErrorCode::kAlignmentWindow, "network and classical windows differ on '" +
                                                     w.recording + "'");
      }
      errors.push_back(std::abs(angle_diff(nn::predict_heading(*model, w), w.label).degrees()));
    }
    return errors;
  }
  const AlignMethod m = parse_method(method);
  for (double t0 : starts) {
    const WindowSpans spans = window_spans(*seg.rec, t0, t_align);
    errors.push_back(align_window(spans.imu, spans.aid, m).ae_deg);
  }
  return errors;
}

EvalReport evaluate(const EvalRequest& req) {
  if (req.methods.empty()) throw Error(ErrorCode::kUsage, "no methods requested");
  if (req.t_aligns.empty()) throw Error(ErrorCode::kUsage, "no alignment times requested");
  if (req.segments.empty()) throw Error(ErrorCode::kInsufficientData, "no evaluation segments");
  const auto known = all_method_names();
  for (const std::string& m : req.methods) {
    if (std::find(known.begin(), known.end(), m) == known.end()) {
      throw Error(ErrorCode::kUsage, "unknown method '" + m + "'");
    }
    if (m != kNetworkMethod) continue;
    for (int t : req.t_aligns) {
      auto it = req.models.find(t);
      if (it == req.models.end() || it->second == nullptr) {
        throw Error(ErrorCode::kMissingCheckpoint,
                    "HeadingNet requested at " + std::to_string(t) + " s but no checkpoint was given");
      }
    }
  }
  EvalReport report;
  for (const std::string& method : req.methods) {
    for (int t : req.t_aligns) {
      const nn::HeadingNet* model = nullptr;
      if (auto it = req.models.find(t); it != req.models.end()) model = it->second;
      for (const nn::Segment& seg : req.segments) {
        const std::vector<double> e = window_errors_deg(seg, method, t, model);
        double sum = 0.0;
        for (double v : e) sum += v;
        report.rows.push_back({method, t, seg.rec->name(), e.size(), sum / static_cast<double>(e.size())});
      }
    }
  }
  summarize(report);
  return report;
}

void summarize(EvalReport& report) {
  report.summary.clear();
  report.improvements.clear();
  // Keys in first-appearance order.
  std::vector<std::pair<std::string, int>> keys;
  for (const EvalRow& r : report.rows) {
    const std::pair<std::string, int> k{r.method, r.t_align};
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  }
  for (const auto& [method, t] : keys) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const EvalRow& r : report.rows) {
      if (r.method == method && r.t_align == t) {
        sum += r.mean_ae_deg;
        ++n;
      }
    }
    report.summary.push_back({method, t, sum / static_cast<double>(n)});
  }

  std::vector<int> times;
  for (const auto& [method, t] : keys) {
    if (std::find(times.begin(), times.end(), t) == times.end()) times.push_back(t);
  }
  for (int t : times) {
    const EvalSummary* nn = nullptr;
    const EvalSummary* best = nullptr;
    for (const EvalSummary& s : report.summary) {
      if (s.t_align != t) continue;
      if (s.method == kNetworkMethod) {
        nn = &s;
      } else if (best == nullptr || s.mean_ae_deg < best->mean_ae_deg ||
                 (s.mean_ae_deg == best->mean_ae_deg && s.method < best->method)) {
        best = &s;
      }
    }
    if (nn == nullptr || best == nullptr) continue;
    const double pct = best->mean_ae_deg == 0.0
                           ? 0.0
                           : 100.0 * (best->mean_ae_deg - nn->mean_ae_deg) / best->mean_ae_deg;
    report.improvements.push_back({t, best->method, best->mean_ae_deg, nn->mean_ae_deg, pct});
  }
}

json report_to_json(const EvalReport& r) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["rows"] = json::array();
  for (const EvalRow& row : r.rows) {
    j["rows"].push_back({{"method", row.method},
                         {"t_align", row.t_align},
                         {"recording", row.recording},
                         {"windows", row.windows},
                         {"mean_ae_deg", row.mean_ae_deg}});
  }
  j["summary"] = json::array();
  for (const EvalSummary& s : r.summary) {
    j["summary"].push_back({{"method", s.method}, {"t_align", s.t_align}, {"mean_ae_deg", s.mean_ae_deg}});
  }
  j["improvements"] = json::array();
  for (const Improvement& i : r.improvements) {
    j["improvements"].push_back({{"t_align", i.t_align},
                                 {"best_baseline_name", i.best_baseline},
                                 {"best_ae", i.best_ae},
                                 {"nn_ae", i.nn_ae},
                                 {"improvement_pct", i.improvement_pct}});
  }
  return j;
}

EvalReport report_from_json(const json& j) {
  try {
    if (j.at("schema_version") != kReportSchemaVersion) {
      throw Error(ErrorCode::kParse, "eval report: unsupported schema_version " +
                                         j.at("schema_version").dump());
    }
    EvalReport r;
    for (const json& row : j.at("rows")) {
      r.rows.push_back({row.at("method").get<std::string>(), row.at("t_align").get<int>(),
                        row.at("recording").get<std::string>(), row.at("windows").get<std::size_t>(),
                        row.at("mean_ae_deg").get<double>()});
    }
    for (const json& s : j.at("summary")) {
      r.summary.push_back({s.at("method").get<std::string>(), s.at("t_align").get<int>(),
                           s.at("mean_ae_deg").get<double>()});
    }
    for (const json& i : j.at("improvements")) {
      r.improvements.push_back({i.at("t_align").get<int>(), i.at("best_baseline_name").get<std::string>(),
                                i.at("best_ae").get<double>(), i.at("nn_ae").get<double>(),
                                i.at("improvement_pct").get<double>()});
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("eval report: ") + e.what());
  }
}

namespace {

std::filesystem::path write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  os << text;
  if (!os) throw Error(ErrorCode::kIo, "write failed for " + path.string());
  return path;
}

std::string improvement_csv(const EvalReport& r) {
  std::ostringstream os;
  os << "t_align,best_baseline_name,best_ae,nn_ae,improvement_pct\n";
  for (const Improvement& i : r.improvements) {
    os << i.t_align << ',' << i.best_baseline << ',' << format_double(i.best_ae) << ','
       << format_double(i.nn_ae) << ',' << format_double(i.improvement_pct) << '\n';
  }
  return os.str();
}

std::vector<std::string> methods_of(const EvalReport& r) {
  std::vector<std::string> out;
  for (const EvalSummary& s : r.summary) {
    if (std::find(out.begin(), out.end(), s.method) == out.end()) out.push_back(s.method);
  }
  return out;
}

std::vector<int> times_of(const EvalReport& r) {
  std::vector<int> out;
  for (const EvalSummary& s : r.summary) {
    if (std::find(out.begin(), out.end(), s.t_align) == out.end()) out.push_back(s.t_align);
  }
  std::sort(out.begin(), out.end());
  return out;
}

const EvalSummary* find_summary(const EvalReport& r, const std::string& method, int t) {
  for (const EvalSummary& s : r.summary) {
    if (s.method == method && s.t_align == t) return &s;
  }
  return nullptr;
}

}  // namespace

std::vector<std::filesystem::path> write_report_files(const EvalReport& r,
                                                      const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> out;

  std::ostringstream rows;
  rows << "method,t_align,recording,windows,mean_ae_deg\n";
  for (const EvalRow& row : r.rows) {
    rows << row.method << ',' << row.t_align << ',' << row.recording << ',' << row.windows << ','
         << format_double(row.mean_ae_deg) << '\n';
  }
  out.push_back(write_text(dir / "eval_rows.csv", rows.str()));

  std::ostringstream summary;
  summary << "method,t_align,mean_ae_deg\n";
  for (const EvalSummary& s : r.summary) {
    summary << s.method << ',' << s.t_align << ',' << format_double(s.mean_ae_deg) << '\n';
  }
  out.push_back(write_text(dir / "eval_summary.csv", summary.str()));
  out.push_back(write_text(dir / "improvement.csv", improvement_csv(r)));
  out.push_back(write_text(dir / "eval_report.json", report_to_json(r).dump(2) + "\n"));
  return out;
}

std::vector<std::filesystem::path> write_plot_files(const EvalReport& r,
                                                    const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto methods = methods_of(r);
  std::ostringstream ae;
  ae << "t_align";
  for (const std::string& m : methods) ae << ',' << m;
  ae << '\n';
  for (int t : times_of(r)) {
    ae << t;
    for (const std::string& m : methods) {
      ae << ',';
      if (const EvalSummary* s = find_summary(r, m, t)) ae << format_double(s->mean_ae_deg);
    }
    ae << '\n';
  }
  return {write_text(dir / "fig_ae_vs_talign.csv", ae.str()),
          write_text(dir / "fig_improvement.csv", improvement_csv(r))};
}

std::string format_ae_table(const EvalReport& r) {
  const auto methods = methods_of(r);
  const auto times = times_of(r);
  std::ostringstream os;
  os << "Average AE [deg]\n" << std::left << std::setw(12) << "method";
  for (int t : times) os << std::right << std::setw(10) << (std::to_string(t) + " s");
  os << '\n';
  os << std::fixed << std::setprecision(2);
  for (const std::string& m : methods) {
    os << std::left << std::setw(12) << m;
    for (int t : times) {
      const EvalSummary* s = find_summary(r, m, t);
      os << std::right << std::setw(10);
      if (s) {
        os << s->mean_ae_deg;
      } else {
        os << "-";
      }
    }
    os << '\n';
  }
  return os.str();
}

std::string format_improvement_table(const EvalReport& r) {
  std::ostringstream os;
  os << "Improvement over the best baseline\n"
     << std::left << std::setw(9) << "t_align" << std::setw(12) << "baseline" << std::right
     << std::setw(10) << "best AE" << std::setw(10) << "NN AE" << std::setw(10) << "gain %" << '\n';
  os << std::fixed << std::setprecision(2);
  for (const Improvement& i : r.improvements) {
    os << std::left << std::setw(9) << i.t_align << std::setw(12) << i.best_baseline << std::right
       << std::setw(10) << i.best_ae << std::setw(10) << i.nn_ae << std::setw(10)
       << i.improvement_pct << '\n';
  }
  return os.str();
}

}  // namespace headalign::harness
