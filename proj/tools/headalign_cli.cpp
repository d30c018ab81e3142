// headalign: simulate mooring recordings, align, train HeadingNet, evaluate
// and report.
#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "headalign/aligners.hpp"
#include "headalign/error.hpp"
#include "headalign/harness/evaluate.hpp"
#include "headalign/mooring_sim.hpp"
#include "headalign/nn/checkpoint.hpp"
#include "headalign/nn/train.hpp"
#include "headalign/recording_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace headalign;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  fs::path out_dir = ".";
  std::string format = "csv";
};

json read_json_file(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

std::vector<Recording> load_all(const fs::path& dir) {
  if (dir.empty()) throw Error(ErrorCode::kUsage, "--data is required");
  std::vector<Recording> recs;
  for (const std::string& name : list_recordings(dir)) recs.push_back(read_recording(dir, name));
  if (recs.empty()) throw Error(ErrorCode::kInsufficientData, "no recordings in " + dir.string());
  return recs;
}

std::vector<std::string> nonempty(const std::vector<std::string>& v) {
  std::vector<std::string> out;
  for (const std::string& s : v) {
    if (!s.empty()) out.push_back(s);
  }
  return out;
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
  fs::path config;
  fs::path sensors;
  bool noise_free = false;
};

void cmd_simulate(const Globals& g, const SimulateArgs& a) {
  std::vector<ScenarioConfig> scenarios;
  SensorSpec spec = a.noise_free ? SensorSpec::noise_free() : SensorSpec::marine_grade();
  if (a.config.empty()) {
    scenarios = default_scenario_bank(g.seed.value_or(1));
  } else {
    const json j = read_json_file(a.config);
    if (j.contains("scenarios")) {
      for (const json& s : j.at("scenarios")) scenarios.push_back(scenario_from_json(s));
      if (j.contains("sensors") && !a.noise_free) spec = sensors_from_json(j.at("sensors"));
    } else {
      scenarios.push_back(scenario_from_json(j));
    }
    if (g.seed) {
      for (std::size_t i = 0; i < scenarios.size(); ++i) scenarios[i].seed = *g.seed * 1000 + i + 1;
    }
  }
  if (!a.sensors.empty()) spec = sensors_from_json(read_json_file(a.sensors));

  json out = json::array();
  if (g.format == "csv") std::cout << "recording,seed,file,digest\n";
  for (const ScenarioConfig& cfg : scenarios) {
    const Recording rec = simulate_recording(cfg, spec);
    write_recording(rec, g.out_dir);
    json files = json::object();
    for (const char* ext : {".imu.csv", ".aid.csv", ".truth.csv", ".meta.json"}) {
      const std::string file = cfg.name + ext;
      const std::string digest = file_digest(g.out_dir / file);
      files[file] = digest;
      if (g.format == "csv") std::cout << cfg.name << ',' << cfg.seed << ',' << file << ',' << digest << '\n';
    }
    out.push_back({{"recording", cfg.name}, {"seed", cfg.seed}, {"files", files}});
  }
  if (g.format == "json") std::cout << out.dump(2) << '\n';
}

// --- align ------------------------------------------------------------------

struct AlignArgs {
  fs::path data;
  std::string recording;
  std::vector<std::string> methods;
  double t_align = 120.0;
  double t_start = 0.0;
};

void cmd_align(const Globals& g, const AlignArgs& a) {
  const Recording rec = read_recording(a.data, a.recording);
  std::vector<std::string> methods = nonempty(a.methods);
  if (methods.empty()) throw Error(ErrorCode::kUsage, "no methods given");
  json out = json::array();
  if (g.format == "csv") std::cout << "recording,method,t_start,t_align,psi_hat_deg,psi_gt_deg,ae_deg\n";
  for (const std::string& m : methods) {
    const HeadingEstimate e = align_heading(rec, parse_method(m), a.t_align, {}, a.t_start);
    if (g.format == "csv") {
      std::cout << rec.name() << ',' << e.method << ',' << format_double(a.t_start) << ','
                << format_double(a.t_align) << ',' << format_double(e.psi_hat.degrees()) << ','
                << format_double(e.psi_gt.degrees()) << ',' << format_double(e.ae_deg) << '\n';
    }
    out.push_back({{"recording", rec.name()},
                   {"method", e.method},
                   {"t_start", a.t_start},
                   {"t_align", a.t_align},
                   {"psi_hat_deg", e.psi_hat.degrees()},
                   {"psi_gt_deg", e.psi_gt.degrees()},
                   {"ae_deg", e.ae_deg}});
  }
  if (g.format == "json") std::cout << out.dump(2) << '\n';
}

// --- train ------------------------------------------------------------------

struct TrainArgs {
  fs::path data;
  int variation = 10;
  fs::path checkpoint;
  std::optional<int> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<double> loss_scale;
  std::optional<double> lr;
  std::optional<double> weight_decay;
  std::optional<int> step;
  std::optional<double> gamma;
  harness::DataSplit split;
  bool quiet = false;
  bool dry_run = false;
};

json train_config_json(const nn::TrainConfig& c) {
  return {{"epochs", c.epochs},         {"batch_size", c.batch_size},
          {"loss_scale", c.loss_scale}, {"lr", c.lr},
          {"weight_decay", c.weight_decay}, {"scheduler_step", c.scheduler_step},
          {"gamma", c.gamma},           {"seed", c.seed}};
}

void cmd_train(const Globals& g, const TrainArgs& a) {
  if (!g.seed) throw Error(ErrorCode::kUsage, "train needs an explicit --seed");
  nn::TrainConfig cfg = nn::default_train_config(a.variation, *g.seed);
  if (a.epochs) cfg.epochs = *a.epochs;
  if (a.batch_size) cfg.batch_size = *a.batch_size;
  if (a.loss_scale) cfg.loss_scale = *a.loss_scale;
  if (a.lr) cfg.lr = *a.lr;
  if (a.weight_decay) cfg.weight_decay = *a.weight_decay;
  if (a.step) cfg.scheduler_step = *a.step;
  if (a.gamma) cfg.gamma = *a.gamma;

  nn::HeadingNet model = nn::HeadingNet::build(a.variation, cfg.seed);
  json echo = train_config_json(cfg);
  echo["variation"] = a.variation;
  echo["parameters"] = model.parameter_count();
  echo["fc_input"] = model.flatten_size();
  if (a.dry_run) {
    std::cout << echo.dump(2) << '\n';
    return;
  }
  std::cerr << "effective config: " << echo.dump() << '\n';
  if (model.flatten_size() != model.config().listed_fc_input) {
    std::cerr << "note: realized flatten size " << model.flatten_size()
              << " differs from the listed FC input " << model.config().listed_fc_input << '\n';
  }

  const std::vector<Recording> recs = load_all(a.data);
  const auto segments = harness::train_segments(recs, a.split);
  const nn::WindowSet windows = nn::make_windows(segments, a.variation, nn::WindowMode::kTrain, cfg.seed);
  std::cerr << "training windows: " << windows.windows.size() << '\n';
  echo["train_windows"] = windows.windows.size();

  const auto history = nn::train(model, windows, cfg, [&](const nn::EpochRecord& r) {
    if (!a.quiet) {
      std::cerr << "epoch " << r.epoch << " lr " << r.lr << " loss " << r.train_loss << '\n';
    }
  });

  fs::create_directories(g.out_dir);
  const fs::path ckpt = a.checkpoint.empty()
                            ? g.out_dir / ("headingnet" + std::to_string(a.variation) + ".ckpt")
                            : a.checkpoint;
  json meta = {{"train", train_config_json(cfg)}, {"train_windows", windows.windows.size()}};
  if (!history.empty()) meta["final_train_loss"] = history.back().train_loss;
  nn::save_checkpoint(ckpt, model, meta);
  const fs::path hist = g.out_dir / ("history_" + std::to_string(a.variation) + ".csv");
  {
    std::ofstream os(hist);
    if (!os) throw Error(ErrorCode::kIo, "cannot write " + hist.string());
    nn::write_history_csv(os, history);
  }
  if (g.format == "json") {
    std::cout << json{{"checkpoint", ckpt.string()},
                      {"history", hist.string()},
                      {"checksum", model.checksum()},
                      {"config", echo}}
                     .dump(2)
              << '\n';
  } else {
    std::cout << "checkpoint," << ckpt.string() << "\nhistory," << hist.string() << "\nchecksum,"
              << model.checksum() << '\n';
  }
}

// --- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
  fs::path data;
  std::vector<std::string> methods;
  std::vector<int> t_aligns = {10, 30, 60, 90, 120};
  std::vector<fs::path> checkpoints;
  harness::DataSplit split;
};

void cmd_evaluate(const Globals& g, const EvaluateArgs& a, bool methods_given, bool t_aligns_given) {
  std::vector<nn::HeadingNet> models;
  for (const fs::path& p : a.checkpoints) models.push_back(nn::load_checkpoint(p).model);

  harness::EvalRequest req;
  req.t_aligns = a.t_aligns;
  // Without --t-align, checkpoints decide which alignment times are swept.
  if (!t_aligns_given && !models.empty()) {
    req.t_aligns.clear();
    for (const nn::HeadingNet& m : models) req.t_aligns.push_back(m.config().t_align);
    std::sort(req.t_aligns.begin(), req.t_aligns.end());
    req.t_aligns.erase(std::unique(req.t_aligns.begin(), req.t_aligns.end()), req.t_aligns.end());
  }
  if (methods_given) {
    req.methods = nonempty(a.methods);
    if (req.methods.empty()) throw Error(ErrorCode::kUsage, "empty method list");
  } else {
    req.methods = harness::classical_method_names();
    if (!models.empty()) req.methods.emplace_back(harness::kNetworkMethod);
  }
  for (const nn::HeadingNet& m : models) req.models[m.config().t_align] = &m;

  const std::vector<Recording> recs = load_all(a.data);
  req.segments = harness::eval_segments(recs, a.split);
  const harness::EvalReport report = harness::evaluate(req);
  harness::write_report_files(report, g.out_dir);
  if (g.format == "json") {
    std::cout << harness::report_to_json(report).dump(2) << '\n';
  } else {
    std::cout << harness::format_ae_table(report);
    if (!report.improvements.empty()) std::cout << '\n' << harness::format_improvement_table(report);
  }
}

// --- report -----------------------------------------------------------------

struct ReportArgs {
  fs::path input;
  std::vector<std::string> methods;
};

void cmd_report(const Globals& g, const ReportArgs& a, bool methods_given) {
  const fs::path dir = a.input.empty() ? g.out_dir : a.input;
  const std::vector<std::string> keep = nonempty(a.methods);
  if (methods_given && keep.empty()) throw Error(ErrorCode::kUsage, "empty method list");
  const fs::path file = dir / "eval_report.json";
  if (!fs::exists(file)) throw Error(ErrorCode::kIo, "missing evaluation artifact " + file.string());
  harness::EvalReport report = harness::report_from_json(read_json_file(file));
  if (methods_given) {
    std::erase_if(report.rows, [&](const harness::EvalRow& r) {
      return std::find(keep.begin(), keep.end(), r.method) == keep.end();
    });
    harness::summarize(report);
  }
  harness::write_plot_files(report, g.out_dir);
  if (g.format == "json") {
    std::cout << harness::report_to_json(report).dump(2) << '\n';
  } else {
    std::cout << harness::format_ae_table(report);
    if (!report.improvements.empty()) std::cout << '\n' << harness::format_improvement_table(report);
  }
}

int fail(ErrorCode code, const std::string& what) {
  std::cerr << "error[" << error_code_name(code) << "]: " << what << '\n';
  return code == ErrorCode::kUsage ? 2 : 1;
}

void add_split(CLI::App* sub, harness::DataSplit& split) {
  sub->add_option("--eval-begin", split.eval_begin, "start of the held-out segment [s]")
      ->capture_default_str();
  sub->add_option("--eval-end", split.eval_end, "end of the held-out segment / start of training data [s]")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heading alignment for moored vessels: classical aligners and HeadingNet"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "root seed for simulation and training");
  app.add_option("--out-dir", g.out_dir, "directory for written artifacts")->capture_default_str();
  app.add_option("--format", g.format, "stdout format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  SimulateArgs sim;
  auto* s_sim = app.add_subcommand("simulate", "write simulated recordings (default: scenario bank S1-S5)");
  s_sim->add_option("--config", sim.config, "scenario JSON (one scenario or {scenarios, sensors})");
  s_sim->add_option("--sensors", sim.sensors, "sensor specification JSON");
  s_sim->add_flag("--noise-free", sim.noise_free, "zero all sensor errors");

  AlignArgs al;
  auto* s_al = app.add_subcommand("align", "align one recording with classical methods");
  s_al->add_option("--data", al.data, "recording directory")->required();
  s_al->add_option("--recording", al.recording, "recording name")->required();
  s_al->add_option("--method", al.methods, "I-DVA, A-DVA, I-OBA or A-OBA")
      ->delimiter(',')
      ->default_val(harness::classical_method_names());
  s_al->add_option("--t-align", al.t_align, "alignment time [s]")->capture_default_str();
  s_al->add_option("--t-start", al.t_start, "window start [s]")->capture_default_str();

  TrainArgs tr;
  auto* s_tr = app.add_subcommand("train", "train a HeadingNet variation");
  s_tr->add_option("--data", tr.data, "recording directory");
  s_tr->add_option("--variation", tr.variation, "alignment time of the variation: 10, 30, 60, 90, 120")
      ->capture_default_str();
  s_tr->add_option("--checkpoint", tr.checkpoint, "output checkpoint (default OUT/headingnetT.ckpt)");
  s_tr->add_option("--epochs", tr.epochs);
  s_tr->add_option("--batch-size", tr.batch_size);
  s_tr->add_option("--lambda", tr.loss_scale, "loss scale of the cyclic MSE");
  s_tr->add_option("--lr", tr.lr);
  s_tr->add_option("--weight-decay", tr.weight_decay);
  s_tr->add_option("--step", tr.step, "scheduler step [epochs]");
  s_tr->add_option("--gamma", tr.gamma, "scheduler decay factor");
  s_tr->add_flag("--quiet", tr.quiet, "no per-epoch log");
  s_tr->add_flag("--dry-run", tr.dry_run, "print the effective configuration and exit");
  add_split(s_tr, tr.split);

  EvaluateArgs ev;
  auto* s_ev = app.add_subcommand("evaluate", "methods x alignment times on held-out segments");
  s_ev->add_option("--data", ev.data, "recording directory")->required();
  auto* ev_methods = s_ev->add_option("--methods", ev.methods, "comma-separated method names")->delimiter(',');
  auto* ev_times = s_ev->add_option("--t-align", ev.t_aligns,
                                    "comma-separated alignment times [s] (default: the checkpoints' "
                                    "variations, or all five without checkpoints)")
      ->delimiter(',')
      ->capture_default_str();
  s_ev->add_option("--checkpoint", ev.checkpoints, "HeadingNet checkpoint (repeatable)");
  add_split(s_ev, ev.split);

  ReportArgs rp;
  auto* s_rp = app.add_subcommand("report", "tables and plot data from evaluate artifacts");
  s_rp->add_option("--input", rp.input, "directory holding eval_report.json (default --out-dir)");
  auto* rp_methods = s_rp->add_option("--methods", rp.methods, "restrict to these methods")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(ErrorCode::kUsage, e.what());
  }
  if (app.count("--seed") > 0) g.seed = seed;

  try {
    if (*s_sim) {
      cmd_simulate(g, sim);
    } else if (*s_al) {
      cmd_align(g, al);
    } else if (*s_tr) {
      cmd_train(g, tr);
    } else if (*s_ev) {
      cmd_evaluate(g, ev, ev_methods->count() > 0, ev_times->count() > 0);
    } else if (*s_rp) {
      cmd_report(g, rp, rp_methods->count() > 0);
    }
  } catch (const Error& e) {
    return fail(e.code(), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(ErrorCode::kIo, e.what());
  }
  return 0;
}
