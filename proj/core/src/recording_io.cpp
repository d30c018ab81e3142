#include "headalign/recording_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "headalign/error.hpp"
#include "headalign/random.hpp"

namespace headalign {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kRateTolerance = 1e-6;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

[[noreturn]] void parse_error(const fs::path& path, std::size_t line, const std::string& what) {
  throw Error(ErrorCode::kParse,
              path.filename().string() + ":" + std::to_string(line) + ": " + what);
}

// Rows of doubles after a fixed header line; line numbers are 1-based.
std::vector<std::vector<double>> read_csv(const fs::path& path, const std::string& header) {
  const std::string text = read_file(path);
  if (!text.empty() && text.back() != '\n') {
    const auto lines = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) + 1;
    parse_error(path, lines, "truncated final line (no terminating newline)");
  }
  const auto columns = static_cast<std::size_t>(std::count(header.begin(), header.end(), ',')) + 1;

  std::vector<std::vector<double>> rows;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (line_no == 1) {
      if (line != header) parse_error(path, 1, "expected header '" + header + "'");
      continue;
    }
    std::vector<double> row;
    row.reserve(columns);
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string_view field =
          line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size() || field.empty() ||
          !std::isfinite(v)) {
        parse_error(path, line_no, "malformed number '" + std::string(field) + "'");
      }
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (row.size() != columns) {
      parse_error(path, line_no,
                  "expected " + std::to_string(columns) + " fields, found " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (line_no == 0) parse_error(path, 1, "empty file");
  return rows;
}

// Strictly increasing time with nominal spacing 1/rate.
void check_time_column(const fs::path& path, const std::vector<std::vector<double>>& rows,
                       double rate) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double dt = rows[i][0] - rows[i - 1][0];
    const std::size_t line = i + 2;
    if (!(dt > 0.0)) parse_error(path, line, "timestamp does not increase");
    if (std::abs(dt - 1.0 / rate) > kRateTolerance) {
      parse_error(path, line, "sample spacing does not match the " + format_double(rate) + " Hz rate");
    }
  }
}

template <typename T>
T get_field(const json& j, const char* key) {
  if (!j.contains(key)) {
    throw Error(ErrorCode::kInvalidArgument, std::string(key) + ": missing field");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kInvalidArgument, std::string(key) + ": wrong type");
  }
}

json osc_to_json(const std::vector<Oscillation>& osc) {
  json arr = json::array();
  for (const Oscillation& o : osc) {
    arr.push_back({{"amplitude_deg", o.amplitude_deg}, {"period_s", o.period_s}, {"phase_rad", o.phase_rad}});
  }
  return arr;
}

std::vector<Oscillation> osc_from_json(const json& j, const char* key) {
  std::vector<Oscillation> out;
  if (!j.contains(key)) return out;
  if (!j.at(key).is_array()) {
    throw Error(ErrorCode::kInvalidArgument, std::string(key) + ": expected an array");
  }
  for (const json& e : j.at(key)) {
    Oscillation o;
    o.amplitude_deg = get_field<double>(e, "amplitude_deg");
    o.period_s = get_field<double>(e, "period_s");
    o.phase_rad = e.contains("phase_rad") ? get_field<double>(e, "phase_rad") : 0.0;
    out.push_back(o);
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

std::string file_digest(const fs::path& path) {
  const std::string bytes = read_file(path);
  return hex64(hash_bytes(bytes.data(), bytes.size()));
}

json scenario_to_json(const ScenarioConfig& cfg) {
  return {{"name", cfg.name},
          {"duration", cfg.duration},
          {"lat", cfg.lat},
          {"lon", cfg.lon},
          {"psi0", cfg.psi0.radians()},
          {"heading_osc", osc_to_json(cfg.heading_osc)},
          {"roll_osc", osc_to_json(cfg.roll_osc)},
          {"pitch_osc", osc_to_json(cfg.pitch_osc)},
          {"imu_rate", cfg.imu_rate},
          {"aid_rate", cfg.aid_rate},
          {"seed", cfg.seed},
          {"eval", cfg.eval}};
}

ScenarioConfig scenario_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "scenario: expected a JSON object");
  ScenarioConfig cfg;
  cfg.name = get_field<std::string>(j, "name");
  cfg.duration = get_field<double>(j, "duration");
  cfg.lat = get_field<double>(j, "lat");
  cfg.lon = j.contains("lon") ? get_field<double>(j, "lon") : 0.0;
  cfg.psi0 = Angle(get_field<double>(j, "psi0"));
  cfg.heading_osc = osc_from_json(j, "heading_osc");
  cfg.roll_osc = osc_from_json(j, "roll_osc");
  cfg.pitch_osc = osc_from_json(j, "pitch_osc");
  if (j.contains("imu_rate")) cfg.imu_rate = get_field<int>(j, "imu_rate");
  if (j.contains("aid_rate")) cfg.aid_rate = get_field<int>(j, "aid_rate");
  cfg.seed = get_field<std::uint64_t>(j, "seed");
  if (j.contains("eval")) cfg.eval = get_field<bool>(j, "eval");
  cfg.validate();
  return cfg;
}

json sensors_to_json(const SensorSpec& s) {
  return {{"gyro_bias_instability", s.gyro_bias_instability},
          {"gyro_arw", s.gyro_arw},
          {"accel_bias", s.accel_bias},
          {"accel_vrw", s.accel_vrw},
          {"gnss_heading_sigma", s.gnss_heading_sigma},
          {"gnss_pos_sigma", s.gnss_pos_sigma}};
}

SensorSpec sensors_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "sensors: expected a JSON object");
  SensorSpec s;
  s.gyro_bias_instability = get_field<double>(j, "gyro_bias_instability");
  s.gyro_arw = get_field<double>(j, "gyro_arw");
  s.accel_bias = get_field<double>(j, "accel_bias");
  s.accel_vrw = get_field<double>(j, "accel_vrw");
  s.gnss_heading_sigma = get_field<double>(j, "gnss_heading_sigma");
  s.gnss_pos_sigma = get_field<double>(j, "gnss_pos_sigma");
  s.validate();
  return s;
}

void write_recording(const Recording& rec, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  const std::string& name = rec.name();

  std::string imu = "t,wx,wy,wz,fx,fy,fz\n";
  for (const ImuSample& s : rec.imu) {
    imu += format_double(s.t);
    for (int i = 0; i < 3; ++i) imu += "," + format_double(s.omega_ib_b[i]);
    for (int i = 0; i < 3; ++i) imu += "," + format_double(s.f_b[i]);
    imu += '\n';
  }
  std::string aid = "t,lat,lon,heading_gt\n";
  for (const NavAidSample& a : rec.aid) {
    aid += format_double(a.t) + "," + format_double(a.lat) + "," + format_double(a.lon) + "," +
           format_double(a.heading_gt.radians()) + "\n";
  }
  std::string truth = "t,yaw,pitch,roll,wx,wy,wz\n";
  for (const TruthSample& ts : rec.truth) {
    truth += format_double(ts.t) + "," + format_double(ts.euler.yaw) + "," +
             format_double(ts.euler.pitch) + "," + format_double(ts.euler.roll);
    for (int i = 0; i < 3; ++i) truth += "," + format_double(ts.omega_ib_b[i]);
    truth += '\n';
  }
  const json meta = {{"format_version", kRecordingFormatVersion},
                     {"scenario", scenario_to_json(rec.meta.scenario)},
                     {"sensors", sensors_to_json(rec.meta.sensors)},
                     {"seed", rec.meta.seed}};

  write_file(dir / (name + ".imu.csv"), imu);
  write_file(dir / (name + ".aid.csv"), aid);
  write_file(dir / (name + ".truth.csv"), truth);
  write_file(dir / (name + ".meta.json"), meta.dump(2) + "\n");
}

Recording read_recording(const fs::path& dir, const std::string& name) {
  const fs::path meta_path = dir / (name + ".meta.json");
  json meta;
  try {
    meta = json::parse(read_file(meta_path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, meta_path.filename().string() + ": " + e.what());
  }
  if (!meta.contains("format_version") || meta.at("format_version") != kRecordingFormatVersion) {
    throw Error(ErrorCode::kParse, meta_path.filename().string() + ": unsupported format_version");
  }
  Recording rec;
  rec.meta.scenario = scenario_from_json(meta.at("scenario"));
  rec.meta.sensors = sensors_from_json(meta.at("sensors"));
  rec.meta.seed = get_field<std::uint64_t>(meta, "seed");
  const ScenarioConfig& cfg = rec.meta.scenario;

  const fs::path imu_path = dir / (name + ".imu.csv");
  const auto imu_rows = read_csv(imu_path, "t,wx,wy,wz,fx,fy,fz");
  check_time_column(imu_path, imu_rows, cfg.imu_rate);
  rec.imu.reserve(imu_rows.size());
  for (const auto& r : imu_rows) {
    rec.imu.push_back({r[0], Vec3(r[1], r[2], r[3]), Vec3(r[4], r[5], r[6])});
  }

  const fs::path aid_path = dir / (name + ".aid.csv");
  const auto aid_rows = read_csv(aid_path, "t,lat,lon,heading_gt");
  check_time_column(aid_path, aid_rows, cfg.aid_rate);
  const std::size_t ratio = static_cast<std::size_t>(cfg.rate_ratio());
  rec.aid.reserve(aid_rows.size());
  for (std::size_t i = 0; i < aid_rows.size(); ++i) {
    const auto& r = aid_rows[i];
    if (std::abs(r[1]) > std::numbers::pi / 2.0) parse_error(aid_path, i + 2, "latitude out of range");
    const std::size_t k = i * ratio;
    if (k >= rec.imu.size() || rec.imu[k].t != r[0]) {
      parse_error(aid_path, i + 2, "aiding timestamp does not coincide with IMU sample " + std::to_string(k));
    }
    rec.aid.push_back({r[0], r[1], r[2], Angle(r[3])});
  }

  const fs::path truth_path = dir / (name + ".truth.csv");
  if (fs::exists(truth_path)) {
    const auto truth_rows = read_csv(truth_path, "t,yaw,pitch,roll,wx,wy,wz");
    rec.truth.reserve(truth_rows.size());
    for (const auto& r : truth_rows) {
      rec.truth.push_back({r[0], EulerZyx{r[1], r[2], r[3]}, Vec3(r[4], r[5], r[6])});
    }
  }
  return rec;
}

std::vector<std::string> list_recordings(const fs::path& dir) {
  std::vector<std::string> names;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(ErrorCode::kIo, "not a directory: " + dir.string());
  const std::string suffix = ".meta.json";
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string file = entry.path().filename().string();
    if (file.size() > suffix.size() && file.ends_with(suffix)) {
      names.push_back(file.substr(0, file.size() - suffix.size()));
    }
  }
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace headalign
