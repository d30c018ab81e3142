// On-disk recording format.
//
// A recording named NAME in directory DIR is four files:
//   NAME.imu.csv    t,wx,wy,wz,fx,fy,fz        (s, rad/s, m/s^2)
//   NAME.aid.csv    t,lat,lon,heading_gt       (s, rad, rad, rad)
//   NAME.truth.csv  t,yaw,pitch,roll,wx,wy,wz  (s, rad, rad/s)
//   NAME.meta.json  scenario, sensors, seed, format_version "1"
// Numbers are written with 17 significant digits so that reading a written
// recording reproduces it bit for bit.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "headalign/mooring_sim.hpp"

namespace headalign {

inline constexpr const char* kRecordingFormatVersion = "1";

nlohmann::json scenario_to_json(const ScenarioConfig& cfg);
/// Field-level validation; throws invalid-argument naming the field.
ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json sensors_to_json(const SensorSpec& spec);
SensorSpec sensors_from_json(const nlohmann::json& j);

/// Writes the four files for `rec` into `dir` (created if missing).
void write_recording(const Recording& rec, const std::filesystem::path& dir);

/// Reads DIR/NAME.*. Validates headers, row shapes, monotone time, sample
/// rates and aid/IMU timestamp alignment; errors cite file and line.
Recording read_recording(const std::filesystem::path& dir, const std::string& name);

/// Names of all recordings (NAME.meta.json) in `dir`, sorted.
std::vector<std::string> list_recordings(const std::filesystem::path& dir);

/// Decimal text of a double with 17 significant digits (exact round trip).
std::string format_double(double v);

/// FNV-1a 64-bit digest of a file's bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

}  // namespace headalign
