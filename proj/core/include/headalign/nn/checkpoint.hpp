// Model checkpoints: an 8-byte magic, a little-endian uint64 header length,
// a JSON header (format version, architecture, normalization, parameter
// manifest, checksum, free-form metadata) and the parameters as raw
// little-endian doubles in manifest order.
#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "headalign/nn/headingnet.hpp"

namespace headalign::nn {

inline constexpr char kCheckpointMagic[8] = {'H', 'D', 'N', 'G', 'C', 'K', 'P', 'T'};

nlohmann::json config_to_json(const HeadingNetConfig& c);
HeadingNetConfig config_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const HeadingNet& model,
                     const nlohmann::json& metadata = nlohmann::json::object());

struct Checkpoint {
  HeadingNet model;
  nlohmann::json metadata;
};

/// Missing file: missing-checkpoint error. Bad magic, header, sizes or
/// checksum: parse error.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace headalign::nn
