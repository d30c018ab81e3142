#include "headalign/nn/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "headalign/error.hpp"

namespace headalign::nn {

namespace {

using nlohmann::json;

json spec_to_json(const ConvSpec& s) { return {{"kh", s.kh}, {"kw", s.kw}, {"pool", s.pool}}; }

ConvSpec spec_from_json(const json& j) {
  return {j.at("kh").get<std::size_t>(), j.at("kw").get<std::size_t>(), j.at("pool").get<bool>()};
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64(const char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

[[noreturn]] void corrupt(const std::filesystem::path& path, const std::string& why) {
  throw Error(ErrorCode::kParse, "checkpoint " + path.string() + ": " + why);
}

}  // namespace

json config_to_json(const HeadingNetConfig& c) {
  json j;
  j["t_align"] = c.t_align;
  j["head"] = json::array();
  for (const ConvSpec& s : c.head) j["head"].push_back(spec_to_json(s));
  j["fuse"] = spec_to_json(c.fuse);
  j["fuse2"] = c.fuse2 ? spec_to_json(*c.fuse2) : json(nullptr);
  j["leaky_alpha"] = c.leaky_alpha;
  j["dropout"] = c.dropout;
  j["fc_input"] = c.listed_fc_input;
  return j;
}

HeadingNetConfig config_from_json(const json& j) {
  HeadingNetConfig c;
  c.t_align = j.at("t_align").get<int>();
  const json& head = j.at("head");
  if (!head.is_array() || head.size() != 3) throw Error(ErrorCode::kParse, "config.head: expected 3 layers");
  for (std::size_t i = 0; i < 3; ++i) c.head[i] = spec_from_json(head[i]);
  c.fuse = spec_from_json(j.at("fuse"));
  if (!j.at("fuse2").is_null()) c.fuse2 = spec_from_json(j.at("fuse2"));
  c.leaky_alpha = j.at("leaky_alpha").get<double>();
  c.dropout = j.at("dropout").get<double>();
  c.listed_fc_input = j.at("fc_input").get<std::size_t>();
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const HeadingNet& model,
                     const json& metadata) {
  json header;
  header["format_version"] = "1";
  header["config"] = config_to_json(model.config());
  header["norm"] = {{"mean", model.norm().mean}, {"stddev", model.norm().stddev}};
  header["params"] = json::array();
  std::size_t offset = 0;
  for (std::size_t i = 0; i < model.params().size(); ++i) {
    const Tensor& p = model.params()[i];
    header["params"].push_back({{"name", model.param_names()[i]}, {"shape", p.shape()}, {"offset", offset}});
    offset += p.size();
  }
  header["count"] = offset;
  header["checksum"] = model.checksum();
  header["metadata"] = metadata;

  const std::string text = header.dump();
  std::string blob(kCheckpointMagic, sizeof kCheckpointMagic);
  put_u64(blob, text.size());
  blob += text;
  blob.reserve(blob.size() + offset * 8);
  for (const Tensor& p : model.params()) {
    for (double v : p.values()) put_u64(blob, std::bit_cast<std::uint64_t>(v));
  }

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::kIo, "cannot write checkpoint " + path.string());
  os.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!os) throw Error(ErrorCode::kIo, "write failed for checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kMissingCheckpoint, "checkpoint not found: " + path.string());
  }
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIo, "cannot read checkpoint " + path.string());
  const std::string blob((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());

  if (blob.size() < 16 || std::memcmp(blob.data(), kCheckpointMagic, 8) != 0) {
    corrupt(path, "not a HeadingNet checkpoint (bad magic)");
  }
  const std::uint64_t hlen = get_u64(blob.data() + 8);
  if (hlen > blob.size() - 16) corrupt(path, "header length exceeds file size");

  json header;
  HeadingNetConfig config;
  NormStats norm;
  std::vector<Tensor> params;
  std::string checksum;
  json metadata;
  try {
    header = json::parse(blob.begin() + 16, blob.begin() + 16 + static_cast<std::ptrdiff_t>(hlen));
    if (header.at("format_version") != "1") {
      corrupt(path, "unsupported format version " + header.at("format_version").dump());
    }
    config = config_from_json(header.at("config"));
    norm.mean = header.at("norm").at("mean").get<std::array<double, kInputChannels>>();
    norm.stddev = header.at("norm").at("stddev").get<std::array<double, kInputChannels>>();
    const std::size_t count = header.at("count").get<std::size_t>();
    if (blob.size() - 16 - hlen != count * 8) {
      corrupt(path, "expected " + std::to_string(count) + " parameters, payload holds " +
                        std::to_string((blob.size() - 16 - hlen) / 8));
    }
    const char* data = blob.data() + 16 + hlen;
    for (const json& entry : header.at("params")) {
      Tensor t(entry.at("shape").get<Shape>());
      const std::size_t off = entry.at("offset").get<std::size_t>();
      if (off + t.size() > count) corrupt(path, entry.at("name").get<std::string>() + " lies outside the payload");
      for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = std::bit_cast<double>(get_u64(data + 8 * (off + i)));
      }
      params.push_back(std::move(t));
    }
    checksum = header.at("checksum").get<std::string>();
    metadata = header.value("metadata", json::object());
  } catch (const json::exception& e) {
    corrupt(path, std::string("malformed header: ") + e.what());
  }

  HeadingNet model = HeadingNet::from_parts(config, std::move(params), norm);
  if (model.checksum() != checksum) {
    corrupt(path, "checksum mismatch (stored " + checksum + ", computed " + model.checksum() + ")");
  }
  return {std::move(model), std::move(metadata)};
}

}  // namespace headalign::nn
