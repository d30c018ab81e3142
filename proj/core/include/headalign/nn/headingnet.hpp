// HeadingNet: two convolutional heads (body-frame and navigation-frame
// inputs), a fusion head over their height-stacked outputs, and a fully
// connected regressor producing one heading angle.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "headalign/nn/layers.hpp"
#include "headalign/nn/tensor.hpp"

namespace headalign::nn {

/// Variations are named by their alignment time in seconds.
inline constexpr int kVariations[] = {10, 30, 60, 90, 120};

inline constexpr std::size_t kInputRows = 6;
inline constexpr std::size_t kInputChannels = 12;  ///< 6 per head

struct ConvSpec {
  std::size_t kh = 1;
  std::size_t kw = 1;
  bool pool = false;  ///< (1x2) max pool between conv and activation

  bool operator==(const ConvSpec&) const = default;
};

struct HeadingNetConfig {
  int t_align = 10;
  std::array<ConvSpec, 3> head;  ///< shared by heads 1 and 2
  ConvSpec fuse;                 ///< 64 -> 128
  std::optional<ConvSpec> fuse2;  ///< 128 -> 128
  double leaky_alpha = 0.05;
  double dropout = 0.2;
  std::size_t listed_fc_input = 512;  ///< first FC width as listed for the variation

  std::size_t input_width() const { return static_cast<std::size_t>(5 * t_align); }

  bool operator==(const HeadingNetConfig&) const = default;
};

inline constexpr std::array<std::size_t, 4> kHeadChannels = {1, 16, 32, 64};
inline constexpr std::size_t kFuseChannels = 128;
inline constexpr std::array<std::size_t, 4> kFcHidden = {512, 128, 32, 1};

/// Throws invalid-argument for variations outside kVariations.
HeadingNetConfig headingnet_config(int t_align);

/// Per-channel input standardization: rows 0-5 feed head 1, 6-11 head 2.
struct NormStats {
  std::array<double, kInputChannels> mean{};
  std::array<double, kInputChannels> stddev{};

  static NormStats identity();
  bool operator==(const NormStats&) const = default;
};

/// Cached activations of one forward pass, consumed by backward().
struct Tape {
  struct ConvStage {
    Tensor input;
    Tensor conv_out;
    std::vector<std::uint32_t> argmax;
    Tensor act_in;  ///< LeakyReLU input (pooled output when pool is set)
  };
  struct FcStage {
    Tensor input;
    Tensor tanh_out;
    Tensor mask;
  };
  std::array<std::vector<ConvStage>, 2> heads;
  std::size_t head1_height = 0;
  std::vector<ConvStage> fuse;
  Shape fuse_out_shape;
  std::vector<FcStage> fc;
  Tensor last_input;
};

class HeadingNet {
 public:
  /// Weights uniform in +-sqrt(6/fan_in) from streams derived from `seed`;
  /// biases zero.
  static HeadingNet build(int t_align, std::uint64_t seed);
  static HeadingNet build(const HeadingNetConfig& config, std::uint64_t seed);

  const HeadingNetConfig& config() const { return config_; }
  std::size_t flatten_size() const { return flatten_size_; }
  std::size_t parameter_count() const;

  std::vector<Tensor>& params() { return params_; }
  const std::vector<Tensor>& params() const { return params_; }
  const std::vector<std::string>& param_names() const { return names_; }
  /// Zero tensors matching every parameter.
  std::vector<Tensor> zero_grads() const;

  const NormStats& norm() const { return norm_; }
  void set_norm(const NormStats& n) { norm_ = n; }

  /// Inputs are normalized (1, 6, 5*t_align) tensors. In training mode
  /// dropout draws from `rng`; in eval mode the pass is deterministic and
  /// `rng` may be null. When `tape` is set, activations are recorded.
  double forward(const Tensor& head1, const Tensor& head2, bool training, Rng* rng,
                 Tape* tape = nullptr) const;

  /// Accumulates d(out)/d(theta) * dout into `grads`.
  void backward(const Tape& tape, double dout, std::vector<Tensor>& grads) const;

  /// Name of the first stage whose output is non-finite, or empty.
  std::string first_nonfinite_stage(const Tensor& head1, const Tensor& head2, bool training,
                                    Rng* rng) const;

  /// FNV-1a digest over the raw parameter bytes, 16 hex digits.
  std::string checksum() const;

  /// Assembles a model from stored parts; validates shapes against config.
  static HeadingNet from_parts(const HeadingNetConfig& config, std::vector<Tensor> params,
                               const NormStats& norm);

 private:
  void layout();
  std::size_t conv_index(std::size_t head, std::size_t layer) const;

  HeadingNetConfig config_;
  std::vector<Tensor> params_;
  std::vector<std::string> names_;
  NormStats norm_ = NormStats::identity();
  std::size_t flatten_size_ = 0;
  std::size_t fuse_index_ = 0;
  std::size_t fc_index_ = 0;
};

}  // namespace headalign::nn
