// Layer primitives with explicit backward passes. Feature maps are rank-3
// (channels, height, width); vectors are rank-1.
#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "headalign/nn/tensor.hpp"
#include "headalign/random.hpp"

namespace headalign::nn {

/// Valid cross-correlation, stride 1: x (Ci,H,W), w (Co,Ci,kh,kw), b (Co)
/// -> (Co, H-kh+1, W-kw+1). `layer` names the layer in shape errors.
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, std::string_view layer = "conv2d");

/// Accumulates dL/dw and dL/db into `dw`, `db`; returns dL/dx.
Tensor conv2d_backward(const Tensor& x, const Tensor& w, const Tensor& dy, Tensor& dw, Tensor& db);

struct PoolResult {
  Tensor y;
  std::vector<std::uint32_t> argmax;  ///< flat input index per output element
};

/// (1x2) max pool, stride 2 along width. An odd final column is dropped.
/// Ties route to the first element of the window.
PoolResult maxpool_1x2(const Tensor& x);
Tensor maxpool_1x2_backward(const Tensor& dy, const std::vector<std::uint32_t>& argmax,
                            const Shape& x_shape);

Tensor leaky_relu(const Tensor& x, double alpha);
Tensor leaky_relu_backward(const Tensor& x, const Tensor& dy, double alpha);

Tensor tanh_forward(const Tensor& x);
/// Takes the forward output y: dx = dy * (1 - y^2).
Tensor tanh_backward(const Tensor& y, const Tensor& dy);

struct DropoutResult {
  Tensor y;
  Tensor mask;  ///< 0 or 1/(1-p) per element
};

/// Inverted dropout. In eval mode, or with p = 0, the input passes through.
/// Throws invalid-argument unless 0 <= p < 1.
DropoutResult dropout(const Tensor& x, double p, bool training, Rng& rng);
Tensor dropout_backward(const Tensor& mask, const Tensor& dy);

/// y = W x + b with x (n), W (m,n), b (m).
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b, std::string_view layer = "linear");
/// Accumulates into dw, db; returns dL/dx.
Tensor linear_backward(const Tensor& x, const Tensor& w, const Tensor& dy, Tensor& dw, Tensor& db);

/// Non-overlapping mean over blocks of k along the last axis of a rank-2
/// (rows, n) tensor. Throws shape error unless k divides n.
Tensor avgpool_rate_match(const Tensor& x, std::size_t k);

/// Stacks two rank-3 tensors with equal channels and width along height.
Tensor concat_height(const Tensor& a, const Tensor& b);
/// Splits a gradient produced for concat_height back into its two parts.
void split_height(const Tensor& d, std::size_t height_a, Tensor& da, Tensor& db);

}  // namespace headalign::nn
