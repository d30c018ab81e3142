// Loss, optimizer and learning-rate schedule.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "headalign/nn/tensor.hpp"

namespace headalign::nn {

struct LossResult {
  double loss = 0.0;
  std::vector<double> grad;  ///< dloss/dpred_i
};

/// Cyclic mean-square error: err_i = atan2(sin d_i, cos d_i) with
/// d_i = pred_i - target_i, loss = lambda * mean(err_i^2).
LossResult cmse_loss(std::span<const double> pred, std::span<const double> target, double lambda);

struct AdamWConfig {
  double lr = 1e-3;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamWState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::int64_t step = 0;
};

/// One AdamW update. The moment step uses bias-corrected estimates; the
/// decoupled decay theta -= lr * wd * theta is applied after it. Empty state
/// is initialized to zero moments on first use.
void adamw_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads, AdamWState& state,
                const AdamWConfig& cfg);

/// lr0 * gamma^floor(epoch / step_size), epoch counted from 0.
double steplr(double lr0, double gamma, int step_size, int epoch);

}  // namespace headalign::nn
