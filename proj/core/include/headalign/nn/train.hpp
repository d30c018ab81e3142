// Mini-batch training of HeadingNet with AdamW, a step learning-rate
// schedule and the cyclic MSE loss.
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "headalign/nn/dataset.hpp"
#include "headalign/nn/headingnet.hpp"
#include "headalign/nn/optim.hpp"

namespace headalign::nn {

struct TrainConfig {
  int epochs = 0;
  std::size_t batch_size = 512;
  double loss_scale = 10.0;  ///< lambda of the cyclic MSE
  double lr = 1e-3;
  double weight_decay = 0.0;
  int scheduler_step = 100;
  double gamma = 0.8;
  std::uint64_t seed = 0;
};

/// Published hyperparameters for a variation (epochs, lambda, lr, decay,
/// scheduler step). Throws invalid-argument for unknown variations.
TrainConfig default_train_config(int t_align, std::uint64_t seed);

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;  ///< mean per-window loss with dropout active
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Trains `model` in place and returns one record per epoch. Zero epochs
/// leave the model untouched. Results depend only on the model, the data
/// and cfg.seed. A non-finite loss aborts with a non-finite error naming
/// the epoch, batch and first offending layer.
std::vector<EpochRecord> train(HeadingNet& model, const WindowSet& data, const TrainConfig& cfg,
                               const EpochCallback& on_epoch = {});

/// Mean cyclic loss of the model in eval mode.
double evaluate_loss(const HeadingNet& model, const WindowSet& data, double loss_scale);

/// Eval-mode prediction, wrapped to (-pi, pi].
Angle predict_heading(const HeadingNet& model, const Window& w);

/// CSV with header "epoch,lr,train_loss".
void write_history_csv(std::ostream& os, const std::vector<EpochRecord>& history);

}  // namespace headalign::nn
