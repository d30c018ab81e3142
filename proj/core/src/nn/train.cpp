#include "headalign/nn/train.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "headalign/error.hpp"
#include "headalign/random.hpp"
#include "headalign/recording_io.hpp"

namespace headalign::nn {

TrainConfig default_train_config(int t_align, std::uint64_t seed) {
  TrainConfig c;
  c.seed = seed;
  switch (t_align) {
    case 10: c.epochs = 1000; c.loss_scale = 10; c.lr = 0.0009; c.weight_decay = 0.08; c.scheduler_step = 120; break;
    case 30: c.epochs = 1000; c.loss_scale = 10; c.lr = 0.0008; c.weight_decay = 0.08; c.scheduler_step = 120; break;
    case 60: c.epochs = 400; c.loss_scale = 10; c.lr = 0.0008; c.weight_decay = 0.08; c.scheduler_step = 80; break;
    case 90: c.epochs = 500; c.loss_scale = 100; c.lr = 0.0005; c.weight_decay = 0.8; c.scheduler_step = 150; break;
    case 120: c.epochs = 300; c.loss_scale = 10; c.lr = 0.0006; c.weight_decay = 0.08; c.scheduler_step = 50; break;
    default:
      throw Error(ErrorCode::kInvalidArgument, "no training defaults for variation " + std::to_string(t_align));
  }
  return c;
}

namespace {

bool all_finite(const std::vector<Tensor>& ts) {
  for (const Tensor& t : ts) {
    if (!t.all_finite()) return false;
  }
  return true;
}

}  // namespace

std::vector<EpochRecord> train(HeadingNet& model, const WindowSet& data, const TrainConfig& cfg,
                               const EpochCallback& on_epoch) {
  if (cfg.epochs < 0) throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 0");
  if (cfg.batch_size == 0) throw Error(ErrorCode::kInvalidArgument, "batch size must be >= 1");
  std::vector<EpochRecord> history;
  if (cfg.epochs == 0) return history;
  if (data.windows.empty()) throw Error(ErrorCode::kInsufficientData, "no training windows");
  if (data.t_align != model.config().t_align) {
    throw Error(ErrorCode::kShape, "windows of " + std::to_string(data.t_align) +
                                       " s do not fit HeadingNet" +
                                       std::to_string(model.config().t_align));
  }
  model.set_norm(data.stats);

  const std::size_t n = data.windows.size();
  AdamWState state;
  std::vector<Tensor> grads = model.zero_grads();
  std::vector<std::size_t> order(n);
  Tape tape;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = steplr(cfg.lr, cfg.gamma, cfg.scheduler_step, epoch);
    const AdamWConfig opt{lr, cfg.weight_decay};
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng::derive(cfg.seed, {hash_name("epoch_order"), static_cast<std::uint64_t>(epoch)})
        .shuffle(order.begin(), order.end());

    double epoch_loss = 0.0;
    std::size_t batch = 0;
    for (std::size_t b0 = 0; b0 < n; b0 += cfg.batch_size, ++batch) {
      const std::size_t b1 = std::min(n, b0 + cfg.batch_size);
      const double count = static_cast<double>(b1 - b0);
      for (Tensor& g : grads) g.fill(0.0);
      double batch_loss = 0.0;
      for (std::size_t k = b0; k < b1; ++k) {
        const Window& w = data.windows[order[k]];
        const std::array<std::uint64_t, 4> key = {hash_name("dropout"),
                                                  static_cast<std::uint64_t>(epoch), batch, k - b0};
        Rng rng = Rng::derive(cfg.seed, {key[0], key[1], key[2], key[3]});
        const double pred = model.forward(w.head1, w.head2, true, &rng, &tape);
        const double target = w.label.radians();
        const LossResult l = cmse_loss({&pred, 1}, {&target, 1}, cfg.loss_scale);
        if (!std::isfinite(l.loss)) {
          Rng replay = Rng::derive(cfg.seed, {key[0], key[1], key[2], key[3]});
          std::string layer = model.first_nonfinite_stage(w.head1, w.head2, true, &replay);
          if (layer.empty()) layer = "loss";
          throw Error(ErrorCode::kNonFinite, "non-finite loss at epoch " + std::to_string(epoch) +
                                                 ", batch " + std::to_string(batch) +
                                                 ", layer " + layer);
        }
        batch_loss += l.loss;
        model.backward(tape, l.grad[0] / count, grads);
      }
      if (!all_finite(grads)) {
        throw Error(ErrorCode::kNonFinite, "non-finite gradient at epoch " + std::to_string(epoch) +
                                               ", batch " + std::to_string(batch));
      }
      adamw_step(model.params(), grads, state, opt);
      epoch_loss += batch_loss;
    }
    const EpochRecord rec{epoch, lr, epoch_loss / static_cast<double>(n)};
    history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return history;
}

double evaluate_loss(const HeadingNet& model, const WindowSet& data, double loss_scale) {
  if (data.windows.empty()) throw Error(ErrorCode::kInsufficientData, "no windows to evaluate");
  std::vector<double> pred, target;
  for (const Window& w : data.windows) {
    pred.push_back(model.forward(w.head1, w.head2, false, nullptr));
    target.push_back(w.label.radians());
  }
  return cmse_loss(pred, target, loss_scale).loss;
}

Angle predict_heading(const HeadingNet& model, const Window& w) {
  return Angle(model.forward(w.head1, w.head2, false, nullptr));
}

void write_history_csv(std::ostream& os, const std::vector<EpochRecord>& history) {
  os << "epoch,lr,train_loss\n";
  for (const EpochRecord& r : history) {
    os << r.epoch << ',' << format_double(r.lr) << ',' << format_double(r.train_loss) << '\n';
  }
}

}  // namespace headalign::nn
