#include "headalign/nn/optim.hpp"

#include <cmath>
#include <string>

#include "headalign/error.hpp"

namespace headalign::nn {

LossResult cmse_loss(std::span<const double> pred, std::span<const double> target, double lambda) {
  if (pred.empty() || pred.size() != target.size()) {
    throw Error(ErrorCode::kShape, "cmse_loss: " + std::to_string(pred.size()) + " predictions vs " +
                                       std::to_string(target.size()) + " targets");
  }
  const double n = static_cast<double>(pred.size());
  LossResult r;
  r.grad.resize(pred.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    const double err = std::atan2(std::sin(d), std::cos(d));
    sum += err * err;
    r.grad[i] = 2.0 * lambda * err / n;
  }
  r.loss = lambda * sum / n;
  return r;
}

void adamw_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads, AdamWState& state,
                const AdamWConfig& cfg) {
  if (params.size() != grads.size()) {
    throw Error(ErrorCode::kShape, "adamw: " + std::to_string(params.size()) + " parameters vs " +
                                       std::to_string(grads.size()) + " gradients");
  }
  if (state.m.empty()) {
    for (const Tensor& p : params) {
      state.m.emplace_back(p.shape());
      state.v.emplace_back(p.shape());
    }
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  const double decay = cfg.lr * cfg.weight_decay;
  for (std::size_t t = 0; t < params.size(); ++t) {
    Tensor& p = params[t];
    const Tensor& g = grads[t];
    if (g.shape() != p.shape() || state.m[t].shape() != p.shape()) {
      throw Error(ErrorCode::kShape, "adamw: parameter " + std::to_string(t) + " has shape " +
                                         shape_string(p.shape()) + ", gradient " +
                                         shape_string(g.shape()));
    }
    double* m = state.m[t].data();
    double* v = state.v[t].data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
      p[i] -= decay * p[i];
    }
  }
}

double steplr(double lr0, double gamma, int step_size, int epoch) {
  if (step_size < 1) throw Error(ErrorCode::kInvalidArgument, "steplr: step size must be >= 1");
  return lr0 * std::pow(gamma, epoch / step_size);
}

}  // namespace headalign::nn
