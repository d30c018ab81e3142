#include "headalign/nn/headingnet.hpp"

#include <cmath>

#include "headalign/error.hpp"
#include "headalign/random.hpp"

namespace headalign::nn {

HeadingNetConfig headingnet_config(int t_align) {
  HeadingNetConfig c;
  c.t_align = t_align;
  switch (t_align) {
    case 10:
      c.head = {{{2, 10, true}, {2, 7, true}, {2, 5, false}}};
      c.fuse = {3, 3, false};
      c.listed_fc_input = 512;
      break;
    case 30:
      c.head = {{{2, 30, true}, {2, 22, true}, {2, 15, false}}};
      c.fuse = {2, 3, false};
      c.fuse2 = ConvSpec{2, 3, false};
      c.listed_fc_input = 512;
      break;
    case 60:
      c.head = {{{2, 60, true}, {2, 45, true}, {2, 30, false}}};
      c.fuse = {2, 6, false};
      c.fuse2 = ConvSpec{2, 3, false};
      c.listed_fc_input = 1024;
      break;
    case 90:
      c.head = {{{2, 90, true}, {2, 67, true}, {2, 45, true}}};
      c.fuse = {2, 4, false};
      c.fuse2 = ConvSpec{2, 3, false};
      c.leaky_alpha = 0.1;
      c.listed_fc_input = 512;
      break;
    case 120:
      c.head = {{{2, 120, true}, {2, 90, true}, {2, 60, true}}};
      c.fuse = {2, 5, false};
      c.fuse2 = ConvSpec{2, 3, false};
      c.dropout = 0.3;
      c.listed_fc_input = 1024;
      break;
    default:
      throw Error(ErrorCode::kInvalidArgument,
                  "unknown HeadingNet variation " + std::to_string(t_align) +
                      " (expected 10, 30, 60, 90 or 120)");
  }
  return c;
}

NormStats NormStats::identity() {
  NormStats n;
  n.mean.fill(0.0);
  n.stddev.fill(1.0);
  return n;
}

namespace {

struct Extent {
  std::size_t h;
  std::size_t w;
};

Extent apply(const ConvSpec& s, Extent e, const std::string& name) {
  if (s.kh > e.h || s.kw > e.w) {
    throw Error(ErrorCode::kShape, name + ": kernel (" + std::to_string(s.kh) + "x" +
                                       std::to_string(s.kw) + ") larger than input (" +
                                       std::to_string(e.h) + "x" + std::to_string(e.w) + ")");
  }
  e.h -= s.kh - 1;
  e.w -= s.kw - 1;
  if (s.pool) e.w /= 2;
  if (e.w == 0) throw Error(ErrorCode::kShape, name + ": pooling leaves no columns");
  return e;
}

Tensor as_vector(const Tensor& t) { return t.reshaped({t.size()}); }

}  // namespace

std::size_t HeadingNet::conv_index(std::size_t head, std::size_t layer) const {
  return (head * 3 + layer) * 2;
}

void HeadingNet::layout() {
  params_.clear();
  names_.clear();
  auto add = [&](std::string name, Shape shape) {
    names_.push_back(std::move(name));
    params_.emplace_back(std::move(shape));
  };

  Extent head_out{};
  for (std::size_t h = 0; h < 2; ++h) {
    Extent e{kInputRows, config_.input_width()};
    for (std::size_t l = 0; l < 3; ++l) {
      const ConvSpec& s = config_.head[l];
      const std::string name = "head" + std::to_string(h + 1) + ".conv" + std::to_string(l + 1);
      e = apply(s, e, name);
      add(name + ".weight", {kHeadChannels[l + 1], kHeadChannels[l], s.kh, s.kw});
      add(name + ".bias", {kHeadChannels[l + 1]});
    }
    head_out = e;
  }

  fuse_index_ = params_.size();
  Extent e{2 * head_out.h, head_out.w};
  e = apply(config_.fuse, e, "fuse.conv4");
  add("fuse.conv4.weight", {kFuseChannels, kHeadChannels[3], config_.fuse.kh, config_.fuse.kw});
  add("fuse.conv4.bias", {kFuseChannels});
  if (config_.fuse2) {
    e = apply(*config_.fuse2, e, "fuse.conv5");
    add("fuse.conv5.weight", {kFuseChannels, kFuseChannels, config_.fuse2->kh, config_.fuse2->kw});
    add("fuse.conv5.bias", {kFuseChannels});
  }
  flatten_size_ = kFuseChannels * e.h * e.w;

  fc_index_ = params_.size();
  std::size_t in = flatten_size_;
  for (std::size_t i = 0; i < kFcHidden.size(); ++i) {
    const std::string name = "fc" + std::to_string(i + 1);
    add(name + ".weight", {kFcHidden[i], in});
    add(name + ".bias", {kFcHidden[i]});
    in = kFcHidden[i];
  }
}

HeadingNet HeadingNet::build(int t_align, std::uint64_t seed) {
  return build(headingnet_config(t_align), seed);
}

HeadingNet HeadingNet::build(const HeadingNetConfig& config, std::uint64_t seed) {
  HeadingNet net;
  net.config_ = config;
  net.layout();
  for (std::size_t i = 0; i < net.params_.size(); ++i) {
    Tensor& p = net.params_[i];
    if (p.rank() == 1) continue;  // biases start at zero
    std::size_t fan_in = 1;
    for (std::size_t d = 1; d < p.rank(); ++d) fan_in *= p.dim(d);
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    Rng rng = Rng::derive(seed, {hash_name("init"), i});
    for (double& v : p.values()) v = rng.uniform(-bound, bound);
  }
  return net;
}

HeadingNet HeadingNet::from_parts(const HeadingNetConfig& config, std::vector<Tensor> params,
                                  const NormStats& norm) {
  HeadingNet net;
  net.config_ = config;
  net.layout();
  if (params.size() != net.params_.size()) {
    throw Error(ErrorCode::kShape, "model expects " + std::to_string(net.params_.size()) +
                                       " parameter tensors, got " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].shape() != net.params_[i].shape()) {
      throw Error(ErrorCode::kShape, net.names_[i] + ": expected " +
                                         shape_string(net.params_[i].shape()) + ", got " +
                                         shape_string(params[i].shape()));
    }
  }
  net.params_ = std::move(params);
  net.norm_ = norm;
  return net;
}

std::size_t HeadingNet::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor& p : params_) n += p.size();
  return n;
}

std::vector<Tensor> HeadingNet::zero_grads() const {
  std::vector<Tensor> g;
  g.reserve(params_.size());
  for (const Tensor& p : params_) g.emplace_back(p.shape());
  return g;
}

double HeadingNet::forward(const Tensor& head1, const Tensor& head2, bool training, Rng* rng,
                           Tape* tape) const {
  const Shape expected{1, kInputRows, config_.input_width()};
  for (const Tensor* in : {&head1, &head2}) {
    if (in->shape() != expected) {
      throw Error(ErrorCode::kShape, "HeadingNet" + std::to_string(config_.t_align) +
                                         ": input shape " + shape_string(in->shape()) +
                                         ", expected " + shape_string(expected));
    }
  }
  if (training && rng == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "HeadingNet: training-mode forward needs an rng");
  }
  if (tape) *tape = Tape{};
  const double alpha = config_.leaky_alpha;

  auto conv_stage = [&](const Tensor& x, std::size_t pi, const ConvSpec& spec,
                        const std::string& name, std::vector<Tape::ConvStage>* rec) {
    Tensor z = conv2d(x, params_[pi], params_[pi + 1], name);
    PoolResult pooled;
    if (spec.pool) pooled = maxpool_1x2(z);
    const Tensor& act_in = spec.pool ? pooled.y : z;
    Tensor a = leaky_relu(act_in, alpha);
    if (rec) {
      Tape::ConvStage s;
      s.input = x;
      s.act_in = act_in;
      if (spec.pool) {
        s.conv_out = std::move(z);
        s.argmax = std::move(pooled.argmax);
      }
      rec->push_back(std::move(s));
    }
    return a;
  };

  std::array<Tensor, 2> outs;
  const std::array<const Tensor*, 2> inputs = {&head1, &head2};
  for (std::size_t h = 0; h < 2; ++h) {
    Tensor a = *inputs[h];
    for (std::size_t l = 0; l < 3; ++l) {
      a = conv_stage(a, conv_index(h, l), config_.head[l],
                     "head" + std::to_string(h + 1) + ".conv" + std::to_string(l + 1),
                     tape ? &tape->heads[h] : nullptr);
    }
    outs[h] = std::move(a);
  }
  if (tape) tape->head1_height = outs[0].dim(1);

  Tensor a = concat_height(outs[0], outs[1]);
  a = conv_stage(a, fuse_index_, config_.fuse, "fuse.conv4", tape ? &tape->fuse : nullptr);
  if (config_.fuse2) {
    a = conv_stage(a, fuse_index_ + 2, *config_.fuse2, "fuse.conv5", tape ? &tape->fuse : nullptr);
  }
  if (tape) tape->fuse_out_shape = a.shape();
  a = as_vector(a);

  Rng eval_rng(0);
  for (std::size_t i = 0; i + 1 < kFcHidden.size(); ++i) {
    const std::size_t pi = fc_index_ + 2 * i;
    Tensor z = linear(a, params_[pi], params_[pi + 1], names_[pi]);
    Tensor t = tanh_forward(z);
    DropoutResult d = dropout(t, config_.dropout, training, training ? *rng : eval_rng);
    if (tape) tape->fc.push_back({std::move(a), std::move(t), std::move(d.mask)});
    a = std::move(d.y);
  }
  const std::size_t last = fc_index_ + 2 * (kFcHidden.size() - 1);
  const Tensor y = linear(a, params_[last], params_[last + 1], names_[last]);
  if (tape) tape->last_input = std::move(a);
  return y[0];
}

void HeadingNet::backward(const Tape& tape, double dout, std::vector<Tensor>& grads) const {
  const double alpha = config_.leaky_alpha;
  const std::size_t last = fc_index_ + 2 * (kFcHidden.size() - 1);
  Tensor d = linear_backward(tape.last_input, params_[last], Tensor({1}, {dout}), grads[last],
                             grads[last + 1]);
  for (std::size_t i = tape.fc.size(); i-- > 0;) {
    const Tape::FcStage& s = tape.fc[i];
    const std::size_t pi = fc_index_ + 2 * i;
    d = dropout_backward(s.mask, d);
    d = tanh_backward(s.tanh_out, d);
    d = linear_backward(s.input, params_[pi], d, grads[pi], grads[pi + 1]);
  }
  d = d.reshaped(tape.fuse_out_shape);

  auto conv_back = [&](const Tape::ConvStage& s, std::size_t pi, const ConvSpec& spec,
                       const Tensor& dy) {
    Tensor g = leaky_relu_backward(s.act_in, dy, alpha);
    if (spec.pool) g = maxpool_1x2_backward(g, s.argmax, s.conv_out.shape());
    return conv2d_backward(s.input, params_[pi], g, grads[pi], grads[pi + 1]);
  };

  if (config_.fuse2) d = conv_back(tape.fuse[1], fuse_index_ + 2, *config_.fuse2, d);
  d = conv_back(tape.fuse[0], fuse_index_, config_.fuse, d);

  std::array<Tensor, 2> dh;
  split_height(d, tape.head1_height, dh[0], dh[1]);
  for (std::size_t h = 0; h < 2; ++h) {
    Tensor g = std::move(dh[h]);
    for (std::size_t l = 3; l-- > 0;) {
      g = conv_back(tape.heads[h][l], conv_index(h, l), config_.head[l], g);
    }
  }
}

std::string HeadingNet::first_nonfinite_stage(const Tensor& head1, const Tensor& head2,
                                              bool training, Rng* rng) const {
  if (!head1.all_finite()) return "input.head1";
  if (!head2.all_finite()) return "input.head2";
  Tape tape;
  const double y = forward(head1, head2, training, rng, &tape);
  for (std::size_t h = 0; h < 2; ++h) {
    for (std::size_t l = 0; l < tape.heads[h].size(); ++l) {
      if (!tape.heads[h][l].act_in.all_finite()) {
        return "head" + std::to_string(h + 1) + ".conv" + std::to_string(l + 1);
      }
    }
  }
  for (std::size_t l = 0; l < tape.fuse.size(); ++l) {
    if (!tape.fuse[l].act_in.all_finite()) return "fuse.conv" + std::to_string(l + 4);
  }
  for (std::size_t i = 0; i < tape.fc.size(); ++i) {
    if (!tape.fc[i].tanh_out.all_finite()) return "fc" + std::to_string(i + 1);
  }
  if (!std::isfinite(y)) return "fc" + std::to_string(kFcHidden.size());
  return {};
}

std::string HeadingNet::checksum() const {
  std::uint64_t h = kFnvOffset;
  for (const Tensor& p : params_) h = hash_bytes(p.data(), p.size() * sizeof(double), h);
  return hex64(h);
}

}  // namespace headalign::nn
