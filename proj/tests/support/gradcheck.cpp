#include "gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "headalign/nn/headingnet.hpp"
#include "headalign/nn/layers.hpp"
#include "headalign/random.hpp"

namespace headalign::testing {

using nn::Tensor;

double rel_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

namespace {

Tensor random_tensor(nn::Shape shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = scale * rng.normal();
  return t;
}

// Values bounded away from zero, so kinks at 0 stay outside +-h.
Tensor kink_free_tensor(nn::Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) {
    const double m = rng.uniform(0.05, 1.5);
    v = rng.uniform() < 0.5 ? -m : m;
  }
  return t;
}

double dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Compares analytic gradient `g` of L w.r.t. tensor `x` against central
// differences of `loss` while perturbing x in place.
void compare(Tensor& x, const Tensor& g, const std::function<double()>& loss, double h,
             GradCheck& out) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = loss();
    x[i] = keep - h;
    const double down = loss();
    x[i] = keep;
    const double numeric = (up - down) / (2.0 * h);
    out.max_rel_error = std::max(out.max_rel_error, rel_error(g[i], numeric));
    ++out.checked;
  }
}

}  // namespace

GradCheck check_conv2d(std::uint64_t seed) {
  Rng rng = Rng::derive(seed, "gradcheck.conv2d");
  Tensor x = random_tensor({2, 5, 9}, rng);
  Tensor w = random_tensor({3, 2, 2, 4}, rng, 0.5);
  Tensor b = random_tensor({3}, rng);
  const Tensor r = random_tensor({3, 4, 6}, rng);
  Tensor dw(w.shape()), db(b.shape());
  const Tensor dx = nn::conv2d_backward(x, w, r, dw, db);
  const auto loss = [&] { return dot(r, nn::conv2d(x, w, b)); };
  GradCheck out;
  compare(x, dx, loss, 1e-6, out);
  compare(w, dw, loss, 1e-6, out);
  compare(b, db, loss, 1e-6, out);
  return out;
}

GradCheck check_maxpool(std::uint64_t seed) {
  Rng rng = Rng::derive(seed, "gradcheck.maxpool");
  // Distinct values with gaps well above h keep every window tie-free.
  Tensor x({2, 3, 11});
  std::vector<double> vals(x.size());
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = 0.01 * static_cast<double>(i);
  rng.shuffle(vals.begin(), vals.end());
  x.values() = vals;
  const nn::PoolResult p = nn::maxpool_1x2(x);
  const Tensor r = random_tensor(p.y.shape(), rng);
  const Tensor dx = nn::maxpool_1x2_backward(r, p.argmax, x.shape());
  GradCheck out;
  compare(x, dx, [&] { return dot(r, nn::maxpool_1x2(x).y); }, 1e-6, out);
  return out;
}

GradCheck check_leaky_relu(std::uint64_t seed) {
  Rng rng = Rng::derive(seed, "gradcheck.leaky_relu");
  Tensor x = kink_free_tensor({4, 3, 7}, rng);
  const Tensor r = random_tensor(x.shape(), rng);
  GradCheck out;
  for (double alpha : {0.05, 0.1}) {
    const Tensor dx = nn::leaky_relu_backward(x, r, alpha);
    compare(x, dx, [&] { return dot(r, nn::leaky_relu(x, alpha)); }, 1e-6, out);
  }
  return out;
}

GradCheck check_tanh(std::uint64_t seed) {
  Rng rng = Rng::derive(seed, "gradcheck.tanh");
  Tensor x = random_tensor({40}, rng);
  const Tensor r = random_tensor(x.shape(), rng);
  const Tensor dx = nn::tanh_backward(nn::tanh_forward(x), r);
  GradCheck out;
  compare(x, dx, [&] { return dot(r, nn::tanh_forward(x)); }, 1e-6, out);
  return out;
}

GradCheck check_dropout(std::uint64_t seed) {
  Rng rng = Rng::derive(seed, "gradcheck.dropout");
  Tensor x = random_tensor({64}, rng);
  const Tensor r = random_tensor(x.shape(), rng);
  const std::uint64_t mask_seed = rng.next_u64();
  const auto run = [&] {
    Rng m(mask_seed);
    return nn::dropout(x, 0.3, true, m);
  };
  const Tensor dx = nn::dropout_backward(run().mask, r);
  GradCheck out;
  compare(x, dx, [&] { return dot(r, run().y); }, 1e-6, out);
  return out;
}

GradCheck check_linear(std::uint64_t seed) {
  Rng rng = Rng::derive(seed, "gradcheck.linear");
  Tensor x = random_tensor({12}, rng);
  Tensor w = random_tensor({7, 12}, rng, 0.5);
  Tensor b = random_tensor({7}, rng);
  const Tensor r = random_tensor({7}, rng);
  Tensor dw(w.shape()), db(b.shape());
  const Tensor dx = nn::linear_backward(x, w, r, dw, db);
  const auto loss = [&] { return dot(r, nn::linear(x, w, b)); };
  GradCheck out;
  compare(x, dx, loss, 1e-6, out);
  compare(w, dw, loss, 1e-6, out);
  compare(b, db, loss, 1e-6, out);
  return out;
}

GradCheck check_headingnet10(std::uint64_t seed, std::size_t probes) {
  nn::HeadingNet net = nn::HeadingNet::build(10, seed);
  Rng rng = Rng::derive(seed, "gradcheck.headingnet");
  // Non-zero biases so no unit sits exactly on a LeakyReLU kink.
  for (Tensor& p : net.params()) {
    if (p.rank() == 1) {
      for (double& v : p.values()) v = 0.05 * rng.normal();
    }
  }
  const Tensor h1 = random_tensor({1, nn::kInputRows, 50}, rng);
  const Tensor h2 = random_tensor({1, nn::kInputRows, 50}, rng);
  const std::uint64_t drop_seed = rng.next_u64();
  const auto forward = [&](nn::Tape* tape) {
    Rng d(drop_seed);
    return net.forward(h1, h2, true, &d, tape);
  };

  nn::Tape tape;
  forward(&tape);
  std::vector<Tensor> grads = net.zero_grads();
  net.backward(tape, 1.0, grads);

  std::size_t total = net.parameter_count();
  GradCheck out;
  const double h = 1e-6;
  for (std::size_t k = 0; k < probes; ++k) {
    std::size_t flat = rng.below(total);
    std::size_t t = 0;
    while (flat >= net.params()[t].size()) flat -= net.params()[t++].size();
    double& v = net.params()[t][flat];
    const double keep = v;
    v = keep + h;
    const double up = forward(nullptr);
    v = keep - h;
    const double down = forward(nullptr);
    v = keep;
    const double numeric = (up - down) / (2.0 * h);
    out.max_rel_error = std::max(out.max_rel_error, rel_error(grads[t][flat], numeric, 1e-6));
    ++out.checked;
  }
  return out;
}

}  // namespace headalign::testing
