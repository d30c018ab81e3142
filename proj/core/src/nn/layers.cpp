#include "headalign/nn/layers.hpp"

#include <cmath>
#include <string>

#include <Eigen/Core>

#include "headalign/error.hpp"

namespace headalign::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMap = Eigen::Map<RowMat>;
using ConstRowMap = Eigen::Map<const RowMat>;

void require_rank(const Tensor& t, std::size_t rank, std::string_view layer, const char* what) {
  if (t.rank() != rank) {
    throw Error(ErrorCode::kShape, std::string(layer) + ": " + what + " must have rank " +
                                       std::to_string(rank) + ", got " + shape_string(t.shape()));
  }
}

// Column matrix (Ci*kh*kw, Ho*Wo) of input patches.
RowMat im2col(const Tensor& x, std::size_t kh, std::size_t kw, std::size_t ho, std::size_t wo) {
  const std::size_t ci = x.dim(0);
  RowMat cols(ci * kh * kw, ho * wo);
  for (std::size_t c = 0; c < ci; ++c) {
    for (std::size_t i = 0; i < kh; ++i) {
      for (std::size_t j = 0; j < kw; ++j) {
        double* row = cols.row(static_cast<Eigen::Index>((c * kh + i) * kw + j)).data();
        for (std::size_t oh = 0; oh < ho; ++oh) {
          const double* src = &x.at(c, oh + i, j);
          for (std::size_t ow = 0; ow < wo; ++ow) row[oh * wo + ow] = src[ow];
        }
      }
    }
  }
  return cols;
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, std::string_view layer) {
  require_rank(x, 3, layer, "input");
  require_rank(w, 4, layer, "kernel");
  const std::size_t co = w.dim(0), ci = w.dim(1), kh = w.dim(2), kw = w.dim(3);
  if (x.dim(0) != ci) {
    throw Error(ErrorCode::kShape, std::string(layer) + ": input has " + std::to_string(x.dim(0)) +
                                       " channels, kernel expects " + std::to_string(ci));
  }
  if (kh > x.dim(1) || kw > x.dim(2)) {
    throw Error(ErrorCode::kShape, std::string(layer) + ": kernel " + shape_string({kh, kw}) +
                                       " larger than input " + shape_string(x.shape()));
  }
  if (b.rank() != 1 || b.dim(0) != co) {
    throw Error(ErrorCode::kShape, std::string(layer) + ": bias shape " + shape_string(b.shape()));
  }
  const std::size_t ho = x.dim(1) - kh + 1;
  const std::size_t wo = x.dim(2) - kw + 1;
  const RowMat cols = im2col(x, kh, kw, ho, wo);
  Tensor y({co, ho, wo});
  RowMap ym(y.data(), static_cast<Eigen::Index>(co), static_cast<Eigen::Index>(ho * wo));
  ConstRowMap wm(w.data(), static_cast<Eigen::Index>(co), static_cast<Eigen::Index>(ci * kh * kw));
  ym.noalias() = wm * cols;
  for (std::size_t o = 0; o < co; ++o) ym.row(static_cast<Eigen::Index>(o)).array() += b[o];
  return y;
}

Tensor conv2d_backward(const Tensor& x, const Tensor& w, const Tensor& dy, Tensor& dw, Tensor& db) {
  const std::size_t co = w.dim(0), ci = w.dim(1), kh = w.dim(2), kw = w.dim(3);
  const std::size_t ho = dy.dim(1), wo = dy.dim(2);
  const auto k = static_cast<Eigen::Index>(ci * kh * kw);
  const auto p = static_cast<Eigen::Index>(ho * wo);
  const RowMat cols = im2col(x, kh, kw, ho, wo);
  ConstRowMap dym(dy.data(), static_cast<Eigen::Index>(co), p);
  ConstRowMap wm(w.data(), static_cast<Eigen::Index>(co), k);
  RowMap dwm(dw.data(), static_cast<Eigen::Index>(co), k);
  dwm.noalias() += dym * cols.transpose();
  for (std::size_t o = 0; o < co; ++o) db[o] += dym.row(static_cast<Eigen::Index>(o)).sum();

  const RowMat dcols = wm.transpose() * dym;
  Tensor dx(x.shape());
  for (std::size_t c = 0; c < ci; ++c) {
    for (std::size_t i = 0; i < kh; ++i) {
      for (std::size_t j = 0; j < kw; ++j) {
        const double* row = dcols.row(static_cast<Eigen::Index>((c * kh + i) * kw + j)).data();
        for (std::size_t oh = 0; oh < ho; ++oh) {
          double* dst = &dx.at(c, oh + i, j);
          for (std::size_t ow = 0; ow < wo; ++ow) dst[ow] += row[oh * wo + ow];
        }
      }
    }
  }
  return dx;
}

PoolResult maxpool_1x2(const Tensor& x) {
  require_rank(x, 3, "maxpool", "input");
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2), wo = w / 2;
  if (wo == 0) throw Error(ErrorCode::kShape, "maxpool: input width < 2");
  PoolResult r{Tensor({c, h, wo}), std::vector<std::uint32_t>(c * h * wo)};
  std::size_t out = 0;
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t row = 0; row < h; ++row) {
      const std::size_t base = (ch * h + row) * w;
      for (std::size_t j = 0; j < wo; ++j, ++out) {
        const std::size_t a = base + 2 * j;
        const std::size_t pick = x[a + 1] > x[a] ? a + 1 : a;
        r.y[out] = x[pick];
        r.argmax[out] = static_cast<std::uint32_t>(pick);
      }
    }
  }
  return r;
}

Tensor maxpool_1x2_backward(const Tensor& dy, const std::vector<std::uint32_t>& argmax,
                            const Shape& x_shape) {
  Tensor dx(x_shape);
  for (std::size_t i = 0; i < dy.size(); ++i) dx[argmax[i]] += dy[i];
  return dx;
}

Tensor leaky_relu(const Tensor& x, double alpha) {
  Tensor y = x;
  for (double& v : y.values()) v = v > 0.0 ? v : alpha * v;
  return y;
}

Tensor leaky_relu_backward(const Tensor& x, const Tensor& dy, double alpha) {
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    if (!(x[i] > 0.0)) dx[i] *= alpha;
  }
  return dx;
}

Tensor tanh_forward(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.values()) v = std::tanh(v);
  return y;
}

Tensor tanh_backward(const Tensor& y, const Tensor& dy) {
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= 1.0 - y[i] * y[i];
  return dx;
}

DropoutResult dropout(const Tensor& x, double p, bool training, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "dropout: p must lie in [0, 1), got " + std::to_string(p));
  }
  DropoutResult r{x, Tensor(x.shape(), 1.0)};
  if (!training || p == 0.0) return r;
  const double scale = 1.0 / (1.0 - p);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = rng.uniform() >= p ? scale : 0.0;
    r.mask[i] = keep;
    r.y[i] = x[i] * keep;
  }
  return r;
}

Tensor dropout_backward(const Tensor& mask, const Tensor& dy) {
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= mask[i];
  return dx;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b, std::string_view layer) {
  if (w.rank() != 2 || x.size() != w.dim(1) || b.size() != w.dim(0)) {
    throw Error(ErrorCode::kShape, std::string(layer) + ": input " + shape_string(x.shape()) +
                                       ", weight " + shape_string(w.shape()) + ", bias " +
                                       shape_string(b.shape()));
  }
  const auto m = static_cast<Eigen::Index>(w.dim(0));
  const auto n = static_cast<Eigen::Index>(w.dim(1));
  Tensor y({w.dim(0)});
  Eigen::Map<Eigen::VectorXd> ym(y.data(), m);
  ym.noalias() = ConstRowMap(w.data(), m, n) * Eigen::Map<const Eigen::VectorXd>(x.data(), n);
  ym += Eigen::Map<const Eigen::VectorXd>(b.data(), m);
  return y;
}

Tensor linear_backward(const Tensor& x, const Tensor& w, const Tensor& dy, Tensor& dw, Tensor& db) {
  const auto m = static_cast<Eigen::Index>(w.dim(0));
  const auto n = static_cast<Eigen::Index>(w.dim(1));
  Eigen::Map<const Eigen::VectorXd> dym(dy.data(), m);
  Eigen::Map<const Eigen::VectorXd> xm(x.data(), n);
  RowMap(dw.data(), m, n).noalias() += dym * xm.transpose();
  Eigen::Map<Eigen::VectorXd>(db.data(), m) += dym;
  Tensor dx({w.dim(1)});
  Eigen::Map<Eigen::VectorXd>(dx.data(), n).noalias() = ConstRowMap(w.data(), m, n).transpose() * dym;
  return dx;
}

Tensor avgpool_rate_match(const Tensor& x, std::size_t k) {
  require_rank(x, 2, "avgpool", "input");
  const std::size_t rows = x.dim(0), n = x.dim(1);
  if (k == 0 || n % k != 0) {
    throw Error(ErrorCode::kShape, "avgpool: k=" + std::to_string(k) + " does not divide width " +
                                       std::to_string(n));
  }
  const std::size_t m = n / k;
  Tensor y({rows, m});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < k; ++i) s += x[r * n + j * k + i];
      y[r * m + j] = s / static_cast<double>(k);
    }
  }
  return y;
}

Tensor concat_height(const Tensor& a, const Tensor& b) {
  require_rank(a, 3, "concat", "first input");
  require_rank(b, 3, "concat", "second input");
  if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2)) {
    throw Error(ErrorCode::kShape, "concat: " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
  const std::size_t c = a.dim(0), ha = a.dim(1), hb = b.dim(1), w = a.dim(2);
  Tensor y({c, ha + hb, w});
  for (std::size_t ch = 0; ch < c; ++ch) {
    std::copy_n(&a.at(ch, 0, 0), ha * w, &y.at(ch, 0, 0));
    std::copy_n(&b.at(ch, 0, 0), hb * w, &y.at(ch, ha, 0));
  }
  return y;
}

void split_height(const Tensor& d, std::size_t height_a, Tensor& da, Tensor& db) {
  const std::size_t c = d.dim(0), h = d.dim(1), w = d.dim(2), hb = h - height_a;
  da = Tensor({c, height_a, w});
  db = Tensor({c, hb, w});
  for (std::size_t ch = 0; ch < c; ++ch) {
    std::copy_n(&d.at(ch, 0, 0), height_a * w, &da.at(ch, 0, 0));
    std::copy_n(&d.at(ch, height_a, 0), hb * w, &db.at(ch, 0, 0));
  }
}

}  // namespace headalign::nn
