#include "headalign/nn/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "headalign/error.hpp"
#include "headalign/random.hpp"
#include "headalign/strapdown.hpp"

namespace headalign::nn {

namespace {

constexpr double kTimeEps = 1e-6;

// Aiding-rate feature rows of one segment: 12 channels by m samples.
struct SegmentFeatures {
  Tensor features;  ///< (12, m)
  std::vector<Angle> labels;
  std::vector<double> times;
  int aid_rate = 0;
};

SegmentFeatures segment_features(const Segment& seg) {
  if (seg.rec == nullptr) throw Error(ErrorCode::kInvalidArgument, "segment without recording");
  const Recording& rec = *seg.rec;
  const ScenarioConfig& cfg = rec.meta.scenario;
  const auto ratio = static_cast<std::size_t>(cfg.rate_ratio());

  auto aid_lo = std::lower_bound(rec.aid.begin(), rec.aid.end(), seg.t_begin - kTimeEps,
                                 [](const NavAidSample& a, double t) { return a.t < t; });
  auto aid_hi = std::lower_bound(aid_lo, rec.aid.end(), seg.t_end - kTimeEps,
                                 [](const NavAidSample& a, double t) { return a.t < t; });
  std::vector<const NavAidSample*> aid;
  std::vector<std::size_t> imu_start;
  for (auto it = aid_lo; it != aid_hi; ++it) {
    auto k = std::lower_bound(rec.imu.begin(), rec.imu.end(), it->t - kTimeEps,
                              [](const ImuSample& s, double t) { return s.t < t; });
    if (k == rec.imu.end() || std::abs(k->t - it->t) > kTimeEps) {
      throw Error(ErrorCode::kAlignmentWindow, "recording '" + rec.name() +
                                                   "': no IMU sample at aiding time " +
                                                   std::to_string(it->t));
    }
    const auto idx = static_cast<std::size_t>(k - rec.imu.begin());
    if (idx + ratio > rec.imu.size() || rec.imu[idx + ratio - 1].t >= seg.t_end - kTimeEps) break;
    aid.push_back(&*it);
    imu_start.push_back(idx);
  }

  const std::size_t m = aid.size();
  Tensor raw({kInputRows, m * ratio});
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < ratio; ++i) {
      const ImuSample& s = rec.imu[imu_start[j] + i];
      const std::size_t col = j * ratio + i;
      for (std::size_t a = 0; a < 3; ++a) {
        raw[a * m * ratio + col] = s.omega_ib_b[static_cast<Eigen::Index>(a)];
        raw[(a + 3) * m * ratio + col] = s.f_b[static_cast<Eigen::Index>(a)];
      }
    }
  }
  SegmentFeatures out;
  out.aid_rate = cfg.aid_rate;
  out.features = Tensor({kInputChannels, m});
  if (m > 0) {
    const Tensor pooled = avgpool_rate_match(raw, ratio);
    std::copy(pooled.values().begin(), pooled.values().end(), out.features.values().begin());
  }
  const NavRateModel model;
  for (std::size_t j = 0; j < m; ++j) {
    const Vec3 w = model.omega_in_n(aid[j]->lat);
    const Vec3 g = model.g_n(aid[j]->lat);
    for (std::size_t a = 0; a < 3; ++a) {
      out.features[(6 + a) * m + j] = w[static_cast<Eigen::Index>(a)];
      out.features[(9 + a) * m + j] = g[static_cast<Eigen::Index>(a)];
    }
    out.labels.push_back(aid[j]->heading_gt);
    out.times.push_back(aid[j]->t);
  }
  return out;
}

std::vector<std::size_t> start_indices(std::size_t m, int aid_rate, int t_align, WindowMode mode) {
  const auto len = static_cast<std::size_t>(aid_rate * t_align);
  const auto stride = mode == WindowMode::kTrain ? static_cast<std::size_t>(aid_rate) : len;
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + len <= m; s += stride) starts.push_back(s);
  return starts;
}

void check_segment(const Segment& seg, int t_align) {
  if (seg.t_end - seg.t_begin + kTimeEps < t_align) {
    throw Error(ErrorCode::kInsufficientData,
                "segment [" + std::to_string(seg.t_begin) + ", " + std::to_string(seg.t_end) +
                    ") of '" + (seg.rec ? seg.rec->name() : std::string("?")) +
                    "' is shorter than the " + std::to_string(t_align) + " s window");
  }
}

}  // namespace

std::vector<double> window_starts(const Segment& seg, int t_align, WindowMode mode) {
  check_segment(seg, t_align);
  const SegmentFeatures f = segment_features(seg);
  std::vector<double> out;
  for (std::size_t s : start_indices(f.times.size(), f.aid_rate, t_align, mode)) {
    out.push_back(f.times[s]);
  }
  return out;
}

NormStats compute_norm_stats(const std::vector<Segment>& segments) {
  std::array<double, kInputChannels> sum{}, sum2{};
  double count = 0.0;
  std::vector<SegmentFeatures> feats;
  for (const Segment& seg : segments) feats.push_back(segment_features(seg));
  for (const SegmentFeatures& f : feats) {
    const std::size_t m = f.times.size();
    for (std::size_t c = 0; c < kInputChannels; ++c) {
      for (std::size_t j = 0; j < m; ++j) sum[c] += f.features[c * m + j];
    }
    count += static_cast<double>(m);
  }
  if (count == 0.0) throw Error(ErrorCode::kInsufficientData, "normalization: no samples");
  NormStats n;
  for (std::size_t c = 0; c < kInputChannels; ++c) n.mean[c] = sum[c] / count;
  for (const SegmentFeatures& f : feats) {
    const std::size_t m = f.times.size();
    for (std::size_t c = 0; c < kInputChannels; ++c) {
      for (std::size_t j = 0; j < m; ++j) {
        const double d = f.features[c * m + j] - n.mean[c];
        sum2[c] += d * d;
      }
    }
  }
  for (std::size_t c = 0; c < kInputChannels; ++c) {
    const double sd = std::sqrt(sum2[c] / count);
    n.stddev[c] = (sd == 0.0 || sd < 1e-6 * std::abs(n.mean[c])) ? 1.0 : sd;
  }
  return n;
}

WindowSet make_windows(const std::vector<Segment>& segments, int t_align, WindowMode mode,
                       std::uint64_t seed, const NormStats* stats) {
  if (mode == WindowMode::kEval && stats == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "eval windows need the model's normalization statistics");
  }
  for (const Segment& seg : segments) check_segment(seg, t_align);
  WindowSet set;
  set.t_align = t_align;
  set.stats = stats ? *stats : compute_norm_stats(segments);

  for (const Segment& seg : segments) {
    const SegmentFeatures f = segment_features(seg);
    const std::size_t m = f.times.size();
    const auto len = static_cast<std::size_t>(f.aid_rate * t_align);
    for (std::size_t s : start_indices(m, f.aid_rate, t_align, mode)) {
      Window w;
      w.head1 = Tensor({1, kInputRows, len});
      w.head2 = Tensor({1, kInputRows, len});
      for (std::size_t c = 0; c < kInputChannels; ++c) {
        Tensor& dst = c < kInputRows ? w.head1 : w.head2;
        const std::size_t row = c % kInputRows;
        const double mean = set.stats.mean[c];
        const double sd = set.stats.stddev[c];
        for (std::size_t j = 0; j < len; ++j) {
          dst[row * len + j] = (f.features[c * m + s + j] - mean) / sd;
        }
      }
      w.label = f.labels[s + len - 1];
      w.recording = seg.rec->name();
      w.t_begin = f.times[s];
      set.windows.push_back(std::move(w));
    }
  }
  if (mode == WindowMode::kTrain) {
    Rng rng = Rng::derive(seed, "window_shuffle");
    rng.shuffle(set.windows.begin(), set.windows.end());
  }
  return set;
}

}  // namespace headalign::nn
