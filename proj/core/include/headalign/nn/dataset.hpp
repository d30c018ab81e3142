// Window extraction for HeadingNet: each window pairs a body-frame input
// (gyro and accelerometer rows, averaged down to the aiding rate) with a
// navigation-frame input (transport rate and gravity rows at the aiding
// rate), labelled by the last reference heading inside the window.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "headalign/mooring_sim.hpp"
#include "headalign/nn/headingnet.hpp"

namespace headalign::nn {

enum class WindowMode { kTrain, kEval };

/// [t_begin, t_end) of one recording, absolute times.
struct Segment {
  const Recording* rec = nullptr;
  double t_begin = 0.0;
  double t_end = 0.0;
};

struct Window {
  Tensor head1;  ///< (1, 6, 5*t_align), normalized
  Tensor head2;  ///< (1, 6, 5*t_align), normalized
  Angle label;
  std::string recording;
  double t_begin = 0.0;  ///< absolute start time [s]
};

struct WindowSet {
  int t_align = 0;
  std::vector<Window> windows;
  NormStats stats;
};

/// Window start times inside a segment: stride 1 s (train) or t_align (eval).
std::vector<double> window_starts(const Segment& seg, int t_align, WindowMode mode);

/// Mean and standard deviation per input channel over every aiding-rate
/// sample of the segments (each sample counted once). Channels whose
/// deviation is below 1e-6 of their magnitude keep unit scale.
NormStats compute_norm_stats(const std::vector<Segment>& segments);

/// Train mode: windows from all segments, shuffled with `seed`; statistics
/// are computed here unless `stats` is given. Eval mode: ordered windows,
/// normalized with `stats` (required).
WindowSet make_windows(const std::vector<Segment>& segments, int t_align, WindowMode mode,
                       std::uint64_t seed, const NormStats* stats = nullptr);

}  // namespace headalign::nn
