// Central finite-difference checks for the nn layers and HeadingNet10,
// shared by the unit tests and the acceptance binary.
#pragma once

#include <cstdint>

namespace headalign::testing {

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

/// |a - n| / max(|a|, |n|, floor): relative error, with gradients smaller
/// than `floor` compared on an absolute scale.
double rel_error(double analytic, double numeric, double floor = 1e-3);

// Each check draws a seeded random instance, reduces the layer output with a
// random cotangent r (L = sum r*y) and compares every analytic partial of L
// (inputs and parameters) with a central difference.
GradCheck check_conv2d(std::uint64_t seed);
GradCheck check_maxpool(std::uint64_t seed);
GradCheck check_leaky_relu(std::uint64_t seed);
GradCheck check_tanh(std::uint64_t seed);
GradCheck check_dropout(std::uint64_t seed);
GradCheck check_linear(std::uint64_t seed);

/// Full HeadingNet10 forward/backward (training mode, fixed dropout masks)
/// on one random window, `probes` randomly chosen parameters.
GradCheck check_headingnet10(std::uint64_t seed, std::size_t probes = 25);

}  // namespace headalign::testing
