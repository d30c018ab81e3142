// Seeded, splittable pseudo-random streams.
//
// Every consumer derives its own stream from (seed, key...), so results never
// depend on call order between consumers or on thread scheduling.
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>
#include <string_view>

namespace headalign {

std::uint64_t splitmix64(std::uint64_t x);

/// FNV-1a over raw bytes, continuing from `h`.
inline constexpr std::uint64_t kFnvOffset = 0xCBF29CE484222325ULL;
std::uint64_t hash_bytes(const void* data, std::size_t n, std::uint64_t h = kFnvOffset);
/// FNV-1a over the bytes of a name; used to key named streams.
std::uint64_t hash_name(std::string_view name);
/// 16 lowercase hex digits.
std::string hex64(std::uint64_t v);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Independent stream keyed by a root seed and an ordered key list.
  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);
  static Rng derive(std::uint64_t seed, std::string_view name) {
    return derive(seed, {hash_name(name)});
  }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal by the Box-Muller transform (portable, unlike
  /// std::normal_distribution whose algorithm is implementation-defined).
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const std::uint64_t j = below(i);
      std::iter_swap(first + (i - 1), first + j);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace headalign
