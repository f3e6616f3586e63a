#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string_view>
#include <vector>

namespace mbrdiv {

/// SplitMix64. Used instead of <random> engines+distributions because the
/// standard distributions are not reproducible across library implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform in [0, bound) by rejection sampling; bound > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % bound;
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

inline constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Counter-based stream for one (seed, instance, size, trial) cell, so results
/// never depend on evaluation order.
inline SplitMix64 keyed_stream(std::uint64_t seed, std::string_view instance_id, std::uint64_t size,
                               std::uint64_t trial) {
  std::uint64_t k = SplitMix64::mix(seed ^ 0x6A09E667F3BCC908ULL);
  k = SplitMix64::mix(k ^ fnv1a(instance_id));
  k = SplitMix64::mix(k ^ size);
  k = SplitMix64::mix(k ^ (trial * 0xD1B54A32D192ED03ULL));
  return SplitMix64(k);
}

/// `count` distinct indices from [0, population), ascending.
inline std::vector<std::size_t> sample_without_replacement(SplitMix64& rng, std::size_t population,
                                                           std::size_t count) {
  std::vector<std::size_t> pool(population);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t j = k + static_cast<std::size_t>(rng.below(population - k));
    std::swap(pool[k], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace mbrdiv
