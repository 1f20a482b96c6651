// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace ermbridge {

// Counter-based SplitMix64 generator. Output i is a pure function of
// (key, i), so independent streams are derived by re-keying rather than by
// jumping shared state; every dataset generator and trajectory gets its own
// stream.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed + 0x9E3779B97F4A7C15ULL * (stream + 1))) {}

  std::uint64_t next_u64() {
    return mix(key_ + 0x9E3779B97F4A7C15ULL * ++counter_);
  }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  // Uniform integer in [0, n); n >= 1. Rejection keeps the draw unbiased.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Standard normal via Box-Muller; pairs are generated, the second cached.
  double next_gauss() {
    if (has_cache_) {
      has_cache_ = false;
      return cache_;
    }
    double u1 = 0.0;
    do {
      u1 = next_double();
    } while (u1 <= 0.0);
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    cache_ = r * std::sin(a);
    has_cache_ = true;
    return r * std::cos(a);
  }

  // Independent generator derived from this one's key and a stream id.
  SplitMix64 split(std::uint64_t stream_id) const {
    SplitMix64 out(0);
    out.key_ = mix(key_ ^ mix(stream_id + 0xD1B54A32D192ED03ULL));
    out.counter_ = 0;
    out.has_cache_ = false;
    return out;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  double cache_ = 0.0;
  bool has_cache_ = false;
};

}  // namespace ermbridge
