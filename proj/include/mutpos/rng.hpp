#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>

namespace mutpos {

// Splittable counter-based PRNG (splitmix64 core). A stream is identified by
// a key derived from the master seed plus labels/indices, so the same
// (seed, label, ...) derivation always yields the same draw sequence,
// independent of when or where the stream is consumed.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : key_(finalize(seed ^ kSeedTag)), state_(0) {}

  // Derives an independent child stream. Children depend only on the parent's
  // key, never on how many draws the parent has made.
  [[nodiscard]] RngStream stream(std::string_view label) const {
    return RngStream(finalize(key_ ^ fnv1a(label)), RawKey{});
  }
  [[nodiscard]] RngStream stream(std::uint64_t index) const {
    return RngStream(finalize(key_ ^ (index * kGamma + kIndexTag)), RawKey{});
  }

  std::uint64_t next_u64() {
    state_ += kGamma;
    return finalize(key_ + state_);
  }

  // Uniform double in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard Box-Muller; two uniforms per variate.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, n), n >= 1. Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % n;
    std::uint64_t r = next_u64();
    while (r >= limit) r = next_u64();
    return r % n;
  }

 private:
  struct RawKey {};
  RngStream(std::uint64_t key, RawKey) : key_(key), state_(0) {}

  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  static constexpr std::uint64_t kSeedTag = 0x5bd1e995cafebabeULL;
  static constexpr std::uint64_t kIndexTag = 0x27d4eb2f165667c5ULL;
  static constexpr double kPi = 3.141592653589793238462643383279502884;

  static constexpr std::uint64_t finalize(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  static constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  std::uint64_t key_;
  std::uint64_t state_;
};

}  // namespace mutpos
