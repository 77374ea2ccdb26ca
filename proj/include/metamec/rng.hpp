#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace metamec {

/// Counter-based SplitMix64 stream keyed by (seed, label).
///
/// The key is derived as
///   key = mix64(seed ^ fnv1a64(label))
/// and the n-th output (n = 0, 1, ...) is
///   mix64(key + (n + 1) * 0x9E3779B97F4A7C15)
/// where mix64 is the SplitMix64 finalizer
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   z =  z ^ (z >> 31)
/// Uniform doubles take the top 53 bits: (x >> 11) * 2^-53, in [0, 1).
/// Everything is plain 64-bit unsigned arithmetic, so any language with
/// wrapping u64 can reproduce a stream bit for bit.
class RngStream {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  RngStream(std::uint64_t seed, std::string_view label)
      : seed_(seed), key_(mix64(seed ^ fnv1a64(label))) {}

  static constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001B3ULL;
    }
    return h;
  }

  std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGamma); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Exponential with unit mean; used for Rayleigh-faded power gains.
  double exponential() { return -std::log1p(-uniform()); }

  /// Uniform integer in [0, n). Multiply-shift, so tiny bias for huge n is
  /// acceptable here (n is an action count).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Child stream for a sub-component; independent of this stream's position.
  RngStream derive(std::string_view sublabel) const {
    RngStream child(seed_, "");
    child.key_ = mix64(key_ ^ fnv1a64(sublabel));
    return child;
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t draws() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace metamec
