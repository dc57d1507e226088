#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace autocrop {

/// Derives an independent child seed from a parent seed and up to two
/// stream identifiers (splitmix64 finalizer).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept;

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Seeded generator with platform-independent distributions.
///
/// The standard <random> distributions are implementation-defined, so any
/// value that ends up in a model file or dataset is drawn through the helpers
/// here instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);

  /// Uniform integer in [lo, hi] inclusive.
  int between(int lo, int hi);

 private:
  std::mt19937_64 engine_;
};

}  // namespace autocrop
