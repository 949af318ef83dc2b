#pragma once

#include <cstdint>

namespace holo {

/// Counter-based pseudo-random generator.
///
/// Draw k of a generator seeded with s is splitmix64(s + (k + 1) * golden),
/// i.e. the SplitMix64 finalizer applied to a Weyl sequence. The output is a
/// pure function of (seed, counter), so streams are reproducible across
/// platforms and independent streams can be derived with split().
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) noexcept : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_int(std::uint64_t n) noexcept;
  /// Standard normal via Box-Muller; consumes two uniforms per call.
  double normal() noexcept;

  /// Independent generator for sub-stream `stream`; does not advance this one.
  Rng split(std::uint64_t stream) const noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace holo
