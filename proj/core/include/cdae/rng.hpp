#pragma once

#include <cstdint>
#include <random>

namespace cdae {

/// Seeded random stream. The engine is std::mt19937_64, whose output
/// sequence is fixed by the standard; all distributions are derived here
/// from raw 64-bit draws so the value stream is identical on every
/// platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, n). Unbiased (rejection sampling). n > 0.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller (one value per call, no caching).
  double normal();

  /// Independent child stream keyed by (seed, stream).
  Rng derive(std::uint64_t stream) const { return Rng(mix(seed_, stream)); }

  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) noexcept;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace cdae
