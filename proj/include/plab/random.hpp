#pragma once

#include <cstdint>
#include <random>

namespace plab {

/// Seeded generator used by every sampler in the project: MT19937-64 with
/// the raw 64-bit output mapped to [0,1) by taking its top 53 bits. The
/// mapping is spelled out (instead of std::uniform_real_distribution) so
/// that samples are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : engine_() % n; }
  /// Derives an independent child seed (for per-item streams).
  std::uint64_t split() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace plab
