#pragma once

#include <cstdint>
#include <vector>

#include "plab/orlicz.hpp"

namespace plab {

/// c + l.x + sum_k a_k cos(k_k . x + phase_k), with its exact gradient.
/// Used for seeded boundary data, stream-function potentials and smooth
/// manufactured solutions.
class TrigSeries {
 public:
  struct Term {
    double amplitude;
    Vec2 wave;
    double phase;
  };

  TrigSeries() = default;
  TrigSeries(double constant, Vec2 linear, std::vector<Term> terms)
      : constant_(constant), linear_(linear), terms_(std::move(terms)) {}

  /// sin(kx x) sin(ky y).
  static TrigSeries sin_product(double kx, double ky);
  /// `count` random terms with wave vectors of length <= max_wave and
  /// amplitudes in [-amplitude, amplitude], plus a random linear part of
  /// size <= slope.
  static TrigSeries random(std::uint64_t seed, int count, double max_wave, double amplitude,
                           double slope = 0.0);

  double value(const Vec2& x) const;
  Vec2 gradient(const Vec2& x) const;
  bool is_zero() const { return constant_ == 0.0 && linear_ == Vec2{} && terms_.empty(); }

 private:
  double constant_ = 0.0;
  Vec2 linear_{};
  std::vector<Term> terms_;
};

}  // namespace plab
