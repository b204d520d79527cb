#include "plab/smooth_function.hpp"

#include <cmath>
#include <numbers>

#include "plab/random.hpp"

namespace plab {

TrigSeries TrigSeries::sin_product(double kx, double ky) {
  // sin(a)sin(b) = (cos(a - b) - cos(a + b)) / 2
  return TrigSeries(0.0, {}, {{0.5, {kx, -ky}, 0.0}, {-0.5, {kx, ky}, 0.0}});
}

TrigSeries TrigSeries::random(std::uint64_t seed, int count, double max_wave, double amplitude,
                              double slope) {
  Rng rng(seed);
  std::vector<Term> terms;
  terms.reserve(std::size_t(count));
  for (int k = 0; k < count; ++k) {
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double length = rng.uniform(0.25 * max_wave, max_wave);
    const double amp = rng.uniform(-amplitude, amplitude);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    terms.push_back({amp, {length * std::cos(angle), length * std::sin(angle)}, phase});
  }
  const Vec2 linear{rng.uniform(-slope, slope), rng.uniform(-slope, slope)};
  return TrigSeries(0.0, linear, std::move(terms));
}

double TrigSeries::value(const Vec2& x) const {
  double v = constant_ + dot(linear_, x);
  for (const Term& t : terms_) v += t.amplitude * std::cos(dot(t.wave, x) + t.phase);
  return v;
}

Vec2 TrigSeries::gradient(const Vec2& x) const {
  Vec2 g = linear_;
  for (const Term& t : terms_) g -= (t.amplitude * std::sin(dot(t.wave, x) + t.phase)) * t.wave;
  return g;
}

}  // namespace plab
