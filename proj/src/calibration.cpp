#include "plab/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "plab/errors.hpp"

namespace plab {

double calibrate_max_ratio(std::span<const double> ratios) {
  double best = 0.0;
  for (double r : ratios) {
    if (!std::isfinite(r)) throw ParameterError("calibration sample contains a non-finite ratio");
    best = std::max(best, r);
  }
  return best;
}

bool stable_within(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

Validation validate_ratios(std::span<const double> ratios, double constant, double margin) {
  Validation v;
  v.total = ratios.size();
  for (double r : ratios) {
    if (r <= margin * constant) ++v.passed;
  }
  return v;
}

Validation validate_residuals(std::span<const double> residuals) {
  Validation v;
  v.total = residuals.size();
  for (double r : residuals) {
    if (r >= 0.0) ++v.passed;
  }
  return v;
}

}  // namespace plab
