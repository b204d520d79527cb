#pragma once

// Calibration protocol for "<~"-type inequalities whose constants are not
// known: fit the constant as the largest observed ratio on a training
// sample, then validate on a disjoint sample.

#include <cstddef>
#include <span>

namespace plab {

/// Largest finite entry; 0 for an empty span. Non-finite entries throw.
double calibrate_max_ratio(std::span<const double> ratios);

/// |a - b| <= rel * max(|a|, |b|).
bool stable_within(double a, double b, double rel);

struct Validation {
  std::size_t passed = 0;
  std::size_t total = 0;
  double pass_rate() const { return total == 0 ? 1.0 : double(passed) / double(total); }
};

/// Counts ratios satisfying ratio <= margin * constant.
Validation validate_ratios(std::span<const double> ratios, double constant, double margin = 1.2);

/// Counts residuals >= 0.
Validation validate_residuals(std::span<const double> residuals);

}  // namespace plab
