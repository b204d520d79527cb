#pragma once

// Besov and Triebel-Lizorkin seminorm estimators built from localized
// oscillations osc^B_w g(x, t) on a dyadic ladder of radii.
//
//   Besov: R^s (sum_j ln2 a_j^q)^{1/q},   a_j = M_rho[osc(., t_j)] / t_j^s
//   TL:    R^s M_rho[(sum_j ln2 (osc(., t_j) / t_j^s)^q)^{1/q}]
//
// M_rho is the mean-power (mean |.|^rho)^{1/rho} over the grid nodes in B,
// the maximum for rho = inf; q = inf replaces the sum by a maximum.
// Exponents below one are used verbatim (quasi-norms).

#include <optional>
#include <string>
#include <vector>

#include "plab/field.hpp"

namespace plab {

enum class SeminormKind { Besov, Triebel };

std::string seminorm_kind_name(SeminormKind kind);
/// Accepts "besov" and "triebel" (alias "tl").
SeminormKind parse_seminorm_kind(const std::string& name);

struct SmoothnessParams {
  double s = 0.5;
  double rho = 2.0;
  double q = 2.0;
  double w = 1.0;
  SeminormKind kind = SeminormKind::Besov;

  /// Reason the parameters are not admissible for the oscillation
  /// characterization, or empty when they are:
  ///   0 < s < 1, rho, q > 0, 1 <= w <= inf, 2 (1/rho - 1/w)_+ < s,
  ///   and for TL also rho < inf and 2 (1/q - 1/w)_+ < s.
  std::optional<std::string> violation() const;
  /// Throws ParameterError carrying violation().
  void validate() const;
  /// (alpha s, rho/alpha, q/alpha, w/alpha), the parameters of T_alpha G.
  SmoothnessParams transformed(double alpha) const;

  friend bool operator==(const SmoothnessParams&, const SmoothnessParams&) = default;
};

/// True iff 2 (1/rho - 1/p')_+ < s < 1, and for TL also 2 (1/q - 1/p')_+ < s.
bool embedding_check(const SmoothnessParams& params, double p_conj);

/// Radii t_j = R 2^{-j}, j = 0..J-1.
class DyadicLadder {
 public:
  /// Throws ParameterError unless R > 0 and J >= 4.
  DyadicLadder(double outer_radius, int scales);

  double outer_radius() const { return r_; }
  int scales() const { return j_; }
  double radius(int j) const;
  /// Throws InsufficientResolution unless t_{J-1} >= 4h.
  void check(const Grid2D& grid) const;

 private:
  double r_;
  int j_;
};

/// osc^B_w g(x, t_j) for every node x strictly inside B (row-major order)
/// and every scale j. Each oscillation is taken over the nodes of
/// B_{t_j}(x) that lie in B.
struct OscillationTable {
  Ball ball;
  DyadicLadder ladder;
  double w;
  std::size_t nodes;
  std::vector<std::vector<double>> osc;  // osc[j][node]
};

OscillationTable oscillation_table(const ScalarField& g, const Ball& ball, const DyadicLadder& ladder, double w);
OscillationTable oscillation_table(const VectorField& g, const Ball& ball, const DyadicLadder& ladder, double w);

struct SeminormReport {
  double value = 0.0;
  /// Per-scale a_j = M_rho[osc(., t_j)] / t_j^s (reported for both kinds).
  std::vector<double> a;
};

/// Evaluates one parameter row on a table built with the same w.
SeminormReport seminorm_from_table(const OscillationTable& table, const SmoothnessParams& params);

double besov_seminorm(const ScalarField& g, const Ball& ball, const SmoothnessParams& params,
                      const DyadicLadder& ladder);
double besov_seminorm(const VectorField& g, const Ball& ball, const SmoothnessParams& params,
                      const DyadicLadder& ladder);
/// Throws ParameterError for rho = inf.
double triebel_seminorm(const ScalarField& g, const Ball& ball, const SmoothnessParams& params,
                        const DyadicLadder& ladder);
double triebel_seminorm(const VectorField& g, const Ball& ball, const SmoothnessParams& params,
                        const DyadicLadder& ladder);

struct PowerTransformRatio {
  double transformed;  // |T_alpha G| at transformed(alpha)
  double powered;      // |G|^alpha at the original parameters
  /// transformed / powered, 0 when both vanish.
  double ratio() const;
};

/// Both sides of the power-transform bound for 0 < alpha <= 1.
PowerTransformRatio power_transform_ratio(const VectorField& g, const Ball& ball, const SmoothnessParams& params,
                                          const DyadicLadder& ladder, double alpha);

}  // namespace plab
