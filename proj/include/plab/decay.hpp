#pragma once

// Measurement harness for oscillation decay and comparison inequalities.
// Every "<~" statement is measured as a pair (lhs, rhs) or a residual; the
// unknown constant is fitted by the calibration protocol, never assumed.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "plab/besov.hpp"
#include "plab/field.hpp"
#include "plab/solver.hpp"

namespace plab {

enum class Quantity { AGrad, Grad, VGrad, F };

/// "A_grad", "grad", "V_grad", "F".
std::string quantity_name(Quantity q);
Quantity parse_quantity(const std::string& name);

struct DecayProfile {
  Vec2 center;
  double t0 = 0.0;
  double theta = 0.5;
  std::vector<double> radii;  // t_k = theta^k t0, strictly decreasing
  std::vector<double> osc;
  double w = 1.0;
  Quantity quantity = Quantity::AGrad;
  /// Scales dropped by the resolution guard t_k >= 4h.
  int truncated = 0;
};

/// Oscillations osc_w g(x, theta^k t0), k = 0..K-1. Throws DomainError when
/// B_{t0}(x) leaves the grid and InsufficientResolution when fewer than
/// four scales survive the guard.
DecayProfile decay_profile(const ScalarField& g, Vec2 x, double t0, double theta, int K, double w,
                           Quantity quantity = Quantity::Grad);
DecayProfile decay_profile(const VectorField& g, Vec2 x, double t0, double theta, int K, double w,
                           Quantity quantity = Quantity::Grad);

enum class FitStatus { Ok, Saturated, ExactDecay };

std::string fit_status_name(FitStatus s);

struct BetaFit {
  /// Log-log slope; +inf for exact decay, NaN when saturated.
  double beta;
  double r2;
  /// Largest |residual| of the log-log fit.
  double max_deviation;
  FitStatus status;
  std::size_t used;
};

/// Values below this are treated as zero oscillation.
inline constexpr double kZeroOscillation = 1e-12;

/// Least-squares slope of log osc against log t over the positive values.
/// Needs four of them (Saturated otherwise); an all-zero profile reports
/// ExactDecay.
BetaFit fit_beta(const std::vector<double>& radii, const std::vector<double>& osc);
BetaFit fit_beta(const DecayProfile& profile);

enum class BallClass { NonDegenerate, Degenerate, DegenerateZero };

std::string ball_class_name(BallClass c);

/// NonDegenerate iff nondegeneracy_ratio <= epsilon_dg.
BallClass classify_ball(const VectorField& grad, const Ball& ball, const ExponentCtx& ctx, double epsilon_dg);

/// Two sides of a measured inequality lhs <~ rhs.
struct Sides {
  double lhs = 0.0;
  double rhs = 0.0;
  /// lhs / rhs with 0/0 = 0; +inf when only rhs vanishes.
  double ratio() const;
};

/// Below this a right-hand side counts as vanishing.
inline constexpr double kVanishingRhs = 1e-14;

/// lhs = (mean_B |A - <A>_B|^{p'})^{1/p'}, rhs = mean_{2B} |A - <A>_{2B}| for
/// A = A(grad h). Requires 2B inside the grid.
Sides reverse_holder_ratio(const VectorField& h_grad, const Ball& ball, const ExponentCtx& ctx);

/// lhs = mean_B |V(grad u) - V(grad h)|^2 with h the p-harmonic replacement
/// of u on B; rhs = mean_B (phi_{|grad u|})^*(|F - <F>_B|).
Sides nonlin_comparison_defect(const ScalarField& u, const VectorField& f, const Ball& ball, const ExponentCtx& ctx,
                               const SolverOptions& opts = {});

struct LinearComparison {
  double lhs;     // |Q|^{(p-2)p'} mean_B |grad u - grad z|^{p'}
  double h_term;  // mean_B |H(grad u, Q)|^{p'}
  double f_term;  // mean_B |F - <F>_B|^{p'}
};

/// Linearization around Q = <grad u>^A_B with z = u on the ball boundary.
/// Empty when Q vanishes (degenerate ball).
std::optional<LinearComparison> linear_comparison_defect(const ScalarField& u, const VectorField& f, const Ball& ball,
                                                         const ExponentCtx& ctx);

/// max_m b_m / (2^{-m beta} exp(c0 / (1 - 2^{-beta}))) over m = 0..M for
/// b_0 = 1, b_m = c0 2^{-m beta} sum_{k<m} b_k.
double iterative_lemma_check(double c0, double beta, int M);

/// Terms of the decay estimate for A = A(grad u) on B:
///   lhs      = osc_{p'} A on theta0 B
///   decay    = theta0^beta osc_{p'} A on B
///   forcing  = osc_{p'} F on B
struct OscEstimateTerms {
  double lhs;
  double decay;
  double forcing;
  /// decay + c forcing - lhs.
  double residual(double c) const { return decay + c * forcing - lhs; }
  /// Smallest c >= 0 with residual(c) >= 0 (+inf if forcing vanishes and
  /// no c works).
  double required_constant() const;
};

OscEstimateTerms osc_estimate_terms(const VectorField& flux, const VectorField& f, const Ball& ball,
                                    const ExponentCtx& ctx, double theta0, double beta);

double osc_estimate_residual(const ScalarField& u, const VectorField& f, const Ball& ball, const ExponentCtx& ctx,
                          double theta0, double beta, double c);

struct TransferRow {
  SmoothnessParams params;
  /// Reason the row was skipped (embedding or admissibility failure).
  std::optional<std::string> skipped;
  Sides sides;  // lhs = |A(grad u)|_B, rhs = |F|_{2B} + osc_{p'} A(grad u) on 2B
};

/// Transfer estimate for several parameter rows. Rows failing
/// embedding_check or admissibility are returned with `skipped` set.
/// Both seminorms use J scales: radii of B for the left side, of 2B for F.
std::vector<TransferRow> transfer_rows(const VectorField& flux, const VectorField& f, const Ball& ball,
                                       const std::vector<SmoothnessParams>& rows, int J, const ExponentCtx& ctx);

/// Single-row version. Throws ParameterError when the row is inadmissible.
Sides transfer_ratio(const ScalarField& u, const VectorField& f, const Ball& ball, const SmoothnessParams& params,
                     int J, const ExponentCtx& ctx);

}  // namespace plab
