#pragma once

// Discrete p-Poisson problems -div A(grad u) = -div F with Dirichlet data.
//
// The discrete energy splits every grid cell into its four corner
// triangles (corner node plus its two cell neighbours). Each triangle
// carries the one-sided gradient of its three nodes and the forcing value
// at its corner node, and contributes h^2/4 [phi(|g|) - F.g]. For p = 2
// this reproduces the five-point Laplacian; the scheme is exact on affine
// functions and has no checkerboard kernel.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "plab/field.hpp"
#include "plab/smooth_function.hpp"

namespace plab {

struct SolverOptions {
  double tol = 1e-10;            // Euclidean norm of the energy gradient
  int max_iter = 200;
  double newton_damping = 0.5;   // backtracking factor
  double hessian_floor = 1e-12;  // |grad u| floor inside DA only

  void validate() const;
};

struct IterationRecord {
  int iter;
  double energy;
  double residual;
  double step;
};

struct ConvergenceRecord {
  std::vector<IterationRecord> iterations;
  bool converged = false;
  double final_residual = 0.0;
};

/// JSON array of {iter, energy, residual, step}.
std::string convergence_json(const ConvergenceRecord& record);

/// Per-node flag: 1 = unknown, 0 = pinned to the boundary field.
using NodeMask = std::vector<std::uint8_t>;

/// All nodes except the rectangle boundary.
NodeMask interior_mask(const Grid2D& grid);
/// Nodes strictly inside `ball` that are not on the rectangle boundary.
NodeMask ball_mask(const Grid2D& grid, const Ball& ball);
std::size_t count_free(const NodeMask& mask);

struct DirichletProblem {
  ExponentCtx ctx;
  VectorField forcing;
  /// Values of the pinned nodes (entries at free nodes are ignored except
  /// as a fallback initial guess).
  ScalarField boundary;
  NodeMask free;

  /// Unknowns at all interior nodes of the rectangle.
  static DirichletProblem on_rectangle(const ExponentCtx& ctx, ScalarField boundary,
                                       std::optional<VectorField> forcing = std::nullopt);
  const Grid2D& grid() const { return boundary.grid(); }
  void validate() const;
};

struct PoissonSolution {
  ScalarField u;
  ConvergenceRecord record;
};

/// Discrete energy sum_T h^2/4 [phi(|g_T|) - F_T.g_T] over the triangles
/// touching a free node.
double discrete_energy(const DirichletProblem& prob, const ScalarField& u);
/// Euclidean norm of the energy gradient restricted to the free nodes.
double discrete_residual(const DirichletProblem& prob, const ScalarField& u);

/// Damped Newton on the discrete energy. Without an initial guess the
/// harmonic extension of the pinned values is used. Throws SolverFailure
/// when max_iter is exhausted and NumericalBreakdown on NaN/Inf.
PoissonSolution solve_p_poisson(const DirichletProblem& prob, const SolverOptions& opts = {},
                                const ScalarField* initial = nullptr);

/// p-harmonic function on the rectangle with the boundary values of
/// `boundary`.
ScalarField solve_p_harmonic(const ExponentCtx& ctx, const ScalarField& boundary,
                             const SolverOptions& opts = {});

/// Solves -div(M grad z) = -div rhs with z pinned where `free` is 0.
ScalarField solve_constant_coefficient(const Mat2& m, const VectorField& rhs, const ScalarField& boundary,
                                       const NodeMask& free);

/// Linearisation around Q: -div(DA(Q) grad z) = -div rhs. Requires Q != 0
/// for p < 2. Unknowns default to the rectangle interior.
ScalarField solve_linearized(const ExponentCtx& ctx, const Vec2& q, const VectorField& rhs,
                             const ScalarField& boundary, const std::optional<NodeMask>& free = std::nullopt);

/// p-harmonic replacement of u inside `ball`; nodes outside stay pinned to
/// u. The ball must lie in the grid and contain at least 100 free nodes.
ScalarField comparison_solve(const ScalarField& u, const Ball& ball, const ExponentCtx& ctx,
                             const SolverOptions& opts = {});

/// Minimum number of unknowns of a ball-local solve.
inline constexpr std::size_t kMinComparisonNodes = 100;

struct ConjugateResult {
  ScalarField z;
  /// ||grad z - rot90(A(grad h))||_2 / ||rot90(A(grad h))||_2 (nodal).
  double fit_residual;
  /// L1 norm of curl of the rotated flux relative to its derivatives.
  double curl_residual;
};

struct ConjugateOptions {
  double max_curl_residual = 0.25;
  double max_input_residual = 1e-6;
};

/// Stream function z with grad z ~ rot90(A(grad h)) by least-squares
/// potential recovery; z is p'-harmonic when h is p-harmonic.
ConjugateResult conjugate_solution(const ScalarField& h, const ExponentCtx& ctx,
                                   const ConjugateOptions& opts = {});

/// grad h recovered from the conjugate: A^{-1}(rot90^{-1}(grad z)).
VectorField gradient_from_conjugate(const ScalarField& z, const ExponentCtx& ctx);

// Exact solutions -------------------------------------------------------------

enum class CatalogueKind { Affine, Radial, HarmonicPoly, LogRadial };

struct CatalogueSpec {
  CatalogueKind kind = CatalogueKind::Affine;
  Vec2 slope{};       // affine only
  double offset = 0;  // affine only
};

/// Accepts "affine", "radial", "harmonic_poly", "log_radial".
CatalogueKind parse_catalogue_kind(const std::string& name);
std::string catalogue_name(CatalogueKind kind);

struct CatalogueSolution {
  ScalarField u;
  std::optional<VectorField> gradient;
};

/// affine: a.x + b; radial: r^{(p-2)/(p-1)} (p != 2); harmonic_poly:
/// x^2 - y^2 (p = 2); log_radial: log r (p = 2). Radial solutions throw
/// DomainError on grids containing the origin.
CatalogueSolution catalogue(const CatalogueSpec& spec, const ExponentCtx& ctx, const Grid2D& grid);

/// F = A(grad u*) + rot90(grad psi); div of the second part vanishes, so
/// u* solves the p-Poisson problem with forcing F.
VectorField manufactured_forcing(const VectorField& exact_gradient, const ExponentCtx& ctx,
                                 const TrigSeries& psi);

}  // namespace plab
