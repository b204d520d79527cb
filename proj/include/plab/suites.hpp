#pragma once

// Seeded experiment suites: random boundary data, manufactured p-Poisson
// problems, ball samplers, and a deterministic parallel loop.

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "plab/solver.hpp"

namespace plab {

/// Low-frequency trigonometric series plus a linear part, used as generic
/// (non-affine) boundary data.
TrigSeries random_boundary(std::uint64_t seed);

struct ManufacturedProblem {
  TrigSeries exact;  // u*
  TrigSeries psi;    // stream potential of the divergence-free part of F
  ScalarField u_exact;
  VectorField grad_exact;
  VectorField forcing;  // A(grad u*) + rot90(grad psi)
  DirichletProblem problem;
};

/// u* and psi drawn from `seed`; boundary values are u* on the rectangle.
ManufacturedProblem manufactured_problem(const ExponentCtx& ctx, const Grid2D& grid, std::uint64_t seed);

/// Balls with radius uniform in [r_lo, r_hi] and centers uniform over the
/// positions where `factor` times the ball still lies inside the grid.
std::vector<Ball> sample_balls(std::uint64_t seed, std::size_t count, const Grid2D& grid, double r_lo, double r_hi,
                               double factor = 1.0);

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Each index is
/// handled exactly once, so results written by index are deterministic.
/// The first exception thrown is rethrown after all workers finish.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

/// Median of the finite entries; NaN when there are none.
double median(std::vector<double> v);

}  // namespace plab
