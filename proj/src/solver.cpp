#include "plab/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <array>
#include <cmath>

#include "json.hpp"

namespace plab {

void SolverOptions::validate() const {
  if (!(tol > 0.0)) throw ParameterError("solver tol must be positive");
  if (max_iter < 1) throw ParameterError("solver max_iter must be at least 1");
  if (!(newton_damping > 0.0 && newton_damping < 1.0)) {
    throw ParameterError("newton_damping must lie in (0,1)");
  }
  if (!(hessian_floor >= 0.0)) throw ParameterError("hessian_floor must be non-negative");
}

std::string convergence_json(const ConvergenceRecord& record) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& it : record.iterations) {
    nlohmann::ordered_json j;
    j["iter"] = it.iter;
    j["energy"] = it.energy;
    j["residual"] = it.residual;
    j["step"] = it.step;
    arr.push_back(std::move(j));
  }
  return arr.dump(2);
}

NodeMask interior_mask(const Grid2D& grid) {
  NodeMask m(grid.size(), 0);
  for (int j = 1; j + 1 < grid.ny(); ++j) {
    for (int i = 1; i + 1 < grid.nx(); ++i) m[grid.index(i, j)] = 1;
  }
  return m;
}

NodeMask ball_mask(const Grid2D& grid, const Ball& ball) {
  NodeMask m(grid.size(), 0);
  for_each_node_in(grid, ball, [&](std::size_t k) {
    const int i = int(k % std::size_t(grid.nx()));
    const int j = int(k / std::size_t(grid.nx()));
    if (!grid.on_boundary(i, j)) m[k] = 1;
  });
  return m;
}

std::size_t count_free(const NodeMask& mask) {
  return std::size_t(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

DirichletProblem DirichletProblem::on_rectangle(const ExponentCtx& ctx, ScalarField boundary,
                                                std::optional<VectorField> forcing) {
  const Grid2D g = boundary.grid();
  VectorField f = forcing ? std::move(*forcing) : VectorField(g, Vec2{});
  return DirichletProblem{ctx, std::move(f), std::move(boundary), interior_mask(g)};
}

void DirichletProblem::validate() const {
  if (!(forcing.grid() == boundary.grid())) throw ParameterError("forcing and boundary grids differ");
  if (free.size() != boundary.size()) throw ParameterError("mask length does not match grid");
  if (count_free(free) == 0) throw ParameterError("problem has no unknowns");
}

namespace {

// One corner triangle of a grid cell. With u0,u1,u2 the values at
// (corner, horizontal neighbour, vertical neighbour) the gradient is
// (sx (u1 - u0), sy (u2 - u0)); sx, sy are +-1/h.
struct Triangle {
  std::array<std::uint32_t, 3> node;
  double sx;
  double sy;
};

// Columns of the local gradient operator.
inline Vec2 column(const Triangle& t, int a) {
  switch (a) {
    case 0:
      return {-t.sx, -t.sy};
    case 1:
      return {t.sx, 0.0};
    default:
      return {0.0, t.sy};
  }
}

inline Vec2 tri_gradient(const Triangle& t, const std::vector<double>& u) {
  const double u0 = u[t.node[0]];
  return {t.sx * (u[t.node[1]] - u0), t.sy * (u[t.node[2]] - u0)};
}

// Triangles touching at least one free node.
std::vector<Triangle> active_triangles(const Grid2D& g, const NodeMask& free) {
  std::vector<Triangle> tris;
  const double inv_h = 1.0 / g.h();
  for (int j = 0; j + 1 < g.ny(); ++j) {
    for (int i = 0; i + 1 < g.nx(); ++i) {
      for (int cj = 0; cj < 2; ++cj) {
        for (int ci = 0; ci < 2; ++ci) {
          const auto c = std::uint32_t(g.index(i + ci, j + cj));
          const auto hn = std::uint32_t(g.index(i + (1 - ci), j + cj));
          const auto vn = std::uint32_t(g.index(i + ci, j + (1 - cj)));
          if (!free[c] && !free[hn] && !free[vn]) continue;
          tris.push_back({{c, hn, vn}, ci == 0 ? inv_h : -inv_h, cj == 0 ? inv_h : -inv_h});
        }
      }
    }
  }
  return tris;
}

// Neumaier compensated sum; also tracks sum of magnitudes for round-off
// estimates.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;
  double abs_sum = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
    abs_sum += std::abs(v);
  }
  double value() const { return sum + comp; }
};

using SparseMatrix = Eigen::SparseMatrix<double>;

// Sparse symmetric system over the free nodes with a fixed pattern and
// precomputed value slots per triangle.
class System {
 public:
  System(const Grid2D& g, const NodeMask& free, std::vector<Triangle> tris)
      : tris_(std::move(tris)), index_(g.size(), -1), weight_(g.h() * g.h() / 4.0) {
    for (std::size_t k = 0; k < free.size(); ++k) {
      if (free[k]) {
        index_[k] = int(free_nodes_.size());
        free_nodes_.push_back(k);
      }
    }
    const int n = int(free_nodes_.size());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(tris_.size() * 9);
    for (const Triangle& t : tris_) {
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          const int ia = index_[t.node[a]], ib = index_[t.node[b]];
          if (ia >= 0 && ib >= 0) trip.emplace_back(ia, ib, 0.0);
        }
      }
    }
    matrix_.resize(n, n);
    matrix_.setFromTriplets(trip.begin(), trip.end());
    matrix_.makeCompressed();
    slots_.resize(tris_.size());
    for (std::size_t k = 0; k < tris_.size(); ++k) {
      const Triangle& t = tris_[k];
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          const int ia = index_[t.node[a]], ib = index_[t.node[b]];
          slots_[k][std::size_t(3 * a + b)] = (ia >= 0 && ib >= 0) ? slot(ia, ib) : -1;
        }
      }
    }
  }

  const std::vector<Triangle>& triangles() const { return tris_; }
  const std::vector<std::size_t>& free_nodes() const { return free_nodes_; }
  int index(std::size_t node) const { return index_[node]; }
  double weight() const { return weight_; }
  int unknowns() const { return int(free_nodes_.size()); }

  // Assembles sum_T w D^T M_T D with M_T = tangent(T, g_T).
  template <class Tangent>
  const SparseMatrix& assemble(const std::vector<double>& u, Tangent&& tangent) {
    double* values = matrix_.valuePtr();
    std::fill(values, values + matrix_.nonZeros(), 0.0);
    for (std::size_t k = 0; k < tris_.size(); ++k) {
      const Triangle& t = tris_[k];
      const Mat2 m = tangent(t, tri_gradient(t, u));
      std::array<Vec2, 3> mc;
      for (int b = 0; b < 3; ++b) mc[std::size_t(b)] = m * column(t, b);
      for (int a = 0; a < 3; ++a) {
        const Vec2 ca = column(t, a);
        for (int b = 0; b < 3; ++b) {
          const int s = slots_[k][std::size_t(3 * a + b)];
          if (s >= 0) values[s] += weight_ * dot(ca, mc[std::size_t(b)]);
        }
      }
    }
    return matrix_;
  }

  // Energy gradient restricted to the free nodes: sum_T w D^T flux_T.
  template <class Flux>
  Eigen::VectorXd gradient(const std::vector<double>& u, Flux&& flux) const {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(unknowns());
    for (const Triangle& t : tris_) {
      const Vec2 f = flux(t, tri_gradient(t, u));
      for (int a = 0; a < 3; ++a) {
        const int ia = index_[t.node[a]];
        if (ia >= 0) grad[ia] += weight_ * dot(column(t, a), f);
      }
    }
    return grad;
  }

  const SparseMatrix& matrix() const { return matrix_; }

 private:
  int slot(int row, int col) const {
    const int* outer = matrix_.outerIndexPtr();
    const int* inner = matrix_.innerIndexPtr();
    const int* begin = inner + outer[col];
    const int* end = inner + outer[col + 1];
    const int* it = std::lower_bound(begin, end, row);
    return int(it - inner);
  }

  std::vector<Triangle> tris_;
  std::vector<int> index_;
  std::vector<std::size_t> free_nodes_;
  double weight_;
  SparseMatrix matrix_;
  std::vector<std::array<int, 9>> slots_;
};

std::vector<double> pinned_start(const ScalarField& boundary, const NodeMask& free) {
  std::vector<double> u(boundary.values().begin(), boundary.values().end());
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (free[k]) u[k] = 0.0;
  }
  return u;
}

// Exact minimiser of the quadratic energy sum_T w [g.Mg/2 - rhs_T.g].
std::vector<double> solve_quadratic(const Mat2& m, const VectorField& rhs, const ScalarField& boundary,
                                    const NodeMask& free) {
  const Grid2D& g = boundary.grid();
  System sys(g, free, active_triangles(g, free));
  std::vector<double> u = pinned_start(boundary, free);
  const Eigen::VectorXd grad =
      sys.gradient(u, [&](const Triangle& t, const Vec2& gt) { return m * gt - rhs[t.node[0]]; });
  const SparseMatrix& a = sys.assemble(u, [&](const Triangle&, const Vec2&) { return m; });
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw SolverFailure("linear system is singular", grad.norm());
  const Eigen::VectorXd delta = ldlt.solve(-grad);
  if (ldlt.info() != Eigen::Success || !delta.allFinite()) {
    throw SolverFailure("linear solve failed", grad.norm());
  }
  for (int k = 0; k < sys.unknowns(); ++k) u[sys.free_nodes()[std::size_t(k)]] += delta[k];
  return u;
}

struct EnergyEval {
  double value;
  double roundoff;
};

class PoissonEnergy {
 public:
  PoissonEnergy(const DirichletProblem& prob, const SolverOptions& opts)
      : prob_(prob), opts_(opts), sys_(prob.grid(), prob.free, active_triangles(prob.grid(), prob.free)) {}

  System& system() { return sys_; }

  EnergyEval energy(const std::vector<double>& u) const {
    CompensatedSum s;
    const double p = prob_.ctx.p();
    for (const Triangle& t : sys_.triangles()) {
      const Vec2 g = tri_gradient(t, u);
      s.add(sys_.weight() * (std::pow(norm2(g), p / 2.0) / p - dot(prob_.forcing[t.node[0]], g)));
    }
    return {s.value(), 64.0 * 2.2e-16 * s.abs_sum};
  }

  Eigen::VectorXd gradient(const std::vector<double>& u) const {
    return sys_.gradient(u, [&](const Triangle& t, const Vec2& g) {
      return a_map(prob_.ctx, g) - prob_.forcing[t.node[0]];
    });
  }

  const SparseMatrix& hessian(const std::vector<double>& u) {
    return sys_.assemble(u, [&](const Triangle&, const Vec2& g) {
      return da_matrix_floored(prob_.ctx, g, opts_.hessian_floor);
    });
  }

 private:
  const DirichletProblem& prob_;
  const SolverOptions& opts_;
  System sys_;
};

std::vector<double> step_along(const std::vector<double>& u, const System& sys, const Eigen::VectorXd& d,
                               double s) {
  std::vector<double> out = u;
  for (int k = 0; k < sys.unknowns(); ++k) out[sys.free_nodes()[std::size_t(k)]] += s * d[k];
  return out;
}

}  // namespace

double discrete_energy(const DirichletProblem& prob, const ScalarField& u) {
  prob.validate();
  SolverOptions opts;
  PoissonEnergy e(prob, opts);
  return e.energy(std::vector<double>(u.values().begin(), u.values().end())).value;
}

double discrete_residual(const DirichletProblem& prob, const ScalarField& u) {
  prob.validate();
  SolverOptions opts;
  PoissonEnergy e(prob, opts);
  return e.gradient(std::vector<double>(u.values().begin(), u.values().end())).norm();
}

PoissonSolution solve_p_poisson(const DirichletProblem& prob, const SolverOptions& opts,
                                const ScalarField* initial) {
  opts.validate();
  prob.validate();
  if (prob.ctx.p() < 1.2) throw ParameterError("solver is validated for p >= 1.2 only");

  std::vector<double> u;
  if (initial != nullptr) {
    if (!(initial->grid() == prob.grid())) throw ParameterError("initial guess grid mismatch");
    u.assign(initial->values().begin(), initial->values().end());
    for (std::size_t k = 0; k < u.size(); ++k) {
      if (!prob.free[k]) u[k] = prob.boundary[k];
    }
  } else {
    u = solve_quadratic(Mat2::identity(), VectorField(prob.grid(), Vec2{}), prob.boundary, prob.free);
  }

  PoissonEnergy energy(prob, opts);
  System& sys = energy.system();
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  bool analysed = false;
  ConvergenceRecord record;

  EnergyEval e = energy.energy(u);
  Eigen::VectorXd grad = energy.gradient(u);
  double res = grad.norm();
  double last_step = 0.0;

  for (int it = 0;; ++it) {
    if (!std::isfinite(e.value) || !std::isfinite(res)) {
      throw NumericalBreakdown("non-finite energy or residual in Newton iteration", res);
    }
    record.iterations.push_back({it, e.value, res, last_step});
    if (res <= opts.tol) {
      record.converged = true;
      break;
    }
    if (it >= opts.max_iter) {
      throw SolverFailure("Newton did not converge within " + std::to_string(opts.max_iter) +
                              " iterations (residual " + std::to_string(res) + ")",
                          res);
    }

    const SparseMatrix& h = energy.hessian(u);
    if (!analysed) {
      ldlt.analyzePattern(h);
      analysed = true;
    }
    ldlt.factorize(h);
    Eigen::VectorXd dir;
    bool newton_ok = ldlt.info() == Eigen::Success;
    if (newton_ok) {
      dir = ldlt.solve(-grad);
      newton_ok = dir.allFinite() && grad.dot(dir) < 0.0;
    }

    // Armijo backtracking; energy changes below round-off are accepted
    // when they reduce the residual.
    auto line_search = [&](const Eigen::VectorXd& d, double& s_out, std::vector<double>& u_out,
                           EnergyEval& e_out, Eigen::VectorXd& g_out) {
      const double slope = grad.dot(d);
      double s = 1.0;
      for (int k = 0; k < 60; ++k, s *= opts.newton_damping) {
        std::vector<double> trial = step_along(u, sys, d, s);
        const EnergyEval et = energy.energy(trial);
        if (!std::isfinite(et.value)) continue;
        const bool armijo = et.value <= e.value + 1e-4 * s * slope;
        bool accept = armijo;
        Eigen::VectorXd gt;
        if (!armijo && et.value <= e.value + e.roundoff) {
          gt = energy.gradient(trial);
          accept = gt.norm() < res;
        }
        if (accept) {
          if (gt.size() == 0) gt = energy.gradient(trial);
          s_out = s;
          u_out = std::move(trial);
          e_out = et;
          g_out = std::move(gt);
          return true;
        }
      }
      return false;
    };

    double s = 0.0;
    std::vector<double> u_next;
    EnergyEval e_next{};
    Eigen::VectorXd g_next;
    bool moved = newton_ok && line_search(dir, s, u_next, e_next, g_next);
    if (!moved) {
      // One gradient-descent step in the h^-2 scaled metric.
      const double h = prob.grid().h();
      const Eigen::VectorXd gd = -grad / (h * h);
      moved = line_search(gd, s, u_next, e_next, g_next);
    }
    if (!moved) {
      throw SolverFailure("line search failed to decrease the energy (residual " + std::to_string(res) + ")",
                          res);
    }
    u = std::move(u_next);
    e = e_next;
    grad = std::move(g_next);
    res = grad.norm();
    last_step = s;
  }

  record.final_residual = res;
  return {ScalarField(prob.grid(), std::move(u)), std::move(record)};
}

ScalarField solve_p_harmonic(const ExponentCtx& ctx, const ScalarField& boundary, const SolverOptions& opts) {
  return solve_p_poisson(DirichletProblem::on_rectangle(ctx, boundary), opts).u;
}

ScalarField solve_constant_coefficient(const Mat2& m, const VectorField& rhs, const ScalarField& boundary,
                                       const NodeMask& free) {
  if (!(rhs.grid() == boundary.grid())) throw ParameterError("rhs and boundary grids differ");
  if (free.size() != boundary.size()) throw ParameterError("mask length does not match grid");
  if (count_free(free) == 0) throw ParameterError("problem has no unknowns");
  const EigenPair ev = symmetric_eigenvalues(m);
  if (!m.is_symmetric() || !(ev.lo > 0.0)) throw SolverFailure("coefficient matrix is not positive definite", 0.0);
  return ScalarField(boundary.grid(), solve_quadratic(m, rhs, boundary, free));
}

ScalarField solve_linearized(const ExponentCtx& ctx, const Vec2& q, const VectorField& rhs,
                             const ScalarField& boundary, const std::optional<NodeMask>& free) {
  const Mat2 m = da_matrix(ctx, q);
  return solve_constant_coefficient(m, rhs, boundary, free ? *free : interior_mask(boundary.grid()));
}

ScalarField comparison_solve(const ScalarField& u, const Ball& ball, const ExponentCtx& ctx,
                             const SolverOptions& opts) {
  const Grid2D& g = u.grid();
  if (!ball.inside(g)) throw DomainError("comparison ball must lie inside the grid");
  NodeMask mask = ball_mask(g, ball);
  const std::size_t n = count_free(mask);
  if (n < kMinComparisonNodes) {
    throw InsufficientResolution("comparison ball holds " + std::to_string(n) + " nodes, need " +
                                 std::to_string(kMinComparisonNodes));
  }
  DirichletProblem prob{ctx, VectorField(g, Vec2{}), u, std::move(mask)};
  return solve_p_poisson(prob, opts, &u).u;
}

ConjugateResult conjugate_solution(const ScalarField& h, const ExponentCtx& ctx, const ConjugateOptions& opts) {
  const Grid2D& g = h.grid();
  {
    const auto prob = DirichletProblem::on_rectangle(ctx, h);
    const double r = discrete_residual(prob, h);
    if (r > opts.max_input_residual) {
      throw DomainError("input is not discretely p-harmonic (residual " + std::to_string(r) + ")");
    }
  }
  const VectorField flux = a_field(ctx, gradient(h));
  const VectorField tau = transform(flux, [](const Vec2& a) { return rot90(a); });

  // Curl of the rotated flux equals the divergence of the flux.
  const ScalarField c = curl(tau);
  double curl_l1 = 0.0, deriv_l1 = 0.0;
  for (int j = 1; j + 1 < g.ny(); ++j) {
    for (int i = 1; i + 1 < g.nx(); ++i) {
      curl_l1 += std::abs(c(i, j));
      const Vec2 tx = (tau(i + 1, j) - tau(i - 1, j)) / (2.0 * g.h());
      const Vec2 ty = (tau(i, j + 1) - tau(i, j - 1)) / (2.0 * g.h());
      deriv_l1 += std::abs(tx.x) + std::abs(tx.y) + std::abs(ty.x) + std::abs(ty.y);
    }
  }
  const double curl_rel = deriv_l1 > 0.0 ? curl_l1 / deriv_l1 : 0.0;
  if (curl_rel > opts.max_curl_residual) {
    throw InconsistencyError("rotated flux has relative curl " + std::to_string(curl_rel));
  }

  // Least squares: all nodes free except one pinned to 0 (Neumann problem).
  NodeMask free(g.size(), 1);
  free[0] = 0;
  ScalarField z = solve_constant_coefficient(Mat2::identity(), tau, ScalarField(g, 0.0), free);

  const VectorField gz = gradient(z);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    num += norm2(gz[k] - tau[k]);
    den += norm2(tau[k]);
  }
  return {std::move(z), den > 0.0 ? std::sqrt(num / den) : std::sqrt(num), curl_rel};
}

VectorField gradient_from_conjugate(const ScalarField& z, const ExponentCtx& ctx) {
  return transform(gradient(z), [&](const Vec2& gz) { return a_inv(ctx, rot90_inv(gz)); });
}

CatalogueKind parse_catalogue_kind(const std::string& name) {
  if (name == "affine") return CatalogueKind::Affine;
  if (name == "radial") return CatalogueKind::Radial;
  if (name == "harmonic_poly") return CatalogueKind::HarmonicPoly;
  if (name == "log_radial") return CatalogueKind::LogRadial;
  throw ParameterError("unknown catalogue solution '" + name + "'");
}

std::string catalogue_name(CatalogueKind kind) {
  switch (kind) {
    case CatalogueKind::Affine:
      return "affine";
    case CatalogueKind::Radial:
      return "radial";
    case CatalogueKind::HarmonicPoly:
      return "harmonic_poly";
    case CatalogueKind::LogRadial:
      return "log_radial";
  }
  return "?";
}

CatalogueSolution catalogue(const CatalogueSpec& spec, const ExponentCtx& ctx, const Grid2D& grid) {
  const double p = ctx.p();
  switch (spec.kind) {
    case CatalogueKind::Affine:
      return {sample(grid, [&](const Vec2& x) { return dot(spec.slope, x) + spec.offset; }),
              VectorField(grid, spec.slope)};
    case CatalogueKind::HarmonicPoly:
      if (p != 2.0) throw DomainError("harmonic_poly is only a solution for p = 2");
      return {sample(grid, [](const Vec2& x) { return x.x * x.x - x.y * x.y; }),
              sample(grid, [](const Vec2& x) { return Vec2{2.0 * x.x, -2.0 * x.y}; })};
    case CatalogueKind::Radial:
    case CatalogueKind::LogRadial: {
      if (grid.contains({0.0, 0.0})) throw DomainError("radial solutions are singular at the origin");
      if (spec.kind == CatalogueKind::LogRadial) {
        if (p != 2.0) throw DomainError("log_radial is only a solution for p = 2");
        return {sample(grid, [](const Vec2& x) { return 0.5 * std::log(norm2(x)); }),
                sample(grid, [](const Vec2& x) { return x / norm2(x); })};
      }
      if (p == 2.0) throw DomainError("radial(p) needs p != 2; use log_radial");
      const double e = (p - 2.0) / (p - 1.0);
      return {sample(grid, [&](const Vec2& x) { return std::pow(norm(x), e); }),
              sample(grid, [&](const Vec2& x) { return (e * std::pow(norm2(x), e / 2.0 - 1.0)) * x; })};
    }
  }
  throw ParameterError("unknown catalogue kind");
}

VectorField manufactured_forcing(const VectorField& exact_gradient, const ExponentCtx& ctx, const TrigSeries& psi) {
  const Grid2D& g = exact_gradient.grid();
  std::vector<Vec2> f(g.size());
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const std::size_t k = g.index(i, j);
      f[k] = a_map(ctx, exact_gradient[k]);
      if (!psi.is_zero()) f[k] += rot90(psi.gradient(g.point(i, j)));
    }
  }
  return VectorField(g, std::move(f));
}

}  // namespace plab
