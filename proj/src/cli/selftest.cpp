#include <cmath>
#include <functional>

#include "plab/cli.hpp"
#include "plab/random.hpp"

namespace plab::cli {

namespace {

using Check = std::pair<const char*, std::function<bool()>>;

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

Vec2 random_vec(Rng& rng, double scale) { return {rng.uniform(-scale, scale), rng.uniform(-scale, scale)}; }

constexpr double kExponents[] = {1.5, 2.0, 3.0, 4.5};

std::vector<Check> checks() {
  std::vector<Check> c;
  c.emplace_back("exponent_formulas", [] {
    if (std::abs(alpha_exponent(2.0) - 1.0) > 1e-12 || std::abs(eta_exponent(2.0) - 1.0) > 1e-12) return false;
    for (double p : {2.0, 2.5, 3.0, 5.0, 10.0}) {
      if (alpha_exponent(p) < 1.0 / (p - 1.0)) return false;
    }
    return std::abs(alpha_exponent(1e6) * 1e6 / 2.0 - (std::sqrt(33.0) - 3.0) / 4.0) < 1e-3;
  });
  c.emplace_back("a_map_identity", [] {
    Rng rng(11);
    for (double p : kExponents) {
      const ExponentCtx ctx(p);
      for (int k = 0; k < 2000; ++k) {
        const Vec2 q = random_vec(rng, 3.0);
        if (!rel_close(dot(a_map(ctx, q), q), std::pow(norm(q), p), 1e-10)) return false;
      }
    }
    return true;
  });
  c.emplace_back("v_map_identity", [] {
    Rng rng(12);
    for (double p : kExponents) {
      const ExponentCtx ctx(p);
      for (int k = 0; k < 2000; ++k) {
        const Vec2 q = random_vec(rng, 3.0);
        if (!rel_close(norm2(v_map(ctx, q)), std::pow(norm(q), p), 1e-10)) return false;
      }
    }
    return true;
  });
  c.emplace_back("t_alpha_group_law", [] {
    Rng rng(13);
    for (int k = 0; k < 2000; ++k) {
      const Vec2 q = random_vec(rng, 3.0);
      const double a = rng.uniform(0.2, 3.0), b = rng.uniform(0.2, 3.0);
      const Vec2 lhs = t_alpha(a * b, q), rhs = t_alpha(a, t_alpha(b, q));
      if (norm(lhs - rhs) > 1e-10 * std::max(1.0, norm(lhs))) return false;
    }
    return true;
  });
  c.emplace_back("a_inverse", [] {
    Rng rng(14);
    for (double p : kExponents) {
      const ExponentCtx ctx(p);
      for (int k = 0; k < 2000; ++k) {
        const Vec2 q = random_vec(rng, 3.0);
        if (norm(a_inv(ctx, a_map(ctx, q)) - q) > 1e-10 * std::max(1.0, norm(q))) return false;
      }
    }
    return true;
  });
  c.emplace_back("monotonicity", [] {
    Rng rng(15);
    for (double p : kExponents) {
      const ExponentCtx ctx(p);
      for (int k = 0; k < 2000; ++k) {
        const Vec2 a = random_vec(rng, 3.0), b = random_vec(rng, 3.0);
        if (!(dot(a_map(ctx, a) - a_map(ctx, b), a - b) > 0.0)) return false;
      }
    }
    return true;
  });
  c.emplace_back("da_eigenvalues", [] {
    Rng rng(16);
    for (double p : kExponents) {
      const ExponentCtx ctx(p);
      for (int k = 0; k < 500; ++k) {
        const Vec2 q = random_vec(rng, 3.0);
        const Mat2 m = da_matrix(ctx, q);
        const EigenPair ev = symmetric_eigenvalues(m);
        const double s = std::pow(norm(q), p - 2.0);
        const double lo = std::min(1.0, p - 1.0) * s, hi = std::max(1.0, p - 1.0) * s;
        if (!m.is_symmetric() || !rel_close(ev.lo, lo, 1e-10) || !rel_close(ev.hi, hi, 1e-10)) return false;
      }
    }
    return true;
  });
  c.emplace_back("conjugate_legendre", [] {
    for (double p : {1.5, 3.0}) {
      const ExponentCtx ctx(p);
      for (double a : {0.0, 0.5, 1.0}) {
        for (double t : {0.3, 1.0, 2.0}) {
          // Coarse scan then golden refinement of sup_s (s t - phi_a(s)).
          double best_s = 0.0, best = 0.0;
          for (int k = 0; k <= 2000; ++k) {
            const double s = 10.0 * k / 2000.0;
            const double v = s * t - phi_shifted(ctx, a, s);
            if (v > best) best = v, best_s = s;
          }
          double lo = std::max(0.0, best_s - 0.01), hi = best_s + 0.01;
          for (int it = 0; it < 100; ++it) {
            const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
            if (m1 * t - phi_shifted(ctx, a, m1) < m2 * t - phi_shifted(ctx, a, m2)) {
              lo = m1;
            } else {
              hi = m2;
            }
          }
          const double s = 0.5 * (lo + hi);
          best = std::max(best, s * t - phi_shifted(ctx, a, s));
          if (std::abs(best - phi_conj_shifted(ctx, a, t)) > 1e-6) return false;
        }
      }
    }
    return true;
  });
  c.emplace_back("iterative_lemma_grid", [] {
    for (double c0 : {0.1, 0.5, 1.0, 3.0, 10.0}) {
      for (double beta : {0.1, 0.3, 0.5, 0.8, 0.95}) {
        if (!(iterative_lemma_check(c0, beta, 500) <= 1.0)) return false;
      }
    }
    return true;
  });
  c.emplace_back("gradient_affine_exact", [] {
    const Grid2D g(-0.3, 0.2, 0.05, 21, 17);
    const ScalarField u = sample(g, [](const Vec2& x) { return 3.0 * x.x - 2.0 * x.y + 1.0; });
    const VectorField grad = gradient(u);
    for (const Vec2& v : grad.values()) {
      if (norm(v - Vec2{3.0, -2.0}) > 1e-12) return false;
    }
    return true;
  });
  c.emplace_back("oscillation_shift_invariance", [] {
    const Grid2D g = Grid2D::square(-1.0, 1.0, 65);
    const ScalarField f = sample(g, [](const Vec2& x) { return std::sin(3.0 * x.x) + x.y * x.y; });
    const ScalarField f2 = transform(f, [](double v) { return v + 0.25; });
    const Ball b({0.1, -0.2}, 0.5);
    for (double w : {1.0, 2.0, 3.0}) {
      if (!rel_close(oscillation(f, b, w), oscillation(f2, b, w), 1e-12)) return false;
    }
    return true;
  });
  c.emplace_back("ball_average_symmetry", [] {
    const Grid2D g = Grid2D::square(-1.0, 1.0, 101);
    const ScalarField f = sample(g, [](const Vec2& x) { return x.x; });
    return std::abs(ball_average(f, Ball({0.0, 0.0}, 0.6))) <= 2.0 * g.h();
  });
  c.emplace_back("mean_equivalence_bracket", [] {
    const Grid2D g = Grid2D::square(-1.0, 1.0, 65);
    const ScalarField f = sample(g, [](const Vec2& x) { return std::exp(x.x) * std::cos(2.0 * x.y); });
    for (double w : {1.0, 1.5, 2.0, 4.0}) {
      if (!mean_equivalence_check(f, Ball({0.0, 0.1}, 0.7), w).bracket_holds()) return false;
    }
    return true;
  });
  return c;
}

}  // namespace

SelftestReport run_selftest() {
  SelftestReport rep;
  for (const auto& [name, fn] : checks()) {
    bool ok = false;
    try {
      ok = fn();
    } catch (const std::exception&) {
      ok = false;
    }
    (ok ? rep.passed : rep.failed).emplace_back(name);
  }
  return rep;
}

int cmd_selftest(std::ostream& out) {
  const SelftestReport rep = run_selftest();
  for (const auto& n : rep.passed) out << "PASS " << n << "\n";
  for (const auto& n : rep.failed) out << "FAIL " << n << "\n";
  out << (rep.ok() ? "selftest passed" : "selftest failed") << " (" << rep.passed.size() << " passed, "
      << rep.failed.size() << " failed)\n";
  return rep.ok() ? kOk : kSelftestFailure;
}

}  // namespace plab::cli
