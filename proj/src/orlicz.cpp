#include "plab/orlicz.hpp"

#include <algorithm>
#include <atomic>
#include <string>

#include "plab/errors.hpp"

namespace plab {

namespace {

std::atomic<bool> g_a_map_sign_fault{false};

void require_nonneg(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string(what) + " must be a finite non-negative number, got " +
                      std::to_string(v));
  }
}

}  // namespace

namespace testing {
void set_a_map_sign_fault(bool on) { g_a_map_sign_fault.store(on); }
bool a_map_sign_fault() { return g_a_map_sign_fault.load(); }
}  // namespace testing

EigenPair symmetric_eigenvalues(const Mat2& m) {
  const double mean = 0.5 * (m.a11 + m.a22);
  const double half_diff = 0.5 * (m.a11 - m.a22);
  const double r = std::hypot(half_diff, m.a12);
  return {mean - r, mean + r};
}

ExponentCtx::ExponentCtx(double p) : p_(p), p_conj_(p / (p - 1.0)) {
  if (!std::isfinite(p) || !(p > 1.0)) {
    throw DomainError("exponent p must satisfy 1 < p < inf, got " + std::to_string(p));
  }
}

double phi(const ExponentCtx& ctx, double t) {
  require_nonneg(t, "t");
  return std::pow(t, ctx.p()) / ctx.p();
}

double phi_shifted(const ExponentCtx& ctx, double a, double t) {
  require_nonneg(a, "shift a");
  require_nonneg(t, "t");
  const double p = ctx.p();
  if (t <= a) {
    if (t == 0.0) return 0.0;
    return std::pow(a, p - 2.0) * t * t / 2.0;
  }
  const double ap = std::pow(a, p);
  return ap / 2.0 + (std::pow(t, p) - ap) / p;
}

double phi_shifted_prime(const ExponentCtx& ctx, double a, double t) {
  require_nonneg(a, "shift a");
  require_nonneg(t, "t");
  if (t == 0.0) return 0.0;
  return std::pow(std::max(a, t), ctx.p() - 2.0) * t;
}

double phi_conj_shifted(const ExponentCtx& ctx, double a, double t) {
  require_nonneg(a, "shift a");
  require_nonneg(t, "t");
  const ExponentCtx conj = ctx.conjugate();
  return phi_shifted(conj, std::pow(a, ctx.p() - 1.0), t);
}

Vec2 t_alpha(double alpha, const Vec2& q) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw DomainError("T_alpha requires alpha > 0, got " + std::to_string(alpha));
  }
  const double r = norm(q);
  if (r == 0.0) return {0.0, 0.0};
  if (alpha == 1.0) return q;
  return std::pow(r, alpha - 1.0) * q;
}

Vec2 a_map(const ExponentCtx& ctx, const Vec2& q) {
  const Vec2 a = t_alpha(ctx.p() - 1.0, q);
  return g_a_map_sign_fault.load(std::memory_order_relaxed) ? -a : a;
}

Vec2 v_map(const ExponentCtx& ctx, const Vec2& q) { return t_alpha(ctx.p() / 2.0, q); }

Vec2 a_inv(const ExponentCtx& ctx, const Vec2& q) { return t_alpha(1.0 / (ctx.p() - 1.0), q); }

Vec2 v_inv(const ExponentCtx& ctx, const Vec2& q) { return t_alpha(2.0 / ctx.p(), q); }

Mat2 da_matrix(const ExponentCtx& ctx, const Vec2& q) {
  const double p = ctx.p();
  const double r2 = norm2(q);
  if (r2 == 0.0) {
    if (p < 2.0) throw SingularityError("DA(0) is singular for p < 2");
    if (p == 2.0) return Mat2::identity();
    return {};
  }
  const double scale = std::pow(r2, (p - 2.0) / 2.0);
  const double k = (p - 2.0) / r2;
  return scale * Mat2{1.0 + k * q.x * q.x, k * q.x * q.y, k * q.x * q.y, 1.0 + k * q.y * q.y};
}

Mat2 da_matrix_floored(const ExponentCtx& ctx, const Vec2& q, double floor) {
  if (!(floor >= 0.0)) throw DomainError("Hessian floor must be non-negative");
  const double p = ctx.p();
  const double r2 = norm2(q);
  const double s2 = std::max(r2, floor * floor);
  if (s2 == 0.0) return da_matrix(ctx, q);
  const double scale = std::pow(s2, (p - 2.0) / 2.0);
  const double k = (p - 2.0) / s2;
  return scale * Mat2{1.0 + k * q.x * q.x, k * q.x * q.y, k * q.x * q.y, 1.0 + k * q.y * q.y};
}

Vec2 h_remainder(const ExponentCtx& ctx, const Vec2& p, const Vec2& q) {
  return a_map(ctx, p) - a_map(ctx, q) - da_matrix(ctx, q) * (p - q);
}

HammerPanel hammer_panel(const ExponentCtx& ctx, const Vec2& p, const Vec2& q) {
  HammerPanel out{};
  if (p == q) return out;
  const Vec2 ap = a_map(ctx, p);
  const Vec2 aq = a_map(ctx, q);
  const Vec2 d = p - q;
  out.monotone = dot(ap - aq, d);
  out.v_distance = norm2(v_map(ctx, p) - v_map(ctx, q));
  out.weighted = std::pow(norm(q) + norm(p), ctx.p() - 2.0) * norm2(d);
  out.shifted = phi_shifted(ctx, norm(q), norm(d));
  out.conj = phi_conj_shifted(ctx, norm(q), norm(ap - aq));
  return out;
}

double alpha_exponent(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("alpha_exponent requires p > 1");
  const double k = 1.0 / (p - 1.0);
  return (-3.0 - k + std::sqrt(33.0 + 30.0 * k + k * k)) / (2.0 * p);
}

double eta_exponent(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("eta_exponent requires p > 1");
  const double k = 1.0 / (p - 1.0);
  return (1.0 + k + std::sqrt(1.0 + 14.0 * k + k * k)) / 6.0;
}

}  // namespace plab
