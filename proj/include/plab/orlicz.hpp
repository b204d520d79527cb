#pragma once

// Power-type N-function toolkit: phi(t) = t^p / p, its shifts and
// conjugates, the vector maps A, V and T_alpha, the Jacobian DA and the
// Taylor remainder of A.

#include <cmath>

namespace plab {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
  friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double norm2(const Vec2& a) { return dot(a, a); }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
inline bool is_finite(const Vec2& a) { return std::isfinite(a.x) && std::isfinite(a.y); }

/// Counter-clockwise rotation by 90 degrees, (a, b) -> (-b, a).
constexpr Vec2 rot90(const Vec2& a) { return {-a.y, a.x}; }
constexpr Vec2 rot90_inv(const Vec2& a) { return {a.y, -a.x}; }

struct Mat2 {
  double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  constexpr Vec2 operator*(const Vec2& v) const {
    return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y};
  }
  friend constexpr Mat2 operator*(double s, const Mat2& m) {
    return {s * m.a11, s * m.a12, s * m.a21, s * m.a22};
  }
  constexpr bool is_symmetric() const { return a12 == a21; }
  constexpr double trace() const { return a11 + a22; }
  constexpr double det() const { return a11 * a22 - a12 * a21; }
};

/// Eigenvalues of a symmetric 2x2 matrix in ascending order.
struct EigenPair {
  double lo;
  double hi;
};
EigenPair symmetric_eigenvalues(const Mat2& m);

/// Growth exponent p > 1 together with its conjugate p' = p / (p - 1).
class ExponentCtx {
 public:
  /// Throws DomainError unless p is finite and p > 1.
  explicit ExponentCtx(double p);

  double p() const noexcept { return p_; }
  double p_conj() const noexcept { return p_conj_; }
  /// Context for the conjugate exponent p'.
  ExponentCtx conjugate() const { return ExponentCtx(p_conj_); }

 private:
  double p_;
  double p_conj_;
};

// Scalar N-functions.
double phi(const ExponentCtx& ctx, double t);
/// phi_a(t) = int_0^t phi'(max{a,s}) / max{a,s} * s ds, in closed form.
double phi_shifted(const ExponentCtx& ctx, double a, double t);
/// phi_a'(t) = max{a,t}^{p-2} t.
double phi_shifted_prime(const ExponentCtx& ctx, double a, double t);
/// (phi_a)^*(t) = (phi^*)_{phi'(a)}(t): the shift of the conjugate
/// N-function t^{p'}/p' by a^{p-1}.
double phi_conj_shifted(const ExponentCtx& ctx, double a, double t);

// Vector maps. All of them send 0 to 0.
Vec2 a_map(const ExponentCtx& ctx, const Vec2& q);
Vec2 v_map(const ExponentCtx& ctx, const Vec2& q);
Vec2 a_inv(const ExponentCtx& ctx, const Vec2& q);
Vec2 v_inv(const ExponentCtx& ctx, const Vec2& q);
/// T_alpha(Q) = |Q|^alpha Q / |Q|; throws DomainError for alpha <= 0.
Vec2 t_alpha(double alpha, const Vec2& q);

/// (DA)(Q) = |Q|^{p-2} (I + (p-2) Q (x) Q / |Q|^2). At Q = 0 it is the
/// identity for p = 2, zero for p > 2 and a SingularityError for p < 2.
Mat2 da_matrix(const ExponentCtx& ctx, const Vec2& q);
/// DA with |Q| floored at `floor` inside the power, used as a regularized
/// Newton Hessian block. Finite and positive definite for every Q when
/// floor > 0.
Mat2 da_matrix_floored(const ExponentCtx& ctx, const Vec2& q, double floor);
/// H(P,Q) = A(P) - A(Q) - DA(Q)(P-Q).
Vec2 h_remainder(const ExponentCtx& ctx, const Vec2& p, const Vec2& q);

/// The five mutually equivalent distances of the monotonicity lemma.
struct HammerPanel {
  double monotone;    // (A(P)-A(Q)).(P-Q)
  double v_distance;  // |V(P)-V(Q)|^2
  double weighted;    // (|Q|+|P|)^{p-2} |P-Q|^2
  double shifted;     // phi_{|Q|}(|P-Q|)
  double conj;        // (phi_{|Q|})^*(|A(P)-A(Q)|)
};
HammerPanel hammer_panel(const ExponentCtx& ctx, const Vec2& p, const Vec2& q);

/// Hoelder exponent of gradients of planar p-harmonic functions coming
/// from the quasi-conformal gradient estimate.
double alpha_exponent(double p);
/// Optimal C^{k,alpha} regularity exponent k + alpha of gradients of
/// planar p-harmonic functions.
double eta_exponent(double p);

namespace testing {
/// Fault injection for the self-test: flips the sign of a_map.
void set_a_map_sign_fault(bool on);
bool a_map_sign_fault();
}  // namespace testing

}  // namespace plab
