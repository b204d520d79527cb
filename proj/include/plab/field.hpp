#pragma once

// Uniform 2D grids, nodal scalar/vector fields, and ball-restricted
// statistics (averages, oscillations, A-/V-averages).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plab/errors.hpp"
#include "plab/orlicz.hpp"

namespace plab {

/// Minimum number of grid nodes a ball must contain before any statistic
/// over it is trusted.
inline constexpr std::size_t kMinBallNodes = 16;

class Grid2D {
 public:
  /// Throws DomainError unless h > 0 and nx, ny >= 2.
  Grid2D(double x0, double y0, double h, int nx, int ny);

  /// n x n nodes covering [lo, hi]^2.
  static Grid2D square(double lo, double hi, int n);

  double x0() const { return x0_; }
  double y0() const { return y0_; }
  double h() const { return h_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const { return std::size_t(nx_) * std::size_t(ny_); }
  std::size_t index(int i, int j) const { return std::size_t(j) * std::size_t(nx_) + std::size_t(i); }
  double x(int i) const { return x0_ + h_ * i; }
  double y(int j) const { return y0_ + h_ * j; }
  Vec2 point(int i, int j) const { return {x(i), y(j)}; }
  Vec2 point(std::size_t k) const { return point(int(k % std::size_t(nx_)), int(k / std::size_t(nx_))); }
  double x_max() const { return x(nx_ - 1); }
  double y_max() const { return y(ny_ - 1); }
  bool on_boundary(int i, int j) const { return i == 0 || j == 0 || i == nx_ - 1 || j == ny_ - 1; }
  /// Closed rectangle spanned by the nodes.
  bool contains(const Vec2& pt) const {
    return pt.x >= x0_ && pt.x <= x_max() && pt.y >= y0_ && pt.y <= y_max();
  }

  friend bool operator==(const Grid2D&, const Grid2D&) = default;

 private:
  double x0_, y0_, h_;
  int nx_, ny_;
};

/// Open Euclidean ball.
class Ball {
 public:
  Ball(Vec2 center, double radius);

  const Vec2& center() const { return center_; }
  double radius() const { return radius_; }
  /// Same center, radius scaled by `factor` (the ball lambda*B).
  Ball scaled(double factor) const { return Ball(center_, radius_ * factor); }
  bool contains(const Vec2& pt) const { return norm2(pt - center_) < radius_ * radius_; }
  /// Closed ball contained in the closed grid rectangle.
  bool inside(const Grid2D& g) const {
    return center_.x - radius_ >= g.x0() && center_.x + radius_ <= g.x_max() &&
           center_.y - radius_ >= g.y0() && center_.y + radius_ <= g.y_max();
  }

 private:
  Vec2 center_;
  double radius_;
};

template <class T>
class Field {
 public:
  using value_type = T;

  Field(Grid2D grid, std::vector<T> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw DomainError("field length " + std::to_string(values_.size()) +
                        " does not match grid size " + std::to_string(grid_.size()));
    }
    for (const T& v : values_) {
      if (!finite(v)) throw DomainError("field contains a non-finite value");
    }
  }
  Field(Grid2D grid, const T& fill) : grid_(grid), values_(grid.size(), fill) {}

  const Grid2D& grid() const { return grid_; }
  std::span<const T> values() const& { return values_; }
  /// Moves the storage out of a temporary so `for (x : f().values())`
  /// does not read freed memory.
  std::vector<T> values() && { return std::move(values_); }
  const T& operator[](std::size_t k) const { return values_[k]; }
  const T& operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
  std::size_t size() const { return values_.size(); }

 private:
  static bool finite(double v) { return std::isfinite(v); }
  static bool finite(const Vec2& v) { return is_finite(v); }

  Grid2D grid_;
  std::vector<T> values_;
};

using ScalarField = Field<double>;
using VectorField = Field<Vec2>;

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const Vec2& v) { return norm(v); }
inline double magnitude_sq(double v) { return v * v; }
inline double magnitude_sq(const Vec2& v) { return norm2(v); }

/// Samples `fn(Vec2)` at every grid node.
template <class Fn>
auto sample(const Grid2D& grid, Fn&& fn) {
  using T = std::decay_t<decltype(fn(Vec2{}))>;
  std::vector<T> v(grid.size());
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) v[grid.index(i, j)] = fn(grid.point(i, j));
  }
  return Field<T>(grid, std::move(v));
}

/// Pointwise image `fn(value)` of a field.
template <class T, class Fn>
auto transform(const Field<T>& f, Fn&& fn) {
  using U = std::decay_t<decltype(fn(f[0]))>;
  std::vector<U> v(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) v[k] = fn(f[k]);
  return Field<U>(f.grid(), std::move(v));
}

VectorField a_field(const ExponentCtx& ctx, const VectorField& g);
VectorField v_field(const ExponentCtx& ctx, const VectorField& g);

/// Visits every node strictly inside `ball` (row by row, increasing index).
template <class Fn>
void for_each_node_in(const Grid2D& grid, const Ball& ball, Fn&& fn) {
  const double r = ball.radius();
  const double r2 = r * r;
  const double h = grid.h();
  const Vec2 c = ball.center();
  int j_lo = std::max(0, int(std::floor((c.y - r - grid.y0()) / h)));
  int j_hi = std::min(grid.ny() - 1, int(std::ceil((c.y + r - grid.y0()) / h)));
  int i_lo0 = std::max(0, int(std::floor((c.x - r - grid.x0()) / h)));
  int i_hi0 = std::min(grid.nx() - 1, int(std::ceil((c.x + r - grid.x0()) / h)));
  for (int j = j_lo; j <= j_hi; ++j) {
    const double dy = grid.y(j) - c.y;
    const double rem = r2 - dy * dy;
    if (rem <= 0.0) continue;
    const double half = std::sqrt(rem);
    int i_lo = std::max(i_lo0, int(std::floor((c.x - half - grid.x0()) / h)));
    int i_hi = std::min(i_hi0, int(std::ceil((c.x + half - grid.x0()) / h)));
    const std::size_t row = std::size_t(j) * std::size_t(grid.nx());
    for (int i = i_lo; i <= i_hi; ++i) {
      const double dx = grid.x(i) - c.x;
      if (dx * dx + dy * dy < r2) fn(row + std::size_t(i));
    }
  }
}

std::vector<std::size_t> nodes_in(const Grid2D& grid, const Ball& ball);

/// Throws InsufficientResolution when fewer than kMinBallNodes nodes are
/// given.
void require_resolution(std::size_t count, const Ball& ball);

// Statistics over an explicit node set ------------------------------------

/// Mean taken relative to the first value, so constant data has an exact
/// mean and zero oscillation.
template <class T>
T mean_over(const Field<T>& f, std::span<const std::size_t> nodes) {
  const T ref = f[nodes.front()];
  T acc{};
  for (std::size_t k : nodes) acc += f[k] - ref;
  return ref + acc / double(nodes.size());
}

/// |x|^w for the exponents used on hot paths, std::pow otherwise.
inline double pow_magnitude(double mag_sq, double w) {
  if (w == 2.0) return mag_sq;
  const double m = std::sqrt(mag_sq);
  if (w == 1.0) return m;
  if (w == 1.5) return m * std::sqrt(m);
  if (w == 3.0) return m * mag_sq;
  return std::pow(m, w);
}

/// (mean |f - c|^w)^{1/w}, or max |f - c| for w = inf.
template <class T>
double deviation_over(const Field<T>& f, std::span<const std::size_t> nodes, const T& c, double w) {
  if (std::isinf(w)) {
    double m = 0.0;
    for (std::size_t k : nodes) m = std::max(m, magnitude_sq(f[k] - c));
    return std::sqrt(m);
  }
  double acc = 0.0;
  for (std::size_t k : nodes) acc += pow_magnitude(magnitude_sq(f[k] - c), w);
  acc /= double(nodes.size());
  return w == 1.0 ? acc : std::pow(acc, 1.0 / w);
}

template <class T>
double oscillation_over(const Field<T>& f, std::span<const std::size_t> nodes, double w) {
  return deviation_over(f, nodes, mean_over(f, nodes), w);
}

void require_oscillation_exponent(double w);

// Ball statistics -----------------------------------------------------------

/// Mean of the nodal values strictly inside `ball`.
template <class T>
T ball_average(const Field<T>& f, const Ball& ball) {
  const auto nodes = nodes_in(f.grid(), ball);
  require_resolution(nodes.size(), ball);
  return mean_over(f, std::span<const std::size_t>(nodes));
}

/// osc_w f over `ball`: (mean |f - <f>|^w)^{1/w}, max deviation for w = inf.
template <class T>
double oscillation(const Field<T>& f, const Ball& ball, double w) {
  require_oscillation_exponent(w);
  const auto nodes = nodes_in(f.grid(), ball);
  require_resolution(nodes.size(), ball);
  return oscillation_over(f, std::span<const std::size_t>(nodes), w);
}

/// Mean-power average (mean |f|^w)^{1/w} of a scalar quantity over `ball`.
double ball_power_mean(const ScalarField& f, const Ball& ball, double w);

/// Oscillation about the mean versus the infimum over all constants.
struct MeanEquivalence {
  double about_mean;
  double infimum;
  /// infimum <= about_mean <= 2 * infimum (up to round-off).
  bool bracket_holds() const {
    const double slack = 1e-12 * std::max(1.0, about_mean);
    return infimum <= about_mean + slack && about_mean <= 2.0 * infimum + slack;
  }
};

MeanEquivalence mean_equivalence_check(const ScalarField& f, const Ball& ball, double w);
MeanEquivalence mean_equivalence_check(const VectorField& f, const Ball& ball, double w);

/// A^{-1}(<A(g)>_B).
Vec2 a_average(const VectorField& g, const Ball& ball, const ExponentCtx& ctx);
/// V^{-1}(<V(g)>_B).
Vec2 v_average(const VectorField& g, const Ball& ball, const ExponentCtx& ctx);

/// mean|V(g) - <V(g)>_B|^2 / mean|V(g)|^2 over `ball`. Empty when g vanishes
/// identically on the ball (the degenerate-zero case).
std::optional<double> nondegeneracy_ratio(const VectorField& g, const Ball& ball, const ExponentCtx& ctx);

// Difference operators ------------------------------------------------------

/// Central differences at interior nodes, second-order one-sided at the
/// boundary (first-order when an axis has only two nodes). Exact on
/// affine fields.
VectorField gradient(const ScalarField& u);
ScalarField divergence(const VectorField& g);
/// d g_y/dx - d g_x/dy with the same stencils.
ScalarField curl(const VectorField& g);

}  // namespace plab
