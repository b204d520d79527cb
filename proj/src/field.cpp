#include "plab/field.hpp"

#include <limits>

namespace plab {

Grid2D::Grid2D(double x0, double y0, double h, int nx, int ny)
    : x0_(x0), y0_(y0), h_(h), nx_(nx), ny_(ny) {
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("grid spacing must be positive");
  if (!std::isfinite(x0) || !std::isfinite(y0)) throw DomainError("grid origin must be finite");
  if (nx < 2 || ny < 2) throw DomainError("grid needs at least two nodes per axis");
}

Grid2D Grid2D::square(double lo, double hi, int n) {
  if (n < 2 || !(hi > lo)) throw DomainError("invalid square grid");
  return Grid2D(lo, lo, (hi - lo) / double(n - 1), n, n);
}

Ball::Ball(Vec2 center, double radius) : center_(center), radius_(radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw DomainError("ball radius must be positive");
  if (!is_finite(center)) throw DomainError("ball center must be finite");
}

VectorField a_field(const ExponentCtx& ctx, const VectorField& g) {
  return transform(g, [&](const Vec2& q) { return a_map(ctx, q); });
}

VectorField v_field(const ExponentCtx& ctx, const VectorField& g) {
  return transform(g, [&](const Vec2& q) { return v_map(ctx, q); });
}

std::vector<std::size_t> nodes_in(const Grid2D& grid, const Ball& ball) {
  std::vector<std::size_t> out;
  for_each_node_in(grid, ball, [&](std::size_t k) { out.push_back(k); });
  return out;
}

void require_resolution(std::size_t count, const Ball& ball) {
  if (count < kMinBallNodes) {
    throw InsufficientResolution("ball at (" + std::to_string(ball.center().x) + ", " +
                                 std::to_string(ball.center().y) + ") radius " +
                                 std::to_string(ball.radius()) + " contains only " +
                                 std::to_string(count) + " grid nodes");
  }
}

void require_oscillation_exponent(double w) {
  if (!(w >= 1.0)) throw ParameterError("oscillation exponent w must lie in [1, inf]");
}

double ball_power_mean(const ScalarField& f, const Ball& ball, double w) {
  const auto nodes = nodes_in(f.grid(), ball);
  require_resolution(nodes.size(), ball);
  return deviation_over(f, std::span<const std::size_t>(nodes), 0.0, w);
}

namespace {

// Golden-section minimisation of a convex function on [lo, hi].
template <class Fn>
double golden_min(Fn&& fn, double lo, double hi, double& arg) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = fn(c), fd = fn(d);
  const double tol = 1e-15 * (std::abs(lo) + std::abs(hi) + 1.0);
  for (int it = 0; it < 200 && (b - a) > tol; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = fn(d);
    }
  }
  arg = 0.5 * (a + b);
  return fn(arg);
}

}  // namespace

MeanEquivalence mean_equivalence_check(const ScalarField& f, const Ball& ball, double w) {
  if (!(w >= 1.0) || std::isinf(w)) throw ParameterError("mean_equivalence_check needs 1 <= w < inf");
  const auto nodes = nodes_in(f.grid(), ball);
  require_resolution(nodes.size(), ball);
  const std::span<const std::size_t> span(nodes);
  const double mean = mean_over(f, span);
  const double about_mean = deviation_over(f, span, mean, w);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t k : nodes) {
    lo = std::min(lo, f[k]);
    hi = std::max(hi, f[k]);
  }
  double best = about_mean;
  if (hi > lo) {
    double arg = mean;
    const double v = golden_min([&](double c) { return deviation_over(f, span, c, w); }, lo, hi, arg);
    best = std::min(best, v);
  }
  return {about_mean, best};
}

MeanEquivalence mean_equivalence_check(const VectorField& f, const Ball& ball, double w) {
  if (!(w >= 1.0) || std::isinf(w)) throw ParameterError("mean_equivalence_check needs 1 <= w < inf");
  const auto nodes = nodes_in(f.grid(), ball);
  require_resolution(nodes.size(), ball);
  const std::span<const std::size_t> span(nodes);
  const Vec2 mean = mean_over(f, span);
  const double about_mean = deviation_over(f, span, mean, w);
  Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Vec2 hi = -lo;
  for (std::size_t k : nodes) {
    lo = {std::min(lo.x, f[k].x), std::min(lo.y, f[k].y)};
    hi = {std::max(hi.x, f[k].x), std::max(hi.y, f[k].y)};
  }
  // Cyclic coordinate descent; each sweep only accepts improvements.
  Vec2 c = mean;
  double best = about_mean;
  for (int sweep = 0; sweep < 40; ++sweep) {
    const double before = best;
    if (hi.x > lo.x) {
      double arg = c.x;
      const double v = golden_min(
          [&](double t) { return deviation_over(f, span, Vec2{t, c.y}, w); }, lo.x, hi.x, arg);
      if (v < best) {
        best = v;
        c.x = arg;
      }
    }
    if (hi.y > lo.y) {
      double arg = c.y;
      const double v = golden_min(
          [&](double t) { return deviation_over(f, span, Vec2{c.x, t}, w); }, lo.y, hi.y, arg);
      if (v < best) {
        best = v;
        c.y = arg;
      }
    }
    if (before - best <= 1e-15 * std::max(1.0, before)) break;
  }
  return {about_mean, best};
}

Vec2 a_average(const VectorField& g, const Ball& ball, const ExponentCtx& ctx) {
  const auto nodes = nodes_in(g.grid(), ball);
  require_resolution(nodes.size(), ball);
  Vec2 acc{};
  for (std::size_t k : nodes) acc += a_map(ctx, g[k]);
  return a_inv(ctx, acc / double(nodes.size()));
}

Vec2 v_average(const VectorField& g, const Ball& ball, const ExponentCtx& ctx) {
  const auto nodes = nodes_in(g.grid(), ball);
  require_resolution(nodes.size(), ball);
  Vec2 acc{};
  for (std::size_t k : nodes) acc += v_map(ctx, g[k]);
  return v_inv(ctx, acc / double(nodes.size()));
}

std::optional<double> nondegeneracy_ratio(const VectorField& g, const Ball& ball, const ExponentCtx& ctx) {
  const auto nodes = nodes_in(g.grid(), ball);
  require_resolution(nodes.size(), ball);
  std::vector<Vec2> v;
  v.reserve(nodes.size());
  Vec2 mean{};
  for (std::size_t k : nodes) {
    v.push_back(v_map(ctx, g[k]));
    mean += v.back();
  }
  mean = mean / double(nodes.size());
  double num = 0.0, den = 0.0;
  for (const Vec2& x : v) {
    num += norm2(x - mean);
    den += norm2(x);
  }
  if (den == 0.0) return std::nullopt;
  return num / den;
}

namespace {

// Derivative along one axis of a strided 1D line of values.
template <class T, class Get>
T axis_derivative(Get&& at, int i, int n, double h) {
  if (n == 2) return (at(1) - at(0)) / h;
  if (i == 0) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
  if (i == n - 1) return (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h);
  return (at(i + 1) - at(i - 1)) / (2.0 * h);
}

template <class T>
T dx(const Field<T>& f, int i, int j) {
  return axis_derivative<T>([&](int a) { return f(a, j); }, i, f.grid().nx(), f.grid().h());
}

template <class T>
T dy(const Field<T>& f, int i, int j) {
  return axis_derivative<T>([&](int b) { return f(i, b); }, j, f.grid().ny(), f.grid().h());
}

}  // namespace

VectorField gradient(const ScalarField& u) {
  const Grid2D& g = u.grid();
  std::vector<Vec2> out(g.size());
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) out[g.index(i, j)] = {dx(u, i, j), dy(u, i, j)};
  }
  return VectorField(g, std::move(out));
}

ScalarField divergence(const VectorField& f) {
  const Grid2D& g = f.grid();
  std::vector<double> out(g.size());
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) out[g.index(i, j)] = dx(f, i, j).x + dy(f, i, j).y;
  }
  return ScalarField(g, std::move(out));
}

ScalarField curl(const VectorField& f) {
  const Grid2D& g = f.grid();
  std::vector<double> out(g.size());
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) out[g.index(i, j)] = dx(f, i, j).y - dy(f, i, j).x;
  }
  return ScalarField(g, std::move(out));
}

}  // namespace plab
