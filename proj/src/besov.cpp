#include "plab/besov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace plab {

std::string seminorm_kind_name(SeminormKind kind) { return kind == SeminormKind::Besov ? "besov" : "triebel"; }

SeminormKind parse_seminorm_kind(const std::string& name) {
  if (name == "besov") return SeminormKind::Besov;
  if (name == "triebel" || name == "tl") return SeminormKind::Triebel;
  throw ParameterError("unknown seminorm kind '" + name + "'");
}

namespace {

double inv(double x) { return std::isinf(x) ? 0.0 : 1.0 / x; }
double pos(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace

std::optional<std::string> SmoothnessParams::violation() const {
  if (!(s > 0.0 && s < 1.0)) return "s must lie in (0,1)";
  if (!(rho > 0.0)) return "rho must be positive";
  if (!(q > 0.0)) return "q must be positive";
  if (!(w >= 1.0)) return "w must lie in [1,inf]";
  if (!(2.0 * pos(inv(rho) - inv(w)) < s)) return "2(1/rho - 1/w)_+ >= s";
  if (kind == SeminormKind::Triebel) {
    if (std::isinf(rho)) return "triebel seminorm needs rho < inf";
    if (!(2.0 * pos(inv(q) - inv(w)) < s)) return "2(1/q - 1/w)_+ >= s";
  }
  return std::nullopt;
}

void SmoothnessParams::validate() const {
  if (auto v = violation()) throw ParameterError("inadmissible smoothness parameters: " + *v);
}

SmoothnessParams SmoothnessParams::transformed(double alpha) const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterError("power transform needs 0 < alpha <= 1");
  return {alpha * s, rho / alpha, q / alpha, w / alpha, kind};
}

bool embedding_check(const SmoothnessParams& params, double p_conj) {
  const double s = params.s;
  if (!(s > 0.0 && s < 1.0)) return false;
  if (!(params.rho > 0.0 && params.q > 0.0 && p_conj > 0.0)) return false;
  if (!(2.0 * pos(inv(params.rho) - inv(p_conj)) < s)) return false;
  if (params.kind == SeminormKind::Triebel && !(2.0 * pos(inv(params.q) - inv(p_conj)) < s)) return false;
  return true;
}

DyadicLadder::DyadicLadder(double outer_radius, int scales) : r_(outer_radius), j_(scales) {
  if (!(outer_radius > 0.0) || !std::isfinite(outer_radius)) throw ParameterError("ladder radius must be positive");
  if (scales < 4) throw ParameterError("dyadic ladder needs J >= 4");
}

double DyadicLadder::radius(int j) const { return std::ldexp(r_, -j); }

void DyadicLadder::check(const Grid2D& grid) const {
  const double finest = radius(j_ - 1);
  if (finest < 4.0 * grid.h()) {
    throw InsufficientResolution("insufficient scales: finest radius " + std::to_string(finest) +
                                 " is below 4h = " + std::to_string(4.0 * grid.h()));
  }
}

namespace {

// Per grid row, the column range of nodes strictly inside the ball
// (lo > hi when empty).
struct RowSpans {
  int j0 = 0;
  std::vector<int> lo, hi;
  bool has(int j) const { return j >= j0 && j < j0 + int(lo.size()) && lo[std::size_t(j - j0)] <= hi[std::size_t(j - j0)]; }
};

RowSpans ball_rows(const Grid2D& grid, const std::vector<std::size_t>& nodes) {
  RowSpans r;
  if (nodes.empty()) return r;
  const auto nx = std::size_t(grid.nx());
  r.j0 = int(nodes.front() / nx);
  const int j1 = int(nodes.back() / nx);
  r.lo.assign(std::size_t(j1 - r.j0 + 1), std::numeric_limits<int>::max());
  r.hi.assign(std::size_t(j1 - r.j0 + 1), std::numeric_limits<int>::min());
  for (std::size_t k : nodes) {
    const auto row = std::size_t(int(k / nx) - r.j0);
    const int i = int(k % nx);
    r.lo[row] = std::min(r.lo[row], i);
    r.hi[row] = std::max(r.hi[row], i);
  }
  return r;
}

// Half widths of the discrete disk {di^2 + dj^2 < (t/h)^2}, indexed by |dj|.
std::vector<int> disk_stencil(double t, double h) {
  const double r2 = (t / h) * (t / h);
  std::vector<int> half;
  for (int dj = 0; double(dj) * dj < r2; ++dj) {
    int hw = int(std::floor(std::sqrt(std::max(0.0, r2 - double(dj) * dj))));
    while (hw >= 0 && double(hw) * hw + double(dj) * dj >= r2) --hw;
    half.push_back(hw);
  }
  return half;
}

inline double sq(double v) { return v * v; }
inline double sq(const Vec2& v) { return norm2(v); }

template <class T>
OscillationTable build_table(const Field<T>& g, const Ball& ball, const DyadicLadder& ladder, double w) {
  require_oscillation_exponent(w);
  const Grid2D& grid = g.grid();
  ladder.check(grid);
  const auto nodes = nodes_in(grid, ball);
  require_resolution(nodes.size(), ball);
  const RowSpans rows = ball_rows(grid, nodes);
  const auto nx = std::size_t(grid.nx());
  const T* v = g.values().data();
  const bool w_inf = std::isinf(w);

  OscillationTable table{ball, ladder, w, nodes.size(), {}};
  table.osc.assign(std::size_t(ladder.scales()), std::vector<double>(nodes.size()));
  for (int j = 0; j < ladder.scales(); ++j) {
    const std::vector<int> half = disk_stencil(ladder.radius(j), grid.h());
    const int m = int(half.size()) - 1;
    std::vector<double>& out = table.osc[std::size_t(j)];
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      const int ci = int(nodes[n] % nx);
      const int cj = int(nodes[n] / nx);
      auto visit = [&](auto&& fn) {
        for (int dj = -m; dj <= m; ++dj) {
          const int jj = cj + dj;
          if (!rows.has(jj)) continue;
          const int hw = half[std::size_t(std::abs(dj))];
          const int lo = std::max(ci - hw, rows.lo[std::size_t(jj - rows.j0)]);
          const int hi = std::min(ci + hw, rows.hi[std::size_t(jj - rows.j0)]);
          const T* row = v + std::size_t(jj) * nx;
          for (int i = lo; i <= hi; ++i) fn(row[i]);
        }
      };
      // The centre node is always visited; summing offsets from it keeps
      // constant data exactly constant.
      const T ref = v[nodes[n]];
      T sum{};
      std::size_t count = 0;
      visit([&](const T& x) {
        sum += x - ref;
        ++count;
      });
      const T mean = ref + sum / double(count);
      double acc = 0.0;
      if (w_inf) {
        visit([&](const T& x) { acc = std::max(acc, sq(x - mean)); });
        out[n] = std::sqrt(acc);
      } else if (w == 1.0) {
        visit([&](const T& x) { acc += std::sqrt(sq(x - mean)); });
        out[n] = acc / double(count);
      } else if (w == 2.0) {
        visit([&](const T& x) { acc += sq(x - mean); });
        out[n] = std::sqrt(acc / double(count));
      } else {
        visit([&](const T& x) { acc += pow_magnitude(sq(x - mean), w); });
        out[n] = std::pow(acc / double(count), 1.0 / w);
      }
    }
  }
  return table;
}

// (mean |x|^r)^{1/r}, max for r = inf.
double power_mean(const std::vector<double>& x, double r) {
  if (std::isinf(r)) {
    double m = 0.0;
    for (double v : x) m = std::max(m, v);
    return m;
  }
  double acc = 0.0;
  for (double v : x) acc += std::pow(v, r);
  return std::pow(acc / double(x.size()), 1.0 / r);
}

// (sum ln2 a_j^q)^{1/q}, max for q = inf.
double scale_sum(const double* a, std::size_t n, std::size_t stride, double q) {
  if (std::isinf(q)) {
    double m = 0.0;
    for (std::size_t j = 0; j < n; ++j) m = std::max(m, a[j * stride]);
    return m;
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) acc += std::pow(a[j * stride], q);
  return std::pow(std::numbers::ln2 * acc, 1.0 / q);
}

}  // namespace

OscillationTable oscillation_table(const ScalarField& g, const Ball& ball, const DyadicLadder& ladder, double w) {
  return build_table(g, ball, ladder, w);
}

OscillationTable oscillation_table(const VectorField& g, const Ball& ball, const DyadicLadder& ladder, double w) {
  return build_table(g, ball, ladder, w);
}

SeminormReport seminorm_from_table(const OscillationTable& table, const SmoothnessParams& params) {
  params.validate();
  if (params.w != table.w) throw ParameterError("oscillation table was built for a different w");
  const auto scales = std::size_t(table.ladder.scales());
  const double rs = std::pow(table.ladder.outer_radius(), params.s);
  SeminormReport rep;
  rep.a.resize(scales);
  for (std::size_t j = 0; j < scales; ++j) {
    rep.a[j] = power_mean(table.osc[j], params.rho) / std::pow(table.ladder.radius(int(j)), params.s);
  }
  if (params.kind == SeminormKind::Besov) {
    rep.value = rs * scale_sum(rep.a.data(), scales, 1, params.q);
    return rep;
  }
  std::vector<double> scaled(scales);
  std::vector<double> per_node(table.nodes);
  for (std::size_t j = 0; j < scales; ++j) scaled[j] = std::pow(table.ladder.radius(int(j)), -params.s);
  std::vector<double> column(scales);
  for (std::size_t n = 0; n < table.nodes; ++n) {
    for (std::size_t j = 0; j < scales; ++j) column[j] = table.osc[j][n] * scaled[j];
    per_node[n] = scale_sum(column.data(), scales, 1, params.q);
  }
  rep.value = rs * power_mean(per_node, params.rho);
  return rep;
}

namespace {

template <class T>
double seminorm(const Field<T>& g, const Ball& ball, const SmoothnessParams& params, const DyadicLadder& ladder) {
  params.validate();
  return seminorm_from_table(build_table(g, ball, ladder, params.w), params).value;
}

SmoothnessParams as_kind(SmoothnessParams p, SeminormKind k) {
  p.kind = k;
  return p;
}

}  // namespace

double besov_seminorm(const ScalarField& g, const Ball& ball, const SmoothnessParams& params,
                      const DyadicLadder& ladder) {
  return seminorm(g, ball, as_kind(params, SeminormKind::Besov), ladder);
}

double besov_seminorm(const VectorField& g, const Ball& ball, const SmoothnessParams& params,
                      const DyadicLadder& ladder) {
  return seminorm(g, ball, as_kind(params, SeminormKind::Besov), ladder);
}

double triebel_seminorm(const ScalarField& g, const Ball& ball, const SmoothnessParams& params,
                        const DyadicLadder& ladder) {
  return seminorm(g, ball, as_kind(params, SeminormKind::Triebel), ladder);
}

double triebel_seminorm(const VectorField& g, const Ball& ball, const SmoothnessParams& params,
                        const DyadicLadder& ladder) {
  return seminorm(g, ball, as_kind(params, SeminormKind::Triebel), ladder);
}

double PowerTransformRatio::ratio() const {
  if (transformed == 0.0 && powered == 0.0) return 0.0;
  return transformed / powered;
}

PowerTransformRatio power_transform_ratio(const VectorField& g, const Ball& ball, const SmoothnessParams& params,
                                          const DyadicLadder& ladder, double alpha) {
  const SmoothnessParams tp = params.transformed(alpha);
  params.validate();
  tp.validate();
  const VectorField tg = transform(g, [&](const Vec2& v) { return t_alpha(alpha, v); });
  const double lhs = seminorm(tg, ball, tp, ladder);
  const double rhs = std::pow(seminorm(g, ball, params, ladder), alpha);
  return {lhs, rhs};
}

}  // namespace plab
