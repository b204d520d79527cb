#include "plab/decay.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace plab {

std::string quantity_name(Quantity q) {
  switch (q) {
    case Quantity::AGrad:
      return "A_grad";
    case Quantity::Grad:
      return "grad";
    case Quantity::VGrad:
      return "V_grad";
    case Quantity::F:
      return "F";
  }
  return "?";
}

Quantity parse_quantity(const std::string& name) {
  if (name == "A_grad") return Quantity::AGrad;
  if (name == "grad") return Quantity::Grad;
  if (name == "V_grad") return Quantity::VGrad;
  if (name == "F") return Quantity::F;
  throw ParameterError("unknown quantity '" + name + "'");
}

namespace {

template <class T>
DecayProfile profile_impl(const Field<T>& g, Vec2 x, double t0, double theta, int K, double w, Quantity quantity) {
  if (!(theta > 0.0 && theta < 1.0)) throw ParameterError("theta must lie in (0,1)");
  if (K < 4) throw ParameterError("decay profile needs K >= 4 scales");
  require_oscillation_exponent(w);
  const Ball outer(x, t0);
  if (!outer.inside(g.grid())) throw DomainError("decay ball B_t0(x) leaves the grid");
  DecayProfile prof;
  prof.center = x;
  prof.t0 = t0;
  prof.theta = theta;
  prof.w = w;
  prof.quantity = quantity;
  const double min_radius = 4.0 * g.grid().h();
  double t = t0;
  for (int k = 0; k < K; ++k, t *= theta) {
    if (t < min_radius) {
      ++prof.truncated;
      continue;
    }
    prof.radii.push_back(t);
    prof.osc.push_back(oscillation(g, Ball(x, t), w));
  }
  if (prof.radii.size() < 4) {
    throw InsufficientResolution("only " + std::to_string(prof.radii.size()) +
                                 " decay scales satisfy t_k >= 4h");
  }
  return prof;
}

}  // namespace

DecayProfile decay_profile(const ScalarField& g, Vec2 x, double t0, double theta, int K, double w,
                           Quantity quantity) {
  return profile_impl(g, x, t0, theta, K, w, quantity);
}

DecayProfile decay_profile(const VectorField& g, Vec2 x, double t0, double theta, int K, double w,
                           Quantity quantity) {
  return profile_impl(g, x, t0, theta, K, w, quantity);
}

std::string fit_status_name(FitStatus s) {
  switch (s) {
    case FitStatus::Ok:
      return "ok";
    case FitStatus::Saturated:
      return "saturated";
    case FitStatus::ExactDecay:
      return "exact_decay";
  }
  return "?";
}

BetaFit fit_beta(const std::vector<double>& radii, const std::vector<double>& osc) {
  if (radii.size() != osc.size()) throw ParameterError("radii and oscillations differ in length");
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < osc.size(); ++k) {
    if (!(radii[k] > 0.0) || !std::isfinite(osc[k])) throw ParameterError("invalid decay profile entry");
    if (osc[k] > kZeroOscillation) {
      lx.push_back(std::log(radii[k]));
      ly.push_back(std::log(osc[k]));
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (lx.empty()) return {std::numeric_limits<double>::infinity(), 1.0, 0.0, FitStatus::ExactDecay, 0};
  if (lx.size() < 4) return {nan, nan, nan, FitStatus::Saturated, lx.size()};
  const double n = double(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    mx += lx[k];
    my += ly[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxy += (lx[k] - mx) * (ly[k] - my);
    syy += (ly[k] - my) * (ly[k] - my);
  }
  const double slope = sxy / sxx;
  double ss_res = 0.0, max_dev = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    const double r = ly[k] - (my + slope * (lx[k] - mx));
    ss_res += r * r;
    max_dev = std::max(max_dev, std::abs(r));
  }
  const double r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return {slope, r2, max_dev, FitStatus::Ok, lx.size()};
}

BetaFit fit_beta(const DecayProfile& profile) { return fit_beta(profile.radii, profile.osc); }

std::string ball_class_name(BallClass c) {
  switch (c) {
    case BallClass::NonDegenerate:
      return "non_degenerate";
    case BallClass::Degenerate:
      return "degenerate";
    case BallClass::DegenerateZero:
      return "degenerate_zero";
  }
  return "?";
}

BallClass classify_ball(const VectorField& grad, const Ball& ball, const ExponentCtx& ctx, double epsilon_dg) {
  if (!(epsilon_dg > 0.0)) throw ParameterError("epsilon_dg must be positive");
  const auto r = nondegeneracy_ratio(grad, ball, ctx);
  if (!r) return BallClass::DegenerateZero;
  return *r <= epsilon_dg ? BallClass::NonDegenerate : BallClass::Degenerate;
}

double Sides::ratio() const {
  if (rhs < kVanishingRhs) {
    if (lhs < kVanishingRhs) return 0.0;
    return std::numeric_limits<double>::infinity();
  }
  return lhs / rhs;
}

Sides reverse_holder_ratio(const VectorField& h_grad, const Ball& ball, const ExponentCtx& ctx) {
  const Ball outer = ball.scaled(2.0);
  if (!outer.inside(h_grad.grid())) throw DomainError("2B must lie inside the grid");
  const VectorField flux = a_field(ctx, h_grad);
  return {oscillation(flux, ball, ctx.p_conj()), oscillation(flux, outer, 1.0)};
}

Sides nonlin_comparison_defect(const ScalarField& u, const VectorField& f, const Ball& ball, const ExponentCtx& ctx,
                               const SolverOptions& opts) {
  if (!(f.grid() == u.grid())) throw ParameterError("forcing grid differs from solution grid");
  const ScalarField h = comparison_solve(u, ball, ctx, opts);
  const VectorField gu = gradient(u);
  const VectorField gh = gradient(h);
  const auto nodes = nodes_in(u.grid(), ball);
  require_resolution(nodes.size(), ball);
  const Vec2 fmean = mean_over(f, std::span<const std::size_t>(nodes));
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t k : nodes) {
    lhs += norm2(v_map(ctx, gu[k]) - v_map(ctx, gh[k]));
    rhs += phi_conj_shifted(ctx, norm(gu[k]), norm(f[k] - fmean));
  }
  const double n = double(nodes.size());
  return {lhs / n, rhs / n};
}

std::optional<LinearComparison> linear_comparison_defect(const ScalarField& u, const VectorField& f, const Ball& ball,
                                                         const ExponentCtx& ctx) {
  const Grid2D& g = u.grid();
  if (!(f.grid() == g)) throw ParameterError("forcing grid differs from solution grid");
  if (!ball.inside(g)) throw DomainError("comparison ball must lie inside the grid");
  const VectorField gu = gradient(u);
  const Vec2 q = a_average(gu, ball, ctx);
  if (norm(q) == 0.0) return std::nullopt;
  const ScalarField z = solve_linearized(ctx, q, VectorField(g, Vec2{}), u, ball_mask(g, ball));
  const VectorField gz = gradient(z);
  const auto nodes = nodes_in(g, ball);
  const Vec2 fmean = mean_over(f, std::span<const std::size_t>(nodes));
  const double pc = ctx.p_conj();
  double lhs = 0.0, ht = 0.0, ft = 0.0;
  for (std::size_t k : nodes) {
    lhs += pow_magnitude(norm2(gu[k] - gz[k]), pc);
    ht += pow_magnitude(norm2(h_remainder(ctx, gu[k], q)), pc);
    ft += pow_magnitude(norm2(f[k] - fmean), pc);
  }
  const double n = double(nodes.size());
  const double weight = std::pow(norm(q), (ctx.p() - 2.0) * pc);
  return LinearComparison{weight * lhs / n, ht / n, ft / n};
}

double iterative_lemma_check(double c0, double beta, int M) {
  if (!(c0 > 0.0) || !(beta > 0.0)) throw ParameterError("iterative lemma needs c0, beta > 0");
  if (M < 2) throw ParameterError("iterative lemma needs M >= 2");
  // b_m 2^{m beta} = c0 * S_m with S_m = sum_{k<m} b_k, so the ratio is
  // evaluated without under- or overflow.
  const double bound = std::exp(c0 / (1.0 - std::exp2(-beta)));
  double sum = 1.0;  // S_1 = b_0
  double best = 1.0 / bound;
  for (int m = 1; m <= M; ++m) {
    const double scaled = c0 * sum;  // b_m 2^{m beta}
    best = std::max(best, scaled / bound);
    sum += scaled * std::exp2(-double(m) * beta);
  }
  return best;
}

double OscEstimateTerms::required_constant() const {
  const double gap = lhs - decay;
  if (gap <= 0.0) return 0.0;
  if (forcing <= 0.0) return std::numeric_limits<double>::infinity();
  return gap / forcing;
}

OscEstimateTerms osc_estimate_terms(const VectorField& flux, const VectorField& f, const Ball& ball,
                                    const ExponentCtx& ctx, double theta0, double beta) {
  if (!(theta0 > 0.0 && theta0 < 1.0)) throw ParameterError("theta0 must lie in (0,1)");
  if (!(beta > 0.0)) throw ParameterError("beta must be positive");
  const double pc = ctx.p_conj();
  return {oscillation(flux, ball.scaled(theta0), pc), std::pow(theta0, beta) * oscillation(flux, ball, pc),
          oscillation(f, ball, pc)};
}

double osc_estimate_residual(const ScalarField& u, const VectorField& f, const Ball& ball, const ExponentCtx& ctx,
                          double theta0, double beta, double c) {
  const VectorField flux = a_field(ctx, gradient(u));
  return osc_estimate_terms(flux, f, ball, ctx, theta0, beta).residual(c);
}

std::vector<TransferRow> transfer_rows(const VectorField& flux, const VectorField& f, const Ball& ball,
                                       const std::vector<SmoothnessParams>& rows, int J, const ExponentCtx& ctx) {
  const Ball outer = ball.scaled(2.0);
  if (!outer.inside(flux.grid())) throw DomainError("2B must lie inside the grid");
  const DyadicLadder inner_ladder(ball.radius(), J);
  const DyadicLadder outer_ladder(outer.radius(), J);
  std::vector<TransferRow> out;
  std::map<double, std::pair<OscillationTable, OscillationTable>> tables;
  std::optional<double> zero_order;
  for (const SmoothnessParams& p : rows) {
    TransferRow row{p, std::nullopt, {}};
    if (auto v = p.violation()) {
      row.skipped = *v;
    } else if (!embedding_check(p, ctx.p_conj())) {
      row.skipped = "embedding condition fails for p' = " + std::to_string(ctx.p_conj());
    }
    if (!row.skipped) {
      auto it = tables.find(p.w);
      if (it == tables.end()) {
        it = tables
                 .emplace(p.w, std::make_pair(oscillation_table(flux, ball, inner_ladder, p.w),
                                              oscillation_table(f, outer, outer_ladder, p.w)))
                 .first;
      }
      if (!zero_order) zero_order = oscillation(flux, outer, ctx.p_conj());
      row.sides.lhs = seminorm_from_table(it->second.first, p).value;
      row.sides.rhs = seminorm_from_table(it->second.second, p).value + *zero_order;
    }
    out.push_back(std::move(row));
  }
  return out;
}

Sides transfer_ratio(const ScalarField& u, const VectorField& f, const Ball& ball, const SmoothnessParams& params,
                     int J, const ExponentCtx& ctx) {
  params.validate();
  if (!embedding_check(params, ctx.p_conj())) {
    throw ParameterError("embedding condition fails for p' = " + std::to_string(ctx.p_conj()));
  }
  const VectorField flux = a_field(ctx, gradient(u));
  return transfer_rows(flux, f, ball, {params}, J, ctx).front().sides;
}

}  // namespace plab
