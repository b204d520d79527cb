#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "plab/cli.hpp"
#include "plab/field_io.hpp"
#include "plab/suites.hpp"

namespace plab::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Stream ids for seeds derived from the top-level seed.
constexpr std::uint64_t kBoundaryStream = 1;
constexpr std::uint64_t kForcingStream = 2;
constexpr std::uint64_t kBallStream = 3;

std::string seed_text(const ExperimentConfig& c) { return c.seed ? std::to_string(*c.seed) : "none"; }

std::string header_line(const ExperimentConfig& c) { return "# seed=" + seed_text(c) + "\n"; }

ordered_json seed_json(const ExperimentConfig& c) {
  if (c.seed) return *c.seed;
  return nullptr;
}

// NaN and infinities become JSON null / strings so the output stays valid.
ordered_json number_json(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

// Whitespace-separated copy of a CSV body for gnuplot.
std::string plot_table(const std::string& csv) {
  std::string out;
  out.reserve(csv.size());
  std::istringstream in(csv);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    // The column header becomes a comment.
    if (!line.empty() && line[0] != '#' && !header_seen) {
      header_seen = true;
      line = "# " + line;
    }
    std::replace(line.begin(), line.end(), ',', ' ');
    out += line;
    out += '\n';
  }
  return out;
}

void write_report(const fs::path& dir, const std::string& name, const std::string& csv, const RunOptions& opts) {
  write_text(dir / (name + ".csv"), csv);
  if (opts.plot_tables) write_text(dir / (name + ".dat"), plot_table(csv));
}

fs::path output_dir(const ExperimentConfig& c) {
  fs::path dir(c.output_dir);
  fs::create_directories(dir);
  return dir;
}

Grid2D make_grid(const ExperimentConfig& c) {
  return Grid2D(c.grid.x0, c.grid.y0, c.grid.h, c.grid.nx, c.grid.ny);
}

struct Inputs {
  ExponentCtx ctx;
  Grid2D grid;
  ScalarField boundary;
  std::optional<VectorField> exact_gradient;
  VectorField forcing;
};

Inputs load_inputs(const ExperimentConfig& c) {
  const ExponentCtx ctx(c.p);
  const Grid2D grid = make_grid(c);
  std::optional<ScalarField> boundary;
  std::optional<VectorField> exact;
  const FieldSource& b = c.boundary;
  if (b.kind == "catalogue") {
    CatalogueSpec spec{parse_catalogue_kind(b.name), b.slope, b.offset};
    try {
      CatalogueSolution sol = catalogue(spec, ctx, grid);
      boundary = std::move(sol.u);
      exact = std::move(sol.gradient);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("config field 'boundary.catalogue': ") + e.what());
    }
  } else if (b.kind == "random") {
    const auto seed = effective_seed(b.seed, c, kBoundaryStream, "boundary.random.seed");
    const TrigSeries ts = TrigSeries::random(seed, b.terms, b.max_wave, b.amplitude, b.linear);
    boundary = sample(grid, [&](const Vec2& x) { return ts.value(x); });
    exact = sample(grid, [&](const Vec2& x) { return ts.gradient(x); });
  } else {
    ScalarField f = read_scalar_field(b.path);
    if (!(f.grid() == grid)) throw ConfigError("config field 'boundary.file': grid differs from 'grid'");
    boundary = std::move(f);
  }

  std::optional<VectorField> forcing;
  const ForcingSpec& f = c.forcing;
  if (f.kind == "zero") {
    forcing = VectorField(grid, Vec2{});
  } else if (f.kind == "manufactured") {
    if (!exact) throw ConfigError("config field 'forcing.manufactured': boundary source has no exact gradient");
    const auto seed = effective_seed(f.seed, c, kForcingStream, "forcing.manufactured.seed");
    const TrigSeries psi = TrigSeries::random(seed, f.terms, f.max_wave, f.amplitude);
    forcing = manufactured_forcing(*exact, ctx, psi);
  } else {
    VectorField v = read_vector_field(f.path);
    if (!(v.grid() == grid)) throw ConfigError("config field 'forcing.file': grid differs from 'grid'");
    forcing = std::move(v);
  }
  return {ctx, grid, std::move(*boundary), std::move(exact), std::move(*forcing)};
}

NodeMask make_mask(const ExperimentConfig& c, const Grid2D& grid) {
  if (c.domain_mask.kind == "rectangle") return interior_mask(grid);
  return ball_mask(grid, Ball(c.domain_mask.ball.center, c.domain_mask.ball.radius));
}

SolverOptions solver_options(const ExperimentConfig& c) {
  SolverOptions o;
  o.tol = c.solver_tol;
  o.max_iter = c.solver_max_iter;
  return o;
}

PoissonSolution solve(const ExperimentConfig& c, const Inputs& in) {
  DirichletProblem prob{in.ctx, in.forcing, in.boundary, make_mask(c, in.grid)};
  spdlog::info("solving p-Poisson problem: p={} grid {}x{}", c.p, c.grid.nx, c.grid.ny);
  PoissonSolution sol = solve_p_poisson(prob, solver_options(c));
  spdlog::info("converged in {} iterations, residual {}", sol.record.iterations.size() - 1,
               sol.record.final_residual);
  return sol;
}

ScalarField solution(const ExperimentConfig& c, const Inputs& in) {
  if (!c.solution_file.empty()) {
    ScalarField u = read_scalar_field(c.solution_file);
    if (!(u.grid() == in.grid)) throw ConfigError("config field 'solution': grid differs from 'grid'");
    return u;
  }
  return solve(c, in).u;
}

std::vector<Ball> make_balls(const ExperimentConfig& c, const Grid2D& grid, double factor) {
  std::vector<Ball> balls;
  if (c.balls.kind == "list") {
    if (c.balls.list.empty()) throw ConfigError("config field 'balls': no balls given");
    for (const auto& b : c.balls.list) balls.emplace_back(b.center, b.radius);
  } else {
    const auto seed = effective_seed(c.balls.seed, c, kBallStream, "balls.sampler.seed");
    try {
      balls = sample_balls(seed, c.balls.count, grid, c.balls.r_lo, c.balls.r_hi, factor);
    } catch (const ParameterError& e) {
      throw ConfigError(std::string("config field 'balls.sampler': ") + e.what());
    }
  }
  // Deterministic aggregation key: (center, radius).
  std::stable_sort(balls.begin(), balls.end(), [](const Ball& a, const Ball& b) {
    if (a.center().x != b.center().x) return a.center().x < b.center().x;
    if (a.center().y != b.center().y) return a.center().y < b.center().y;
    return a.radius() < b.radius();
  });
  return balls;
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return format_double(v);
}

std::string params_text(const SmoothnessParams& p) {
  return seminorm_kind_name(p.kind) + " s=" + fmt(p.s) + " rho=" + fmt(p.rho) + " q=" + fmt(p.q) + " w=" + fmt(p.w);
}

}  // namespace

int cmd_solve(const ExperimentConfig& c, const RunOptions&, std::ostream& out) {
  const Inputs in = load_inputs(c);
  const PoissonSolution sol = solve(c, in);
  const fs::path dir = output_dir(c);
  const VectorField g = gradient(sol.u);
  write_field(sol.u, dir / "u", c.seed);
  write_field(g, dir / "grad_u", c.seed);
  write_field(a_field(in.ctx, g), dir / "A_grad", c.seed);
  write_field(v_field(in.ctx, g), dir / "V_grad", c.seed);
  write_text(dir / "convergence.json", convergence_json(sol.record) + "\n");
  out << "solve: " << sol.record.iterations.size() - 1 << " Newton iterations, residual "
      << fmt(sol.record.final_residual) << "\n";
  return kOk;
}

namespace {

struct BallDecay {
  std::optional<DecayProfile> profile;
  std::optional<DecayProfile> v_profile;
  std::optional<BetaFit> fit;
  std::optional<BetaFit> v_fit;
  std::map<double, BallClass> classes;
  std::string failure;
};

VectorField quantity_field(Quantity q, const ExponentCtx& ctx, const VectorField& grad, const VectorField& forcing) {
  switch (q) {
    case Quantity::AGrad:
      return a_field(ctx, grad);
    case Quantity::Grad:
      return grad;
    case Quantity::VGrad:
      return v_field(ctx, grad);
    case Quantity::F:
      return forcing;
  }
  return grad;
}

}  // namespace

int cmd_decay(const ExperimentConfig& c, const RunOptions& opts, std::ostream& out) {
  const Inputs in = load_inputs(c);
  const ScalarField u = solution(c, in);
  const Quantity quantity = parse_quantity(c.decay.quantity);
  const VectorField grad = gradient(u);
  const VectorField field = quantity_field(quantity, in.ctx, grad, in.forcing);
  const VectorField vgrad = v_field(in.ctx, grad);
  const std::vector<Ball> balls = make_balls(c, in.grid, 1.0);
  std::vector<double> eps_sweep{c.decay.epsilon_dg, 1e-1, 1e-2, 1e-3};
  std::sort(eps_sweep.begin(), eps_sweep.end());
  eps_sweep.erase(std::unique(eps_sweep.begin(), eps_sweep.end()), eps_sweep.end());

  std::vector<BallDecay> results(balls.size());
  parallel_for(balls.size(), opts.jobs, [&](std::size_t i) {
    const Ball& b = balls[i];
    BallDecay& r = results[i];
    try {
      r.profile = decay_profile(field, b.center(), b.radius(), c.decay.theta, c.decay.K, c.decay.w, quantity);
      r.fit = fit_beta(*r.profile);
      r.v_profile =
          decay_profile(vgrad, b.center(), b.radius(), c.decay.theta, c.decay.K, c.decay.w, Quantity::VGrad);
      r.v_fit = fit_beta(*r.v_profile);
      for (double eps : eps_sweep) r.classes[eps] = classify_ball(grad, b, in.ctx, eps);
    } catch (const InsufficientResolution& e) {
      r.failure = e.what();
    } catch (const DomainError& e) {
      r.failure = e.what();
    }
  });

  std::string csv = header_line(c) + "center_x,center_y,t0,theta,k,t_k,osc,quantity,w\n";
  std::size_t failed = 0;
  std::vector<double> betas, r2s, v_betas;
  std::map<std::string, int> status_hist;
  for (std::size_t i = 0; i < balls.size(); ++i) {
    const BallDecay& r = results[i];
    if (!r.profile) {
      ++failed;
      spdlog::warn("ball {} skipped: {}", i, r.failure);
      continue;
    }
    const DecayProfile& p = *r.profile;
    for (std::size_t k = 0; k < p.radii.size(); ++k) {
      csv += fmt(p.center.x) + "," + fmt(p.center.y) + "," + fmt(p.t0) + "," + fmt(p.theta) + "," +
             std::to_string(k) + "," + fmt(p.radii[k]) + "," + fmt(p.osc[k]) + "," + quantity_name(p.quantity) +
             "," + fmt(p.w) + "\n";
    }
    ++status_hist[fit_status_name(r.fit->status)];
    if (r.fit->status == FitStatus::Ok) {
      betas.push_back(r.fit->beta);
      r2s.push_back(r.fit->r2);
    }
    if (r.v_fit->status == FitStatus::Ok) v_betas.push_back(r.v_fit->beta);
  }

  const double beta_med = median(betas);
  // Smallest c_beta with osc_k <= c_beta theta^{k beta} osc_0 on every ball.
  double c_beta = std::numeric_limits<double>::quiet_NaN();
  if (std::isfinite(beta_med)) {
    c_beta = 0.0;
    for (const BallDecay& r : results) {
      if (!r.profile || r.fit->status != FitStatus::Ok) continue;
      const DecayProfile& p = *r.profile;
      for (std::size_t k = 0; k < p.radii.size(); ++k) {
        c_beta = std::max(c_beta, p.osc[k] / (p.osc[0] * std::pow(p.radii[k] / p.radii[0], beta_med)));
      }
    }
  }

  ordered_json summary;
  summary["seed"] = seed_json(c);
  summary["quantity"] = c.decay.quantity;
  summary["w"] = number_json(c.decay.w);
  summary["theta"] = c.decay.theta;
  summary["K"] = c.decay.K;
  summary["balls"] = balls.size();
  summary["failed_resolution"] = failed;
  summary["fitted_beta"] = number_json(beta_med);
  ordered_json per_ball = ordered_json::array();
  for (const BallDecay& r : results) per_ball.push_back(r.fit ? number_json(r.fit->beta) : ordered_json(nullptr));
  summary["fitted_beta_per_ball"] = per_ball;
  summary["r2"] = number_json(median(r2s));
  ordered_json fit_hist;
  for (const auto& [k, v] : status_hist) fit_hist[k] = v;
  summary["fit_status_histogram"] = fit_hist;
  summary["all_exact_decay"] = failed < balls.size() && status_hist.size() == 1 && status_hist.count("exact_decay");
  ordered_json class_hist;
  for (double eps : eps_sweep) {
    ordered_json h;
    h["non_degenerate"] = 0;
    h["degenerate"] = 0;
    h["degenerate_zero"] = 0;
    for (const BallDecay& r : results) {
      if (r.profile) h[ball_class_name(r.classes.at(eps))] = h[ball_class_name(r.classes.at(eps))].get<int>() + 1;
    }
    class_hist[fmt(eps)] = h;
  }
  summary["epsilon_dg"] = c.decay.epsilon_dg;
  summary["classification_histogram"] = class_hist;
  summary["calibrated_constants"] = {{"c_beta", number_json(c_beta)}};
  summary["v_grad_beta_median"] = number_json(median(v_betas));
  summary["gamma_note"] =
      "the V-decay exponent gamma is an unknown small number; measured V_grad slopes are reported, not assumed";

  const fs::path dir = output_dir(c);
  write_report(dir, "decay", csv, opts);
  write_text(dir / "decay_summary.json", summary.dump(2) + "\n");
  out << "decay: " << balls.size() - failed << "/" << balls.size() << " balls, median beta " << fmt(beta_med)
      << "\n";
  if (2 * failed > balls.size()) {
    spdlog::error("{} of {} balls failed the resolution guard", failed, balls.size());
    return kResolutionFailure;
  }
  return kOk;
}

int cmd_besov(const ExperimentConfig& c, const RunOptions& opts, std::ostream& out) {
  if (c.smoothness.empty()) throw ConfigError("config field 'smoothness': at least one parameter row is required");
  const Inputs in = load_inputs(c);
  const std::vector<Ball> balls = make_balls(c, in.grid, 1.0);

  std::optional<ScalarField> scalar;
  std::optional<VectorField> vector;
  if (c.besov_field == "F") {
    vector = in.forcing;
  } else {
    const ScalarField u = solution(c, in);
    if (c.besov_field == "u") {
      scalar = u;
    } else {
      const VectorField g = gradient(u);
      vector = quantity_field(parse_quantity(c.besov_field), in.ctx, g, in.forcing);
    }
  }

  std::string csv = header_line(c);
  std::vector<std::size_t> admissible;
  for (std::size_t r = 0; r < c.smoothness.size(); ++r) {
    if (auto v = c.smoothness[r].violation()) {
      csv += "# skipped row " + std::to_string(r) + " (" + params_text(c.smoothness[r]) + "): inadmissible: " + *v +
             "\n";
      spdlog::warn("smoothness row {} skipped: {}", r, *v);
    } else {
      admissible.push_back(r);
    }
  }
  if (admissible.empty()) {
    write_report(output_dir(c), "besov", csv, opts);
    out << "besov: all parameter rows skipped\n";
    return kAllRowsSkipped;
  }

  csv += "kind,center_x,center_y,s,rho,q,w,R,J,value";
  for (int j = 0; j < c.ladder_J; ++j) csv += ",a_" + std::to_string(j);
  csv += "\n";

  std::vector<std::string> lines(balls.size());
  parallel_for(balls.size(), opts.jobs, [&](std::size_t i) {
    const Ball& b = balls[i];
    std::string text;
    try {
      const DyadicLadder ladder(b.radius(), c.ladder_J);
      std::map<double, OscillationTable> tables;
      for (std::size_t r : admissible) {
        const SmoothnessParams& p = c.smoothness[r];
        auto it = tables.find(p.w);
        if (it == tables.end()) {
          it = tables
                   .emplace(p.w, scalar ? oscillation_table(*scalar, b, ladder, p.w)
                                        : oscillation_table(*vector, b, ladder, p.w))
                   .first;
        }
        const SeminormReport rep = seminorm_from_table(it->second, p);
        text += seminorm_kind_name(p.kind) + "," + fmt(b.center().x) + "," + fmt(b.center().y) + "," + fmt(p.s) +
                "," + fmt(p.rho) + "," + fmt(p.q) + "," + fmt(p.w) + "," + fmt(b.radius()) + "," +
                std::to_string(c.ladder_J) + "," + fmt(rep.value);
        for (double a : rep.a) text += "," + fmt(a);
        text += "\n";
      }
    } catch (const InsufficientResolution& e) {
      text = "# skipped ball (" + fmt(b.center().x) + ", " + fmt(b.center().y) + ", " + fmt(b.radius()) +
             "): insufficient_scales: " + e.what() + "\n";
    }
    lines[i] = std::move(text);
  });
  for (const auto& l : lines) csv += l;
  write_report(output_dir(c), "besov", csv, opts);
  out << "besov: " << balls.size() << " balls x " << admissible.size() << " parameter rows\n";
  return kOk;
}

int cmd_transfer(const ExperimentConfig& c, const RunOptions& opts, std::ostream& out) {
  if (c.smoothness.empty()) throw ConfigError("config field 'smoothness': at least one parameter row is required");
  const Inputs in = load_inputs(c);
  const ScalarField u = solution(c, in);
  const VectorField flux = a_field(in.ctx, gradient(u));
  const std::vector<Ball> balls = make_balls(c, in.grid, 2.0);

  std::string csv = header_line(c);
  std::vector<std::size_t> admissible;
  for (std::size_t r = 0; r < c.smoothness.size(); ++r) {
    const SmoothnessParams& p = c.smoothness[r];
    std::optional<std::string> reason;
    if (auto v = p.violation()) {
      reason = "inadmissible: " + *v;
    } else if (!embedding_check(p, in.ctx.p_conj())) {
      reason = "embedding: compact embedding into L^p' fails";
    }
    if (reason) {
      csv += "# skipped row " + std::to_string(r) + " (" + params_text(p) + "): " + *reason + "\n";
      spdlog::warn("transfer row {} skipped: {}", r, *reason);
    } else {
      admissible.push_back(r);
    }
  }
  if (admissible.empty()) {
    write_report(output_dir(c), "transfer", csv, opts);
    out << "transfer: all parameter rows skipped\n";
    return kAllRowsSkipped;
  }
  std::vector<SmoothnessParams> rows;
  for (std::size_t r : admissible) rows.push_back(c.smoothness[r]);

  std::vector<std::vector<TransferRow>> results(balls.size());
  std::vector<std::string> failures(balls.size());
  parallel_for(balls.size(), opts.jobs, [&](std::size_t i) {
    try {
      results[i] = transfer_rows(flux, in.forcing, balls[i], rows, c.ladder_J, in.ctx);
    } catch (const InsufficientResolution& e) {
      failures[i] = e.what();
    } catch (const DomainError& e) {
      failures[i] = e.what();
    }
  });

  csv += "center_x,center_y,R,kind,s,rho,q,w,J,lhs,rhs,ratio\n";
  std::vector<double> max_ratio(rows.size(), 0.0);
  std::size_t failed = 0;
  for (std::size_t i = 0; i < balls.size(); ++i) {
    const Ball& b = balls[i];
    if (!failures[i].empty()) {
      ++failed;
      csv += "# skipped ball (" + fmt(b.center().x) + ", " + fmt(b.center().y) + ", " + fmt(b.radius()) +
             "): " + failures[i] + "\n";
      continue;
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const TransferRow& row = results[i][r];
      const SmoothnessParams& p = row.params;
      const double ratio = row.sides.ratio();
      max_ratio[r] = std::max(max_ratio[r], ratio);
      csv += fmt(b.center().x) + "," + fmt(b.center().y) + "," + fmt(b.radius()) + "," + seminorm_kind_name(p.kind) +
             "," + fmt(p.s) + "," + fmt(p.rho) + "," + fmt(p.q) + "," + fmt(p.w) + "," + std::to_string(c.ladder_J) +
             "," + fmt(row.sides.lhs) + "," + fmt(row.sides.rhs) + "," + fmt(ratio) + "\n";
    }
  }

  ordered_json summary;
  summary["seed"] = seed_json(c);
  summary["p"] = c.p;
  summary["balls"] = balls.size();
  summary["failed_balls"] = failed;
  ordered_json rs = ordered_json::array();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    ordered_json j;
    j["row"] = admissible[r];
    j["kind"] = seminorm_kind_name(rows[r].kind);
    j["s"] = number_json(rows[r].s);
    j["rho"] = number_json(rows[r].rho);
    j["q"] = number_json(rows[r].q);
    j["w"] = number_json(rows[r].w);
    j["max_ratio"] = number_json(max_ratio[r]);
    rs.push_back(j);
  }
  summary["rows"] = rs;
  ordered_json skipped = ordered_json::array();
  for (std::size_t r = 0; r < c.smoothness.size(); ++r) {
    if (std::find(admissible.begin(), admissible.end(), r) == admissible.end()) skipped.push_back(r);
  }
  summary["skipped_rows"] = skipped;

  const fs::path dir = output_dir(c);
  write_report(dir, "transfer", csv, opts);
  write_text(dir / "transfer_summary.json", summary.dump(2) + "\n");
  out << "transfer: " << balls.size() - failed << "/" << balls.size() << " balls, " << rows.size()
      << " parameter rows\n";
  if (2 * failed > balls.size()) return kResolutionFailure;
  return kOk;
}

int cmd_catalogue(const ExperimentConfig& c, const RunOptions&, std::ostream& out) {
  if (c.boundary.kind != "catalogue") {
    throw ConfigError("config field 'boundary': catalogue command needs a catalogue or affine source");
  }
  const Inputs in = load_inputs(c);
  const fs::path dir = output_dir(c);
  write_field(in.boundary, dir / "catalogue", c.seed);
  if (in.exact_gradient) write_field(*in.exact_gradient, dir / "catalogue_grad", c.seed);
  out << "catalogue: wrote " << c.boundary.name << " on " << c.grid.nx << "x" << c.grid.ny << " grid\n";
  return kOk;
}

int run_command(const std::string& command, const std::string& config_path, const RunOptions& opts,
                std::ostream& out, std::ostream& err) {
  try {
    if (command == "selftest") return cmd_selftest(out);
    if (config_path.empty()) throw ConfigError("--config is required for '" + command + "'");
    ExperimentConfig c = load_config(config_path);
    apply_overrides(c, opts);
    if (command == "solve") return cmd_solve(c, opts, out);
    if (command == "decay") return cmd_decay(c, opts, out);
    if (command == "besov") return cmd_besov(c, opts, out);
    if (command == "transfer") return cmd_transfer(c, opts, out);
    if (command == "catalogue") return cmd_catalogue(c, opts, out);
    err << "unknown command '" << command << "'\n";
    return kConfigError;
  } catch (const SolverFailure& e) {
    err << "solver failure: " << e.what() << " (last residual " << fmt(e.last_residual()) << ")\n";
    return kSolverFailure;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ParameterError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const InsufficientResolution& e) {
    err << "resolution error: " << e.what() << "\n";
    return kResolutionFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kSelftestFailure;
  }
}

}  // namespace plab::cli
