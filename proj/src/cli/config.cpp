#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "plab/cli.hpp"

namespace plab::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ConfigError("config field '" + field + "': " + what);
}

const json& require(const json& j, const char* key, const std::string& path) {
  const std::string field = path.empty() ? key : path + "." + key;
  if (!j.is_object() || !j.contains(key)) fail(field, "missing required field");
  return j.at(key);
}

double as_double(const json& v, const std::string& field) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  }
  fail(field, "expected a number");
}

int as_int(const json& v, const std::string& field) {
  if (!v.is_number_integer()) fail(field, "expected an integer");
  return v.get<int>();
}

std::uint64_t as_seed(const json& v, const std::string& field) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    fail(field, "expected a non-negative integer seed");
  }
  return v.get<std::uint64_t>();
}

std::string as_string(const json& v, const std::string& field) {
  if (!v.is_string()) fail(field, "expected a string");
  return v.get<std::string>();
}

Vec2 as_vec2(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 2) fail(field, "expected a [x, y] pair");
  return {as_double(v[0], field), as_double(v[1], field)};
}

template <class T, class Fn>
void optional_field(const json& j, const char* key, const std::string& path, T& out, Fn&& conv) {
  if (j.is_object() && j.contains(key)) out = conv(j.at(key), path.empty() ? key : path + "." + key);
}

ordered_json real_json(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

BallSpec parse_ball(const json& j, const std::string& path) {
  BallSpec b;
  b.center = as_vec2(require(j, "center", path), path + ".center");
  b.radius = as_double(require(j, "radius", path), path + ".radius");
  if (!(b.radius > 0.0)) fail(path + ".radius", "must be positive");
  return b;
}

ordered_json ball_json(const BallSpec& b) {
  ordered_json j;
  j["center"] = {b.center.x, b.center.y};
  j["radius"] = b.radius;
  return j;
}

FieldSource parse_source(const json& j, const std::string& path) {
  FieldSource s;
  if (!j.is_object() || j.size() != 1) fail(path, "expected one of {catalogue, random, file}");
  if (j.contains("catalogue")) {
    s.kind = "catalogue";
    s.name = as_string(j.at("catalogue"), path + ".catalogue");
    try {
      parse_catalogue_kind(s.name);
    } catch (const std::exception& e) {
      fail(path + ".catalogue", e.what());
    }
    return s;
  }
  if (j.contains("affine")) {
    const json& a = j.at("affine");
    s.kind = "catalogue";
    s.name = "affine";
    s.slope = as_vec2(require(a, "slope", path + ".affine"), path + ".affine.slope");
    optional_field(a, "offset", path + ".affine", s.offset, as_double);
    return s;
  }
  if (j.contains("random")) {
    const json& r = j.at("random");
    const std::string rp = path + ".random";
    s.kind = "random";
    if (r.is_object() && r.contains("seed")) s.seed = as_seed(r.at("seed"), rp + ".seed");
    optional_field(r, "terms", rp, s.terms, as_int);
    optional_field(r, "max_wave", rp, s.max_wave, as_double);
    optional_field(r, "amplitude", rp, s.amplitude, as_double);
    optional_field(r, "linear", rp, s.linear, as_double);
    if (s.terms < 0) fail(rp + ".terms", "must be non-negative");
    return s;
  }
  if (j.contains("file")) {
    s.kind = "file";
    s.path = as_string(j.at("file"), path + ".file");
    return s;
  }
  fail(path, "expected one of {catalogue, affine, random, file}");
}

ordered_json source_json(const FieldSource& s) {
  ordered_json j;
  if (s.kind == "catalogue") {
    if (s.name == "affine") {
      j["affine"] = {{"slope", {s.slope.x, s.slope.y}}, {"offset", s.offset}};
    } else {
      j["catalogue"] = s.name;
    }
  } else if (s.kind == "random") {
    ordered_json r;
    if (s.seed) r["seed"] = *s.seed;
    r["terms"] = s.terms;
    r["max_wave"] = s.max_wave;
    r["amplitude"] = s.amplitude;
    r["linear"] = s.linear;
    j["random"] = r;
  } else {
    j["file"] = s.path;
  }
  return j;
}

ForcingSpec parse_forcing(const json& j, const std::string& path) {
  ForcingSpec f;
  if (j.is_string()) {
    if (j.get<std::string>() != "zero") fail(path, "expected \"zero\" or an object");
    return f;
  }
  if (!j.is_object() || j.size() != 1) fail(path, "expected \"zero\", {manufactured} or {file}");
  if (j.contains("manufactured")) {
    const json& m = j.at("manufactured");
    const std::string mp = path + ".manufactured";
    f.kind = "manufactured";
    if (m.is_object() && m.contains("seed")) f.seed = as_seed(m.at("seed"), mp + ".seed");
    optional_field(m, "terms", mp, f.terms, as_int);
    optional_field(m, "max_wave", mp, f.max_wave, as_double);
    optional_field(m, "amplitude", mp, f.amplitude, as_double);
    return f;
  }
  if (j.contains("file")) {
    f.kind = "file";
    f.path = as_string(j.at("file"), path + ".file");
    return f;
  }
  fail(path, "expected \"zero\", {manufactured} or {file}");
}

ordered_json forcing_json(const ForcingSpec& f) {
  if (f.kind == "zero") return "zero";
  ordered_json j;
  if (f.kind == "manufactured") {
    ordered_json m;
    if (f.seed) m["seed"] = *f.seed;
    m["terms"] = f.terms;
    m["max_wave"] = f.max_wave;
    m["amplitude"] = f.amplitude;
    j["manufactured"] = m;
  } else {
    j["file"] = f.path;
  }
  return j;
}

BallsSpec parse_balls(const json& j, const std::string& path) {
  BallsSpec b;
  if (!j.is_object() || j.size() != 1) fail(path, "expected {list} or {sampler}");
  if (j.contains("list")) {
    const json& l = j.at("list");
    if (!l.is_array()) fail(path + ".list", "expected an array");
    b.kind = "list";
    for (std::size_t k = 0; k < l.size(); ++k) b.list.push_back(parse_ball(l[k], path + ".list[" + std::to_string(k) + "]"));
    return b;
  }
  if (j.contains("sampler")) {
    const json& s = j.at("sampler");
    const std::string sp = path + ".sampler";
    b.kind = "sampler";
    const int count = as_int(require(s, "count", sp), sp + ".count");
    if (count < 1) fail(sp + ".count", "must be at least 1");
    b.count = std::size_t(count);
    if (s.contains("seed")) b.seed = as_seed(s.at("seed"), sp + ".seed");
    const Vec2 range = as_vec2(require(s, "radius_range", sp), sp + ".radius_range");
    b.r_lo = range.x;
    b.r_hi = range.y;
    if (!(b.r_lo > 0.0 && b.r_hi >= b.r_lo)) fail(sp + ".radius_range", "needs 0 < lo <= hi");
    return b;
  }
  fail(path, "expected {list} or {sampler}");
}

ordered_json balls_json(const BallsSpec& b) {
  ordered_json j;
  if (b.kind == "list") {
    ordered_json l = ordered_json::array();
    for (const auto& ball : b.list) l.push_back(ball_json(ball));
    j["list"] = l;
  } else {
    ordered_json s;
    s["count"] = b.count;
    if (b.seed) s["seed"] = *b.seed;
    s["radius_range"] = {b.r_lo, b.r_hi};
    j["sampler"] = s;
  }
  return j;
}

SmoothnessParams parse_params(const json& j, const std::string& path) {
  SmoothnessParams p;
  p.s = as_double(require(j, "s", path), path + ".s");
  p.rho = as_double(require(j, "rho", path), path + ".rho");
  p.q = as_double(require(j, "q", path), path + ".q");
  optional_field(j, "w", path, p.w, as_double);
  if (j.contains("kind")) {
    try {
      p.kind = parse_seminorm_kind(as_string(j.at("kind"), path + ".kind"));
    } catch (const ParameterError& e) {
      fail(path + ".kind", e.what());
    }
  }
  return p;
}

ordered_json params_json(const SmoothnessParams& p) {
  ordered_json j;
  j["s"] = real_json(p.s);
  j["rho"] = real_json(p.rho);
  j["q"] = real_json(p.q);
  j["w"] = real_json(p.w);
  j["kind"] = seminorm_kind_name(p.kind);
  return j;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  c.p = as_double(require(j, "p", ""), "p");
  if (!(c.p > 1.0) || !std::isfinite(c.p)) fail("p", "must satisfy 1 < p < inf");

  const json& g = require(j, "grid", "");
  c.grid.nx = as_int(require(g, "nx", "grid"), "grid.nx");
  c.grid.ny = as_int(require(g, "ny", "grid"), "grid.ny");
  c.grid.h = as_double(require(g, "h", "grid"), "grid.h");
  optional_field(g, "x0", "grid", c.grid.x0, as_double);
  optional_field(g, "y0", "grid", c.grid.y0, as_double);
  if (c.grid.nx < 3) fail("grid.nx", "needs at least 3 nodes");
  if (c.grid.ny < 3) fail("grid.ny", "needs at least 3 nodes");
  if (!(c.grid.h > 0.0) || !std::isfinite(c.grid.h)) fail("grid.h", "must be positive");

  if (j.contains("domain_mask")) {
    const json& m = j.at("domain_mask");
    if (m.is_string() && m.get<std::string>() == "rectangle") {
      c.domain_mask.kind = "rectangle";
    } else if (m.is_object() && m.contains("ball")) {
      c.domain_mask.kind = "ball";
      c.domain_mask.ball = parse_ball(m.at("ball"), "domain_mask.ball");
    } else {
      fail("domain_mask", "expected \"rectangle\" or {ball}");
    }
  }
  if (j.contains("boundary")) c.boundary = parse_source(j.at("boundary"), "boundary");
  if (j.contains("forcing")) c.forcing = parse_forcing(j.at("forcing"), "forcing");
  optional_field(j, "solution", "", c.solution_file, as_string);
  if (j.contains("balls")) c.balls = parse_balls(j.at("balls"), "balls");
  if (j.contains("smoothness")) {
    const json& s = j.at("smoothness");
    if (!s.is_array()) fail("smoothness", "expected an array");
    for (std::size_t k = 0; k < s.size(); ++k) {
      c.smoothness.push_back(parse_params(s[k], "smoothness[" + std::to_string(k) + "]"));
    }
  }
  if (j.contains("besov")) optional_field(j.at("besov"), "field", "besov", c.besov_field, as_string);
  if (j.contains("decay")) {
    const json& d = j.at("decay");
    optional_field(d, "theta", "decay", c.decay.theta, as_double);
    optional_field(d, "K", "decay", c.decay.K, as_int);
    optional_field(d, "epsilon_dg", "decay", c.decay.epsilon_dg, as_double);
    optional_field(d, "quantity", "decay", c.decay.quantity, as_string);
    optional_field(d, "w", "decay", c.decay.w, as_double);
    if (!(c.decay.theta > 0.0 && c.decay.theta < 1.0)) fail("decay.theta", "must lie in (0,1)");
    if (c.decay.K < 4) fail("decay.K", "must be at least 4");
    if (!(c.decay.epsilon_dg > 0.0)) fail("decay.epsilon_dg", "must be positive");
    if (!(c.decay.w >= 1.0)) fail("decay.w", "must lie in [1,inf]");
    try {
      parse_quantity(c.decay.quantity);
    } catch (const ParameterError& e) {
      fail("decay.quantity", e.what());
    }
  }
  {
    const std::string f = c.besov_field;
    if (f != "u" && f != "grad" && f != "A_grad" && f != "V_grad" && f != "F") {
      fail("besov.field", "expected one of u, grad, A_grad, V_grad, F");
    }
  }
  if (j.contains("ladder")) optional_field(j.at("ladder"), "J", "ladder", c.ladder_J, as_int);
  if (c.ladder_J < 4) fail("ladder.J", "must be at least 4");
  if (j.contains("solver")) {
    optional_field(j.at("solver"), "tol", "solver", c.solver_tol, as_double);
    optional_field(j.at("solver"), "max_iter", "solver", c.solver_max_iter, as_int);
    if (!(c.solver_tol > 0.0)) fail("solver.tol", "must be positive");
    if (c.solver_max_iter < 1) fail("solver.max_iter", "must be at least 1");
  }
  optional_field(j, "output_dir", "", c.output_dir, as_string);
  if (j.contains("seed")) c.seed = as_seed(j.at("seed"), "seed");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  ordered_json j;
  j["p"] = c.p;
  j["grid"] = {{"nx", c.grid.nx}, {"ny", c.grid.ny}, {"x0", c.grid.x0}, {"y0", c.grid.y0}, {"h", c.grid.h}};
  if (c.domain_mask.kind == "rectangle") {
    j["domain_mask"] = "rectangle";
  } else {
    j["domain_mask"] = {{"ball", ball_json(c.domain_mask.ball)}};
  }
  j["boundary"] = source_json(c.boundary);
  j["forcing"] = forcing_json(c.forcing);
  if (!c.solution_file.empty()) j["solution"] = c.solution_file;
  j["balls"] = balls_json(c.balls);
  ordered_json s = ordered_json::array();
  for (const auto& p : c.smoothness) s.push_back(params_json(p));
  j["smoothness"] = s;
  j["besov"] = {{"field", c.besov_field}};
  j["decay"] = {{"theta", c.decay.theta},
                {"K", c.decay.K},
                {"epsilon_dg", c.decay.epsilon_dg},
                {"quantity", c.decay.quantity},
                {"w", real_json(c.decay.w)}};
  j["ladder"] = {{"J", c.ladder_J}};
  j["solver"] = {{"tol", c.solver_tol}, {"max_iter", c.solver_max_iter}};
  j["output_dir"] = c.output_dir;
  if (c.seed) j["seed"] = *c.seed;
  return j.dump(2) + "\n";
}

std::uint64_t effective_seed(const std::optional<std::uint64_t>& own, const ExperimentConfig& config,
                             std::uint64_t stream, const std::string& field) {
  if (own) return *own;
  if (!config.seed) throw ConfigError("config field '" + field + "': a seed is required for sampling");
  // splitmix64 finalizer keeps derived streams decorrelated.
  std::uint64_t z = *config.seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void apply_overrides(ExperimentConfig& config, const RunOptions& opts) {
  if (opts.out_dir) config.output_dir = *opts.out_dir;
  if (opts.seed) {
    config.seed = opts.seed;
    config.boundary.seed.reset();
    config.forcing.seed.reset();
    config.balls.seed.reset();
  }
}

}  // namespace plab::cli
