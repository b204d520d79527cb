#pragma once

// Configuration-driven experiment front end. Every command reads one JSON
// ExperimentConfig and writes CSV/JSON artifacts into the output directory.

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "plab/besov.hpp"
#include "plab/decay.hpp"
#include "plab/solver.hpp"

namespace plab::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kOk = 0,
  kSelftestFailure = 1,
  kSolverFailure = 2,
  kConfigError = 3,
  kResolutionFailure = 4,
  kAllRowsSkipped = 5,
};

/// Malformed or incomplete configuration; the message names the field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridSpec {
  int nx = 0, ny = 0;
  double x0 = 0.0, y0 = 0.0, h = 0.0;
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Scalar field source: "catalogue" (name, slope, offset), "random"
/// (seeded trigonometric series) or "file" (field dump stem).
struct FieldSource {
  std::string kind = "catalogue";
  std::string name = "affine";
  Vec2 slope{};
  double offset = 0.0;
  std::optional<std::uint64_t> seed;
  int terms = 5;
  double max_wave = 3.0;
  double amplitude = 0.5;
  double linear = 1.0;
  std::string path;
  friend bool operator==(const FieldSource&, const FieldSource&) = default;
};

/// Forcing: "zero", "manufactured" (F = A(grad u*) + rot90(grad psi) with
/// u* the boundary source and psi a seeded series) or "file".
struct ForcingSpec {
  std::string kind = "zero";
  std::optional<std::uint64_t> seed;
  int terms = 3;
  double max_wave = 6.0;
  double amplitude = 0.2;
  std::string path;
  friend bool operator==(const ForcingSpec&, const ForcingSpec&) = default;
};

struct BallSpec {
  Vec2 center{};
  double radius = 0.0;
  friend bool operator==(const BallSpec&, const BallSpec&) = default;
};

/// Explicit list, or a seeded sampler {count, seed, radius_range}.
struct BallsSpec {
  std::string kind = "list";
  std::vector<BallSpec> list;
  std::size_t count = 0;
  std::optional<std::uint64_t> seed;
  double r_lo = 0.0, r_hi = 0.0;
  friend bool operator==(const BallsSpec&, const BallsSpec&) = default;
};

struct DecaySpec {
  double theta = 0.5;
  int K = 6;
  double epsilon_dg = 1e-2;
  std::string quantity = "A_grad";
  double w = 1.0;
  friend bool operator==(const DecaySpec&, const DecaySpec&) = default;
};

/// "rectangle" or a disk given by `ball`.
struct MaskSpec {
  std::string kind = "rectangle";
  BallSpec ball;
  friend bool operator==(const MaskSpec&, const MaskSpec&) = default;
};

struct ExperimentConfig {
  double p = 2.0;
  GridSpec grid;
  MaskSpec domain_mask;
  FieldSource boundary;
  ForcingSpec forcing;
  /// Precomputed solution dump used instead of an inline solve.
  std::string solution_file;
  BallsSpec balls;
  std::vector<SmoothnessParams> smoothness;
  /// Field evaluated by `besov`: "u", "grad", "A_grad", "V_grad" or "F".
  std::string besov_field = "A_grad";
  DecaySpec decay;
  int ladder_J = 4;
  double solver_tol = 1e-10;
  int solver_max_iter = 200;
  std::string output_dir = "out";
  std::optional<std::uint64_t> seed;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses and validates; throws ConfigError naming the offending field.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
/// Canonical JSON; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

/// Seed used by a sampling step: the step's own seed, else the top-level
/// seed mixed with `stream`. Throws ConfigError naming `field` when
/// neither is set.
std::uint64_t effective_seed(const std::optional<std::uint64_t>& own, const ExperimentConfig& config,
                             std::uint64_t stream, const std::string& field);

struct RunOptions {
  std::optional<std::string> out_dir;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  bool plot_tables = false;
};

/// Applies --seed (replacing every per-step seed) and --out.
void apply_overrides(ExperimentConfig& config, const RunOptions& opts);

int cmd_solve(const ExperimentConfig& config, const RunOptions& opts, std::ostream& out);
int cmd_decay(const ExperimentConfig& config, const RunOptions& opts, std::ostream& out);
int cmd_besov(const ExperimentConfig& config, const RunOptions& opts, std::ostream& out);
int cmd_transfer(const ExperimentConfig& config, const RunOptions& opts, std::ostream& out);
int cmd_catalogue(const ExperimentConfig& config, const RunOptions& opts, std::ostream& out);

struct SelftestReport {
  std::vector<std::string> passed;
  std::vector<std::string> failed;
  bool ok() const { return failed.empty(); }
};

/// Invariant suite (orlicz identities, iterative lemma grid, field
/// symmetry checks); each check has a stable name.
SelftestReport run_selftest();
int cmd_selftest(std::ostream& out);

/// Parses config and dispatches; maps exceptions to exit codes.
int run_command(const std::string& command, const std::string& config_path, const RunOptions& opts,
                std::ostream& out, std::ostream& err);

}  // namespace plab::cli
