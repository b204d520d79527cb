// plab: command-line driver for p-Poisson experiments.
//
//   plab <solve|decay|besov|transfer|catalogue|selftest> [--config PATH]
//        [--out DIR] [--jobs N] [--seed S] [--plot-tables]
//
// PLAB_LOG selects the log level (error, warn, info, debug).

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "plab/cli.hpp"

namespace {

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("plab");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("PLAB_LOG")) {
    const std::string level(env);
    if (level == "error" || level == "warn" || level == "info" || level == "debug") {
      spdlog::set_level(spdlog::level::from_str(level));
    } else {
      spdlog::warn("ignoring PLAB_LOG='{}' (expected error, warn, info or debug)", level);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"p-Poisson numerical laboratory"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  int jobs = 1;
  std::uint64_t seed = 0;
  bool plot_tables = false;

  const char* names[] = {"solve", "decay", "besov", "transfer", "catalogue", "selftest"};
  const char* help[] = {"solve the configured p-Poisson problem and dump u, grad u, A(grad u), V(grad u)",
                        "measure oscillation decay profiles over balls",
                        "estimate Besov / Triebel-Lizorkin seminorms",
                        "measure the regularity transfer ratio",
                        "sample an exact solution from the catalogue",
                        "run the built-in invariant suite"};
  std::vector<CLI::App*> subs;
  for (int k = 0; k < 6; ++k) {
    CLI::App* sub = app.add_subcommand(names[k], help[k]);
    if (k != 5) {
      sub->add_option("--config", config, "experiment config (JSON)")->required();
      sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
      sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
      sub->add_option("--seed", seed, "seed override for every sampling step");
      sub->add_flag("--plot-tables", plot_tables, "also write whitespace tables for gnuplot");
    }
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : plab::cli::kConfigError;
  }

  CLI::App* chosen = app.get_subcommands().front();
  plab::cli::RunOptions opts;
  opts.jobs = jobs;
  opts.plot_tables = plot_tables;
  if (chosen->get_name() != "selftest") {
    if (chosen->get_option("--out")->count() > 0) opts.out_dir = out_dir;
    if (chosen->get_option("--seed")->count() > 0) opts.seed = seed;
  }
  const std::string command = chosen->get_name();
  return plab::cli::run_command(command, config, opts, std::cout, std::cerr);
}
