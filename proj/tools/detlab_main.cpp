// detlab: deterministic spectral-identity experiments from declarative configs.
//
// Exit codes: 0 all unexcluded residuals within their tolerance tiers,
//             1 a tolerance failed, 2 config/usage validation error.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "detlab/engine.hpp"
#include "detlab/report.hpp"

namespace {

using namespace detlab;

int emit_report(const cli::RunReport& report, const std::string& format,
                const std::string& out_path) {
  const std::string payload =
      (format == "csv") ? cli::to_csv(report) : cli::to_record(report);
  if (out_path.empty()) {
    std::cout << payload;
  } else {
    cli::write_file(out_path, payload);
  }
  return 0;
}

void print_summary(const cli::RunReport& report) {
  std::fprintf(stderr, "%s [%s]: max residual %.3e, excluded %d, %s\n",
               report.experiment.c_str(), report.geometry.c_str(),
               report.summary.max_residual, report.summary.excluded_count,
               report.summary.pass ? "pass" : "FAIL");
  for (const auto& row : report.convergence) {
    if (row.saturated)
      std::fprintf(stderr, "  %-18s residual %.3e (saturated)\n", row.resolution.c_str(),
                   row.residual);
    else if (row.has_order)
      std::fprintf(stderr, "  %-18s residual %.3e order %.2f\n", row.resolution.c_str(),
                   row.residual, row.order);
    else
      std::fprintf(stderr, "  %-18s residual %.3e\n", row.resolution.c_str(), row.residual);
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fredholm-determinant identity experiments on the half-line, disk, and ball"};
  app.require_subcommand(1);

  std::string config_path, out_path, format = "record", in_path;
  int jobs = 1;
  std::uint64_t seed = 0;
  bool seed_set = false;

  CLI::App* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", out_path, "output path (default: stdout)");
  run->add_option("--format", format, "csv | record")
      ->check(CLI::IsMember({"csv", "record"}));
  run->add_option("--jobs", jobs, "parallel workers across spectral points");
  run->add_option("--seed", seed, "override the randomized-trial seed")
      ->each([&](const std::string&) { seed_set = true; });

  CLI::App* conv = app.add_subcommand("convergence", "run a resolution ladder");
  conv->add_option("--config", config_path, "experiment config with a ladder")->required();
  conv->add_option("--out", out_path, "output path (default: stdout)");
  conv->add_option("--format", format, "csv | record")
      ->check(CLI::IsMember({"csv", "record"}));
  conv->add_option("--jobs", jobs, "parallel workers across spectral points");

  CLI::App* emit = app.add_subcommand("emit", "re-emit a structured record");
  emit->add_option("--in", in_path, "structured record produced by run/convergence")
      ->required();
  emit->add_option("--out", out_path, "output path (default: stdout)");
  emit->add_option("--format", format, "csv | record")
      ->check(CLI::IsMember({"csv", "record"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 2 : 0;
  }

  try {
    if (emit->parsed()) {
      const cli::RunReport report = cli::from_record(cli::read_file(in_path));
      return emit_report(report, format, out_path);
    }

    cli::ExperimentConfig cfg = cli::load_config(config_path);
    if (seed_set) cfg.seed = seed;
    const cli::RunReport report =
        run->parsed() ? cli::run_experiment(cfg, jobs) : cli::run_convergence(cfg, jobs);
    emit_report(report, format, out_path);
    print_summary(report);
    return report.summary.pass ? 0 : 1;
  } catch (const cli::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
