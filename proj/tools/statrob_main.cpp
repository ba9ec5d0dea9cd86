// Command-line front end: run a full robustness experiment, recompute the
// report from existing traces, or sweep the hardware quantization error.
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "statrob/errors.hpp"
#include "statrob/experiment.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_override;
  std::uint64_t seed_offset = 0;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--config", args.config_path, "experiment config JSON")
      ->required();
  sub->add_option("--out", args.out_override,
                  "output directory (overrides config output_dir)");
  sub->add_option("--seed-offset", args.seed_offset,
                  "offset added to the base seed");
}

statrob::ExperimentConfig load_config(const CommonArgs& args) {
  statrob::ExperimentConfig cfg = statrob::ExperimentConfig::load(args.config_path);
  if (!args.out_override.empty()) cfg.output_dir = args.out_override;
  cfg.chain.seed += args.seed_offset;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robustness metrics for approximate Gibbs samplers"};
  app.require_subcommand(1);

  CommonArgs args;
  int workers = 1;

  CLI::App* run = app.add_subcommand(
      "run", "run all chains, write traces and the full report");
  add_common(run, args);
  run->add_option("--workers", workers, "worker threads for the chain runs")
      ->check(CLI::PositiveNumber);

  CLI::App* report = app.add_subcommand(
      "report", "recompute the report from traces already on disk");
  add_common(report, args);

  CLI::App* divergence = app.add_subcommand(
      "divergence", "sweep ideal-vs-hardware sampling divergence only");
  add_common(divergence, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const statrob::ExperimentConfig cfg = load_config(args);
    if (run->parsed()) {
      statrob::run_experiment(cfg, workers);
    } else if (report->parsed()) {
      const statrob::RobustnessReport rep = statrob::compute_report(cfg);
      statrob::write_report_files(cfg, rep);
    } else if (divergence->parsed()) {
      const statrob::DivergenceReport rep = statrob::run_divergence_sweep(
          cfg.approx, cfg.metrics.divergence, cfg.model.disparity_levels);
      statrob::write_divergence_files(cfg.approx, cfg.metrics.divergence, rep,
                                      cfg.output_dir);
    }
    return 0;
  } catch (const statrob::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
