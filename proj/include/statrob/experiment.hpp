#ifndef STATROB_EXPERIMENT_HPP
#define STATROB_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "statrob/approx_hw.hpp"
#include "statrob/image_io.hpp"
#include "statrob/metrics.hpp"
#include "statrob/mrf.hpp"

namespace statrob {

enum class Arm : std::uint8_t { Software = 0, Noise = 1, Hardware = 2 };

const char* arm_name(Arm arm);

struct SyntheticInput {
  StereogramSpec spec;  // disparity_levels is taken from the model
};

struct FileInput {
  std::string left;
  std::string right;
  std::string ground_truth;  // empty = no ground truth
  int ground_truth_scale = 1;
};

struct InputConfig {
  bool synthetic = true;
  SyntheticInput synth;
  FileInput files;
};

struct ModelParams {
  int disparity_levels = 16;
  double data_truncation = 20.0;
  double smoothness_weight = 2.0;
  double smoothness_truncation = 2.0;
};

struct DivergenceSweep {
  int points = 2000;  // 0 disables the sweep
  int support = 0;    // 0 = model disparity_levels
  double energy_min = 0.0;
  double energy_max = 8.0;
  double temperature = 1.0;
  std::uint64_t seed = 17;
  int histogram_bins = 20;
};

struct MetricsOptions {
  double bp_threshold = 1.0;
  int ks_permutations = 500;
  double noise_sigma = 1.0;
  // Budget fractions at which convergence is re-evaluated over the trailing
  // half of the truncated run. May be empty.
  std::vector<double> checkpoints = {0.25, 0.5, 1.0, 2.0};
  DivergenceSweep divergence;
};

struct ExperimentConfig {
  InputConfig input;
  ModelParams model;
  ChainConfig chain;  // chain.seed is the experiment base seed
  int runs = 20;
  ApproxConfig approx;
  MetricsOptions metrics;
  std::string output_dir = "out";

  void validate() const;
  nlohmann::ordered_json to_json() const;  // canonical resolved form
  std::uint64_t hash() const;  // FNV-1a over the canonical form, output_dir excluded

  static ExperimentConfig from_json(const nlohmann::ordered_json& j);
  static ExperimentConfig load(const std::string& path);
};

// Budget fractions resolved against chain.iterations: a checkpoint rerun
// covers `iterations` sweeps and records the trailing half.
struct CheckpointPlan {
  double fraction = 0.0;
  std::uint32_t milli = 0;  // fraction * 1000, the trace file tag
  int iterations = 0;
  int window = 0;
};
std::vector<CheckpointPlan> checkpoint_plans(const ExperimentConfig& config);

struct Aggregate {
  std::vector<double> per_run;
  std::optional<double> mean;
  std::optional<double> stddev;  // sample standard deviation
};

struct OptAggregate {
  std::vector<std::optional<double>> per_run;
  std::optional<double> mean;  // over the defined entries
  std::optional<double> stddev;
  std::optional<double> median;
};

struct ArmReport {
  Aggregate bad_pixel_pct;  // empty without ground truth
  OptAggregate r_squared;   // against the software reference mode
  OptAggregate ess_active;
  OptAggregate ess_overall;
  std::vector<std::optional<double>> per_rv_ess;  // mean across runs
  std::vector<RhatRecord> per_rv_rhat;            // across runs, main window
  double converged_pct = 0.0;
  std::uint64_t degenerate_fallbacks = 0;  // summed over main runs
};

struct CheckpointReport {
  double fraction = 0.0;
  int iterations = 0;
  int window = 0;
  double software_pct = 0.0;
  double hardware_pct = 0.0;
};

struct KsReport {
  bool computed = false;
  double statistic = 0.0;
  double p_value = 1.0;
  int permutations = 0;
};

struct DivergenceReport {
  int points = 0;
  int degenerate = 0;
  std::vector<std::optional<double>> jsd;  // per point, empty when degenerate
  double max_jsd = 0.0;
  double mean_jsd = 0.0;
  std::vector<double> argmax_energies;
  double histogram_bin_width = 0.0;  // bins cover [0, ln 2]
  std::vector<std::uint64_t> histogram;
};

struct RobustnessReport {
  std::uint64_t config_hash = 0;
  int input_width = 0;
  int input_height = 0;
  bool has_ground_truth = false;
  int clamped_disparities = 0;
  int active_pixels = 0;
  int total_pixels = 0;
  LabelMap reference;  // per-pixel mode of software end points
  ArmReport software, noise, hardware;
  std::vector<CheckpointReport> checkpoints;
  KsReport ks_software_hardware;
  KsReport ks_software_noise;
  std::optional<DivergenceReport> divergence;

  const ArmReport& arm(Arm a) const;
};

// Synthesizes or loads the stereo pair (and ground truth when available).
struct PreparedInput {
  GrayImage left;
  GrayImage right;
  GroundTruth truth;
  bool has_truth = false;
};
PreparedInput prepare_input(const ExperimentConfig& config);

// Runs every chain (three arms times `runs`, plus checkpointed software and
// hardware runs), writes the traces under <output_dir>/traces, then computes
// and writes the report. Trace content is independent of the worker count.
void run_experiment(const ExperimentConfig& config, int workers);

// Recomputes the full report from traces already on disk.
RobustnessReport compute_report(const ExperimentConfig& config);

// report.json, per_rv_metrics.csv, r2_values.csv, divergence.csv.
void write_report_files(const ExperimentConfig& config,
                        const RobustnessReport& report);

// The quantization-error sweep alone: seeded random energy vectors, ideal
// Boltzmann distribution vs the exact effective hardware distribution.
DivergenceReport run_divergence_sweep(const ApproxConfig& approx,
                                      const DivergenceSweep& sweep,
                                      int default_support);
void write_divergence_files(const ApproxConfig& approx,
                            const DivergenceSweep& sweep,
                            const DivergenceReport& report,
                            const std::string& out_dir);

}  // namespace statrob

#endif
