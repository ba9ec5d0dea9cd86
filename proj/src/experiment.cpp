#include "statrob/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <thread>

#include "statrob/errors.hpp"
#include "statrob/rng.hpp"
#include "statrob/trace_io.hpp"

namespace statrob {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kNoiseLeftTag = 0x100;  // image-noise seed spaces
constexpr std::uint64_t kNoiseRightTag = 0x101;
constexpr std::uint64_t kKsHardwareStream = 0x6b735f6877;  // "ks_hw"
constexpr std::uint64_t kKsNoiseStream = 0x6b735f6e7a;     // "ks_nz"
constexpr std::uint64_t kDivergenceStream = 0x64697667;    // "divg"

constexpr Arm kArms[] = {Arm::Software, Arm::Noise, Arm::Hardware};

std::uint64_t run_seed(const ExperimentConfig& cfg, Arm arm, int run) {
  return derive_seed(cfg.chain.seed, (static_cast<std::uint64_t>(arm) << 32) |
                                         static_cast<std::uint32_t>(run));
}

std::string trace_filename(Arm arm, std::uint32_t milli, int run) {
  char buf[64];
  if (milli == 0)
    std::snprintf(buf, sizeof buf, "%s_run%03d.trace", arm_name(arm), run);
  else
    std::snprintf(buf, sizeof buf, "%s_cp%04u_run%03d.trace", arm_name(arm),
                  milli, run);
  return buf;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hash_hex(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Aggregate make_aggregate(std::vector<double> per_run) {
  Aggregate a;
  a.per_run = std::move(per_run);
  const std::size_t n = a.per_run.size();
  if (n == 0) return a;
  double mean = 0.0;
  for (double v : a.per_run) mean += v;
  mean /= static_cast<double>(n);
  a.mean = mean;
  if (n >= 2) {
    double ss = 0.0;
    for (double v : a.per_run) ss += (v - mean) * (v - mean);
    a.stddev = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return a;
}

OptAggregate make_opt_aggregate(std::vector<std::optional<double>> per_run) {
  OptAggregate a;
  a.per_run = std::move(per_run);
  std::vector<double> defined;
  for (const auto& v : a.per_run)
    if (v) defined.push_back(*v);
  if (defined.empty()) return a;
  const Aggregate base = make_aggregate(defined);
  a.mean = base.mean;
  a.stddev = base.stddev;
  std::sort(defined.begin(), defined.end());
  const std::size_t n = defined.size();
  a.median = (n % 2 == 1) ? defined[n / 2]
                          : 0.5 * (defined[n / 2 - 1] + defined[n / 2]);
  return a;
}

struct ChainJob {
  Arm arm = Arm::Software;
  int run = 0;
  ChainConfig chain;
  std::vector<ChainSnapshotSpec> snapshots;
  GrayImage left;
  GrayImage right;
};

void execute_job(const ExperimentConfig& cfg, const ChainJob& job,
                 std::uint64_t config_hash, const fs::path& traces_dir) {
  try {
    StereoMrf model;
    model.left = job.left;
    model.right = job.right;
    model.disparity_levels = cfg.model.disparity_levels;
    model.data_truncation = cfg.model.data_truncation;
    model.smoothness_weight = cfg.model.smoothness_weight;
    model.smoothness_truncation = cfg.model.smoothness_truncation;
    const SamplerSpec sampler = job.arm == Arm::Hardware
                                    ? SamplerSpec(cfg.approx)
                                    : SamplerSpec(ExactSamplerSpec{});
    auto traces = run_chain_snapshots(model, job.chain, sampler, job.snapshots);
    for (ChainTrace& trace : traces) {
      trace.meta.arm = static_cast<std::uint8_t>(job.arm);
      trace.meta.config_hash = config_hash;
      save_trace(trace, (traces_dir / trace_filename(
                                          job.arm, trace.meta.checkpoint_milli,
                                          job.run))
                            .string());
    }
  } catch (const std::exception& e) {
    throw Error(std::string("chain failed (arm=") + arm_name(job.arm) +
                ", run=" + std::to_string(job.run) +
                ", seed=" + std::to_string(job.chain.seed) + "): " + e.what());
  }
}

void execute_jobs(const ExperimentConfig& cfg, const std::vector<ChainJob>& jobs,
                  std::uint64_t config_hash, const fs::path& traces_dir,
                  int workers) {
  if (workers <= 1) {
    for (const ChainJob& job : jobs)
      execute_job(cfg, job, config_hash, traces_dir);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex mu;
  std::exception_ptr first_error;
  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) break;
      try {
        execute_job(cfg, jobs[i], config_hash, traces_dir);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        break;
      }
    }
  };
  const std::size_t pool_size =
      std::min<std::size_t>(static_cast<std::size_t>(workers), jobs.size());
  std::vector<std::thread> pool;
  pool.reserve(pool_size);
  for (std::size_t i = 0; i < pool_size; ++i) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// Loads one expected trace and cross-checks it against the configuration so
// stale or foreign outputs fail loudly instead of skewing the report.
ChainTrace load_checked_trace(const fs::path& traces_dir, Arm arm,
                              std::uint32_t milli, int run,
                              const ExperimentConfig& cfg,
                              std::uint64_t config_hash, int iterations,
                              int window, int height, int width) {
  const fs::path path = traces_dir / trace_filename(arm, milli, run);
  ChainTrace trace = load_trace(path.string());
  const std::string name = path.string();
  if (trace.meta.config_hash != config_hash)
    throw InvalidState(name + ": trace was produced by a different configuration");
  if (trace.meta.arm != static_cast<std::uint8_t>(arm) ||
      trace.meta.checkpoint_milli != milli)
    throw InvalidState(name + ": trace tags do not match its filename");
  const SamplerKind expected_kind =
      arm == Arm::Hardware ? SamplerKind::Approx : SamplerKind::Exact;
  if (trace.meta.sampler != expected_kind)
    throw InvalidState(name + ": unexpected sampler kind");
  if (trace.height != height || trace.width != width ||
      trace.labels != cfg.model.disparity_levels)
    throw InvalidState(name + ": trace shape does not match the configuration");
  if (trace.window != window ||
      trace.meta.iterations != static_cast<std::uint32_t>(iterations))
    throw InvalidState(name + ": trace budget does not match the configuration");
  if (trace.meta.seed != run_seed(cfg, arm, run))
    throw InvalidState(name + ": trace seed does not match the configuration");
  return trace;
}

std::vector<double> defined_values(const OptAggregate& agg) {
  std::vector<double> out;
  for (const auto& v : agg.per_run)
    if (v) out.push_back(*v);
  return out;
}

ordered_json opt_json(const std::optional<double>& v) {
  if (v) return *v;
  return nullptr;
}

ordered_json opt_vector_json(const std::vector<std::optional<double>>& v) {
  ordered_json arr = ordered_json::array();
  for (const auto& x : v) arr.push_back(opt_json(x));
  return arr;
}

ordered_json aggregate_json(const Aggregate& a) {
  return ordered_json{{"per_run", a.per_run},
                      {"mean", opt_json(a.mean)},
                      {"stddev", opt_json(a.stddev)}};
}

ordered_json opt_aggregate_json(const OptAggregate& a) {
  return ordered_json{{"per_run", opt_vector_json(a.per_run)},
                      {"mean", opt_json(a.mean)},
                      {"stddev", opt_json(a.stddev)},
                      {"median", opt_json(a.median)}};
}

ordered_json arm_json(const ArmReport& arm, bool has_truth) {
  ordered_json j;
  j["bad_pixel_pct"] =
      has_truth ? aggregate_json(arm.bad_pixel_pct) : ordered_json(nullptr);
  j["r_squared"] = opt_aggregate_json(arm.r_squared);
  j["ess_active"] = opt_aggregate_json(arm.ess_active);
  j["ess_overall"] = opt_aggregate_json(arm.ess_overall);
  j["converged_pct"] = arm.converged_pct;
  j["degenerate_fallbacks"] = arm.degenerate_fallbacks;
  return j;
}

ordered_json ks_json(const KsReport& ks) {
  if (!ks.computed) return nullptr;
  return ordered_json{{"statistic", ks.statistic},
                      {"p_value", ks.p_value},
                      {"permutations", ks.permutations}};
}

ordered_json divergence_json(const DivergenceReport& d) {
  return ordered_json{{"points", d.points},
                      {"degenerate", d.degenerate},
                      {"max_jsd", d.max_jsd},
                      {"mean_jsd", d.mean_jsd},
                      {"argmax_energies", d.argmax_energies},
                      {"histogram_bin_width", d.histogram_bin_width},
                      {"histogram", d.histogram}};
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

void write_divergence_csv(const fs::path& path,
                          const DivergenceReport* report) {
  std::string csv = "point,jsd\n";
  if (report)
    for (std::size_t i = 0; i < report->jsd.size(); ++i) {
      csv += std::to_string(i);
      csv += ',';
      if (report->jsd[i]) csv += fmt17(*report->jsd[i]);
      csv += '\n';
    }
  write_text_file(path, csv);
}

}  // namespace

PreparedInput prepare_input(const ExperimentConfig& config) {
  PreparedInput input;
  if (config.input.synthetic) {
    StereogramSpec spec = config.input.synth.spec;
    spec.disparity_levels = config.model.disparity_levels;
    try {
      Stereogram s = make_random_dot_stereogram(spec);
      input.left = std::move(s.left);
      input.right = std::move(s.right);
      input.truth = std::move(s.truth);
      input.has_truth = true;
    } catch (const InvalidInput& e) {
      throw ConfigError(std::string("input.synthetic: ") + e.what());
    }
    return input;
  }
  input.left = load_pgm(config.input.files.left);
  input.right = load_pgm(config.input.files.right);
  if (input.left.width != input.right.width ||
      input.left.height != input.right.height)
    throw ConfigError("input images disagree on dimensions");
  if (!config.input.files.ground_truth.empty()) {
    input.truth = load_ground_truth(config.input.files.ground_truth,
                                    config.input.files.ground_truth_scale,
                                    config.model.disparity_levels);
    if (input.truth.width != input.left.width ||
        input.truth.height != input.left.height)
      throw ConfigError("ground truth does not match the image dimensions");
    input.has_truth = true;
  }
  return input;
}

void run_experiment(const ExperimentConfig& config, int workers) {
  config.validate();
  if (workers < 1) throw ConfigError("workers must be >= 1");
  const PreparedInput input = prepare_input(config);
  const std::uint64_t config_hash = config.hash();

  const fs::path out(config.output_dir);
  const fs::path traces_dir = out / "traces";
  std::error_code ec;
  fs::create_directories(traces_dir, ec);
  if (ec)
    throw IoError("cannot create output directory " + traces_dir.string());
  write_text_file(out / "resolved_config.json", config.to_json().dump(2) + "\n");

  const auto plans = checkpoint_plans(config);
  std::vector<ChainJob> jobs;
  for (Arm arm : kArms) {
    for (int run = 0; run < config.runs; ++run) {
      ChainJob job;
      job.arm = arm;
      job.run = run;
      job.chain = config.chain;
      job.chain.seed = run_seed(config, arm, run);
      if (arm == Arm::Noise) {
        job.left = add_gaussian_noise(
            input.left, config.metrics.noise_sigma,
            derive_seed(config.chain.seed,
                        (kNoiseLeftTag << 32) | static_cast<std::uint32_t>(run)));
        job.right = add_gaussian_noise(
            input.right, config.metrics.noise_sigma,
            derive_seed(config.chain.seed,
                        (kNoiseRightTag << 32) | static_cast<std::uint32_t>(run)));
      } else {
        job.left = input.left;
        job.right = input.right;
      }
      job.snapshots.push_back(
          {config.chain.iterations, config.chain.record_window, 0});
      if (arm != Arm::Noise)
        for (const CheckpointPlan& plan : plans)
          job.snapshots.push_back({plan.iterations, plan.window, plan.milli});
      jobs.push_back(std::move(job));
    }
  }

  execute_jobs(config, jobs, config_hash, traces_dir, workers);

  const RobustnessReport report = compute_report(config);
  write_report_files(config, report);
}

RobustnessReport compute_report(const ExperimentConfig& config) {
  config.validate();
  const std::uint64_t config_hash = config.hash();
  const fs::path traces_dir = fs::path(config.output_dir) / "traces";
  const PreparedInput input = prepare_input(config);

  RobustnessReport report;
  report.config_hash = config_hash;
  report.input_width = input.left.width;
  report.input_height = input.left.height;
  report.has_ground_truth = input.has_truth;
  report.clamped_disparities = input.has_truth ? input.truth.clamped : 0;
  report.total_pixels = input.left.width * input.left.height;

  std::vector<std::vector<ChainTrace>> main_traces(3);
  for (Arm arm : kArms) {
    auto& list = main_traces[static_cast<int>(arm)];
    list.reserve(config.runs);
    for (int run = 0; run < config.runs; ++run)
      list.push_back(load_checked_trace(
          traces_dir, arm, 0, run, config, config_hash, config.chain.iterations,
          config.chain.record_window, input.left.height, input.left.width));
  }

  std::vector<const ChainTrace*> sw_ptrs, noise_ptrs, hw_ptrs;
  for (const ChainTrace& t : main_traces[0]) sw_ptrs.push_back(&t);
  for (const ChainTrace& t : main_traces[1]) noise_ptrs.push_back(&t);
  for (const ChainTrace& t : main_traces[2]) hw_ptrs.push_back(&t);

  const std::vector<std::uint8_t> active = active_region(sw_ptrs, hw_ptrs);
  report.active_pixels = static_cast<int>(
      std::count(active.begin(), active.end(), std::uint8_t{1}));

  std::vector<LabelMap> sw_ends;
  sw_ends.reserve(config.runs);
  for (const ChainTrace& t : main_traces[0]) sw_ends.push_back(t.end);
  report.reference = reference_mode(sw_ends);

  const std::size_t npix = static_cast<std::size_t>(report.total_pixels);
  for (Arm arm : kArms) {
    const auto& list = main_traces[static_cast<int>(arm)];
    ArmReport arm_report;
    std::vector<double> bp;
    std::vector<std::optional<double>> r2, ess_active, ess_overall;
    std::vector<double> rv_sum(npix, 0.0);
    std::vector<int> rv_count(npix, 0);
    for (const ChainTrace& trace : list) {
      if (input.has_truth)
        bp.push_back(bad_pixel_percentage(trace.end, input.truth,
                                          config.metrics.bp_threshold));
      r2.push_back(r_squared(trace.end, report.reference));
      const EssSummary es = ess_summary(trace, active);
      ess_active.push_back(es.mean_active);
      ess_overall.push_back(es.mean_overall);
      for (std::size_t p = 0; p < npix; ++p)
        if (es.per_rv[p]) {
          rv_sum[p] += *es.per_rv[p];
          ++rv_count[p];
        }
      arm_report.degenerate_fallbacks += trace.meta.degenerate_fallbacks;
    }
    arm_report.bad_pixel_pct = make_aggregate(std::move(bp));
    arm_report.r_squared = make_opt_aggregate(std::move(r2));
    arm_report.ess_active = make_opt_aggregate(std::move(ess_active));
    arm_report.ess_overall = make_opt_aggregate(std::move(ess_overall));
    arm_report.per_rv_ess.resize(npix);
    for (std::size_t p = 0; p < npix; ++p)
      if (rv_count[p] > 0)
        arm_report.per_rv_ess[p] = rv_sum[p] / rv_count[p];
    std::vector<const ChainTrace*> ptrs;
    for (const ChainTrace& t : list) ptrs.push_back(&t);
    arm_report.per_rv_rhat = rhat_field(ptrs);
    arm_report.converged_pct = convergence_percentage(arm_report.per_rv_rhat);
    switch (arm) {
      case Arm::Software: report.software = std::move(arm_report); break;
      case Arm::Noise: report.noise = std::move(arm_report); break;
      case Arm::Hardware: report.hardware = std::move(arm_report); break;
    }
  }

  for (const CheckpointPlan& plan : checkpoint_plans(config)) {
    CheckpointReport cp;
    cp.fraction = plan.fraction;
    cp.iterations = plan.iterations;
    cp.window = plan.window;
    for (Arm arm : {Arm::Software, Arm::Hardware}) {
      std::vector<ChainTrace> traces;
      traces.reserve(config.runs);
      for (int run = 0; run < config.runs; ++run)
        traces.push_back(load_checked_trace(
            traces_dir, arm, plan.milli, run, config, config_hash,
            plan.iterations, plan.window, input.left.height, input.left.width));
      std::vector<const ChainTrace*> ptrs;
      for (const ChainTrace& t : traces) ptrs.push_back(&t);
      const double pct = convergence_percentage(rhat_field(ptrs));
      (arm == Arm::Software ? cp.software_pct : cp.hardware_pct) = pct;
    }
    report.checkpoints.push_back(cp);
  }

  const std::vector<double> sw_r2 = defined_values(report.software.r_squared);
  const std::vector<double> hw_r2 = defined_values(report.hardware.r_squared);
  const std::vector<double> nz_r2 = defined_values(report.noise.r_squared);
  if (sw_r2.size() >= 2 && hw_r2.size() >= 2) {
    const KsResult ks = ks_permutation_test(
        sw_r2, hw_r2, config.metrics.ks_permutations,
        derive_seed(config.chain.seed, kKsHardwareStream));
    report.ks_software_hardware = {true, ks.statistic, ks.p_value,
                                   ks.permutations};
  }
  if (sw_r2.size() >= 2 && nz_r2.size() >= 2) {
    const KsResult ks = ks_permutation_test(
        sw_r2, nz_r2, config.metrics.ks_permutations,
        derive_seed(config.chain.seed, kKsNoiseStream));
    report.ks_software_noise = {true, ks.statistic, ks.p_value,
                                ks.permutations};
  }

  if (config.metrics.divergence.points > 0)
    report.divergence =
        run_divergence_sweep(config.approx, config.metrics.divergence,
                             config.model.disparity_levels);
  return report;
}

DivergenceReport run_divergence_sweep(const ApproxConfig& approx,
                                      const DivergenceSweep& sweep,
                                      int default_support) {
  approx.validate();
  if (sweep.points < 1)
    throw ConfigError("divergence sweep needs points >= 1");
  const int support = sweep.support == 0 ? default_support : sweep.support;
  if (support < 2) throw ConfigError("divergence sweep needs support >= 2");
  if (!std::isfinite(sweep.energy_min) || !std::isfinite(sweep.energy_max) ||
      sweep.energy_max < sweep.energy_min)
    throw ConfigError("divergence sweep energy range is invalid");
  if (!std::isfinite(sweep.temperature) || sweep.temperature <= 0.0)
    throw ConfigError("divergence sweep temperature must be > 0");
  if (sweep.histogram_bins < 1)
    throw ConfigError("divergence sweep needs histogram_bins >= 1");

  DivergenceReport report;
  report.points = sweep.points;
  report.histogram.assign(static_cast<std::size_t>(sweep.histogram_bins), 0);
  const double ln2 = std::log(2.0);
  report.histogram_bin_width = ln2 / sweep.histogram_bins;

  std::mt19937_64 rng(derive_seed(sweep.seed, kDivergenceStream));
  std::vector<double> energies(static_cast<std::size_t>(support));
  const double span = sweep.energy_max - sweep.energy_min;
  double sum = 0.0;
  double best = -1.0;
  int scored = 0;
  for (int i = 0; i < sweep.points; ++i) {
    for (double& e : energies) e = sweep.energy_min + span * uniform01(rng);
    const Pmf ideal = pmf_from_energies(energies, sweep.temperature);
    std::optional<Pmf> effective;
    try {
      effective = effective_hw_pmf(energies, sweep.temperature, approx);
    } catch (const DegenerateDistribution&) {
      ++report.degenerate;
      report.jsd.emplace_back(std::nullopt);
      continue;
    }
    const double jsd = js_divergence(ideal, *effective);
    report.jsd.emplace_back(jsd);
    sum += jsd;
    ++scored;
    if (jsd > best) {
      best = jsd;
      report.argmax_energies = energies;
    }
    const auto bin = std::min(
        static_cast<std::size_t>(jsd / report.histogram_bin_width),
        report.histogram.size() - 1);
    ++report.histogram[bin];
  }
  report.max_jsd = std::max(best, 0.0);
  report.mean_jsd = scored > 0 ? sum / scored : 0.0;
  return report;
}

void write_report_files(const ExperimentConfig& config,
                        const RobustnessReport& report) {
  const fs::path out(config.output_dir);

  ordered_json j;
  j["config"] = config.to_json();
  j["config"].erase("output_dir");  // keep the report location-independent
  j["config_hash"] = hash_hex(report.config_hash);
  j["input"] = {{"width", report.input_width},
                {"height", report.input_height},
                {"has_ground_truth", report.has_ground_truth},
                {"clamped_disparities", report.clamped_disparities}};
  j["active_region"] = {
      {"active", report.active_pixels},
      {"total", report.total_pixels},
      {"fraction", report.total_pixels > 0
                       ? static_cast<double>(report.active_pixels) /
                             report.total_pixels
                       : 0.0}};
  j["arms"] = ordered_json::object();
  for (Arm arm : kArms)
    j["arms"][arm_name(arm)] =
        arm_json(report.arm(arm), report.has_ground_truth);
  ordered_json cps = ordered_json::array();
  for (const CheckpointReport& cp : report.checkpoints)
    cps.push_back({{"fraction", cp.fraction},
                   {"iterations", cp.iterations},
                   {"window", cp.window},
                   {"software_pct", cp.software_pct},
                   {"hardware_pct", cp.hardware_pct}});
  j["convergence"] = {{"checkpoints", cps}};
  j["ks"] = {{"software_vs_hardware", ks_json(report.ks_software_hardware)},
             {"software_vs_noise", ks_json(report.ks_software_noise)}};
  j["divergence"] = report.divergence ? divergence_json(*report.divergence)
                                      : ordered_json(nullptr);
  write_text_file(out / "report.json", j.dump(2) + "\n");

  std::string per_rv = "arm,rv_id,ess,B,W,rhat,verdict\n";
  for (Arm arm : kArms) {
    const ArmReport& ar = report.arm(arm);
    for (std::size_t p = 0; p < ar.per_rv_rhat.size(); ++p) {
      per_rv += arm_name(arm);
      per_rv += ',';
      per_rv += std::to_string(p);
      per_rv += ',';
      if (ar.per_rv_ess[p]) per_rv += fmt17(*ar.per_rv_ess[p]);
      per_rv += ',';
      per_rv += fmt17(ar.per_rv_rhat[p].between);
      per_rv += ',';
      per_rv += fmt17(ar.per_rv_rhat[p].within);
      per_rv += ',';
      if (ar.per_rv_rhat[p].rhat) per_rv += fmt17(*ar.per_rv_rhat[p].rhat);
      per_rv += ',';
      per_rv += ar.per_rv_rhat[p].verdict == GrVerdict::Converged
                    ? "converged"
                    : "not_converged";
      per_rv += '\n';
    }
  }
  write_text_file(out / "per_rv_metrics.csv", per_rv);

  std::string r2 = "arm,run,r2\n";
  for (Arm arm : kArms) {
    const ArmReport& ar = report.arm(arm);
    for (std::size_t run = 0; run < ar.r_squared.per_run.size(); ++run) {
      r2 += arm_name(arm);
      r2 += ',';
      r2 += std::to_string(run);
      r2 += ',';
      if (ar.r_squared.per_run[run]) r2 += fmt17(*ar.r_squared.per_run[run]);
      r2 += '\n';
    }
  }
  write_text_file(out / "r2_values.csv", r2);

  write_divergence_csv(out / "divergence.csv",
                       report.divergence ? &*report.divergence : nullptr);
}

void write_divergence_files(const ApproxConfig& approx,
                            const DivergenceSweep& sweep,
                            const DivergenceReport& report,
                            const std::string& out_dir) {
  const fs::path out(out_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out.string());

  ordered_json j;
  j["approx"] = {{"total_bits", approx.format.total_bits},
                 {"fraction_bits", approx.format.fraction_bits},
                 {"truncation_threshold", approx.truncation_threshold},
                 {"lfsr_width", approx.lfsr_width},
                 {"lfsr_taps", approx.lfsr_taps},
                 {"lfsr_seed", approx.lfsr_seed}};
  j["sweep"] = {{"points", sweep.points},
                {"support", sweep.support},
                {"energy_min", sweep.energy_min},
                {"energy_max", sweep.energy_max},
                {"temperature", sweep.temperature},
                {"seed", sweep.seed},
                {"histogram_bins", sweep.histogram_bins}};
  j["result"] = divergence_json(report);
  write_text_file(out / "divergence_summary.json", j.dump(2) + "\n");
  write_divergence_csv(out / "divergence.csv", &report);
}

}  // namespace statrob
