#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include "statrob/errors.hpp"
#include "statrob/experiment.hpp"

namespace statrob {

namespace {

using nlohmann::ordered_json;

void check_keys(const ordered_json& obj, const char* where,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object())
    throw ConfigError(std::string(where) + " must be a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* a : allowed)
      if (it.key() == a) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

std::string key_path(const char* where, const char* key) {
  return std::string(where) + "." + key;
}

int get_int(const ordered_json& obj, const char* key, int fallback,
            const char* where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer())
    throw ConfigError(key_path(where, key) + " must be an integer");
  return v.get<int>();
}

std::uint64_t get_u64(const ordered_json& obj, const char* key,
                      std::uint64_t fallback, const char* where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                 v.get<std::int64_t>() < 0))
    throw ConfigError(key_path(where, key) + " must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

double get_double(const ordered_json& obj, const char* key, double fallback,
                  const char* where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number())
    throw ConfigError(key_path(where, key) + " must be a number");
  return v.get<double>();
}

std::string get_string(const ordered_json& obj, const char* key,
                       const std::string& fallback, const char* where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_string())
    throw ConfigError(key_path(where, key) + " must be a string");
  return v.get<std::string>();
}

InputConfig parse_input(const ordered_json& j) {
  InputConfig input;
  if (!j.contains("input")) return input;
  const auto& obj = j.at("input");
  check_keys(obj, "input", {"synthetic", "files"});
  if (obj.contains("synthetic") && obj.contains("files"))
    throw ConfigError("input: specify either synthetic or files, not both");

  if (obj.contains("files")) {
    const auto& f = obj.at("files");
    check_keys(f, "input.files",
               {"left", "right", "ground_truth", "ground_truth_scale"});
    input.synthetic = false;
    input.files.left = get_string(f, "left", "", "input.files");
    input.files.right = get_string(f, "right", "", "input.files");
    input.files.ground_truth = get_string(f, "ground_truth", "", "input.files");
    input.files.ground_truth_scale =
        get_int(f, "ground_truth_scale", 1, "input.files");
    return input;
  }

  const auto& s = obj.contains("synthetic") ? obj.at("synthetic")
                                            : ordered_json::object();
  check_keys(s, "input.synthetic",
             {"width", "height", "region_shift", "region_row", "region_col",
              "region_height", "region_width", "seed"});
  StereogramSpec& spec = input.synth.spec;
  spec.width = get_int(s, "width", spec.width, "input.synthetic");
  spec.height = get_int(s, "height", spec.height, "input.synthetic");
  spec.region_shift =
      get_int(s, "region_shift", spec.region_shift, "input.synthetic");
  spec.region_row = get_int(s, "region_row", spec.region_row, "input.synthetic");
  spec.region_col = get_int(s, "region_col", spec.region_col, "input.synthetic");
  spec.region_height =
      get_int(s, "region_height", spec.region_height, "input.synthetic");
  spec.region_width =
      get_int(s, "region_width", spec.region_width, "input.synthetic");
  spec.seed = get_u64(s, "seed", spec.seed, "input.synthetic");
  return input;
}

ModelParams parse_model(const ordered_json& j) {
  ModelParams model;
  if (!j.contains("model")) return model;
  const auto& m = j.at("model");
  check_keys(m, "model",
             {"disparity_levels", "data_truncation", "smoothness_weight",
              "smoothness_truncation"});
  model.disparity_levels =
      get_int(m, "disparity_levels", model.disparity_levels, "model");
  model.data_truncation =
      get_double(m, "data_truncation", model.data_truncation, "model");
  model.smoothness_weight =
      get_double(m, "smoothness_weight", model.smoothness_weight, "model");
  model.smoothness_truncation = get_double(m, "smoothness_truncation",
                                           model.smoothness_truncation, "model");
  return model;
}

ChainConfig parse_chain(const ordered_json& j) {
  ChainConfig chain;
  if (!j.contains("chain")) return chain;
  const auto& c = j.at("chain");
  check_keys(c, "chain",
             {"iterations", "mode", "initial_temperature", "cooling_rate",
              "record_window", "seed"});
  chain.iterations = get_int(c, "iterations", chain.iterations, "chain");
  const std::string mode = get_string(c, "mode", "pure", "chain");
  if (mode == "pure")
    chain.mode = ChainMode::PureSampling;
  else if (mode == "annealing")
    chain.mode = ChainMode::Annealing;
  else
    throw ConfigError("chain.mode must be 'pure' or 'annealing'");
  chain.initial_temperature =
      get_double(c, "initial_temperature", chain.initial_temperature, "chain");
  chain.cooling_rate = get_double(c, "cooling_rate", chain.cooling_rate, "chain");
  chain.record_window = get_int(c, "record_window", chain.record_window, "chain");
  chain.seed = get_u64(c, "seed", chain.seed, "chain");
  return chain;
}

ApproxConfig parse_approx(const ordered_json& j) {
  ApproxConfig approx;
  if (!j.contains("approx")) return approx;
  const auto& a = j.at("approx");
  check_keys(a, "approx",
             {"total_bits", "fraction_bits", "truncation_threshold",
              "lfsr_width", "lfsr_taps", "lfsr_seed"});
  approx.format.total_bits =
      get_int(a, "total_bits", approx.format.total_bits, "approx");
  approx.format.fraction_bits =
      get_int(a, "fraction_bits", approx.format.fraction_bits, "approx");
  approx.truncation_threshold = get_double(a, "truncation_threshold",
                                           approx.truncation_threshold, "approx");
  approx.lfsr_width = get_int(a, "lfsr_width", approx.lfsr_width, "approx");
  if (a.contains("lfsr_taps")) {
    const auto& taps = a.at("lfsr_taps");
    if (!taps.is_array() || taps.empty())
      throw ConfigError("approx.lfsr_taps must be a non-empty array");
    approx.lfsr_taps.clear();
    for (const auto& t : taps) {
      if (!t.is_number_integer())
        throw ConfigError("approx.lfsr_taps entries must be integers");
      approx.lfsr_taps.push_back(t.get<int>());
    }
  }
  approx.lfsr_seed = get_u64(a, "lfsr_seed", approx.lfsr_seed, "approx");
  return approx;
}

DivergenceSweep parse_divergence(const ordered_json& m) {
  DivergenceSweep sweep;
  if (!m.contains("divergence")) return sweep;
  const auto& d = m.at("divergence");
  check_keys(d, "metrics.divergence",
             {"points", "support", "energy_min", "energy_max", "temperature",
              "seed", "histogram_bins"});
  sweep.points = get_int(d, "points", sweep.points, "metrics.divergence");
  sweep.support = get_int(d, "support", sweep.support, "metrics.divergence");
  sweep.energy_min =
      get_double(d, "energy_min", sweep.energy_min, "metrics.divergence");
  sweep.energy_max =
      get_double(d, "energy_max", sweep.energy_max, "metrics.divergence");
  sweep.temperature =
      get_double(d, "temperature", sweep.temperature, "metrics.divergence");
  sweep.seed = get_u64(d, "seed", sweep.seed, "metrics.divergence");
  sweep.histogram_bins =
      get_int(d, "histogram_bins", sweep.histogram_bins, "metrics.divergence");
  return sweep;
}

MetricsOptions parse_metrics(const ordered_json& j) {
  MetricsOptions metrics;
  if (!j.contains("metrics")) return metrics;
  const auto& m = j.at("metrics");
  check_keys(m, "metrics",
             {"bp_threshold", "ks_permutations", "noise_sigma", "checkpoints",
              "divergence"});
  metrics.bp_threshold =
      get_double(m, "bp_threshold", metrics.bp_threshold, "metrics");
  metrics.ks_permutations =
      get_int(m, "ks_permutations", metrics.ks_permutations, "metrics");
  metrics.noise_sigma =
      get_double(m, "noise_sigma", metrics.noise_sigma, "metrics");
  if (m.contains("checkpoints")) {
    const auto& cps = m.at("checkpoints");
    if (!cps.is_array())
      throw ConfigError("metrics.checkpoints must be an array");
    metrics.checkpoints.clear();
    for (const auto& f : cps) {
      if (!f.is_number())
        throw ConfigError("metrics.checkpoints entries must be numbers");
      metrics.checkpoints.push_back(f.get<double>());
    }
  }
  metrics.divergence = parse_divergence(m);
  return metrics;
}

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

}  // namespace

const char* arm_name(Arm arm) {
  switch (arm) {
    case Arm::Software: return "software";
    case Arm::Noise: return "noise";
    case Arm::Hardware: return "hardware";
  }
  return "unknown";
}

const ArmReport& RobustnessReport::arm(Arm a) const {
  switch (a) {
    case Arm::Software: return software;
    case Arm::Noise: return noise;
    case Arm::Hardware: return hardware;
  }
  return software;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::ordered_json& j) {
  check_keys(j, "config",
             {"input", "model", "chain", "runs", "approx", "metrics",
              "output_dir"});
  ExperimentConfig cfg;
  cfg.input = parse_input(j);
  cfg.model = parse_model(j);
  cfg.chain = parse_chain(j);
  cfg.runs = get_int(j, "runs", cfg.runs, "config");
  cfg.approx = parse_approx(j);
  cfg.metrics = parse_metrics(j);
  cfg.output_dir = get_string(j, "output_dir", cfg.output_dir, "config");
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  ExperimentConfig cfg = from_json(j);
  cfg.validate();
  return cfg;
}

std::vector<CheckpointPlan> checkpoint_plans(const ExperimentConfig& config) {
  std::vector<CheckpointPlan> plans;
  for (double f : config.metrics.checkpoints) {
    CheckpointPlan plan;
    plan.fraction = f;
    plan.milli = static_cast<std::uint32_t>(std::llround(f * 1000.0));
    plan.iterations = static_cast<int>(
        std::max<long long>(1, std::llround(f * config.chain.iterations)));
    plan.window = plan.iterations - plan.iterations / 2;  // trailing half
    plans.push_back(plan);
  }
  return plans;
}

void ExperimentConfig::validate() const {
  if (model.disparity_levels < 2 || model.disparity_levels > 256)
    throw ConfigError("model.disparity_levels must lie in [2, 256]");
  if (!std::isfinite(model.data_truncation) || model.data_truncation < 0.0)
    throw ConfigError("model.data_truncation must be finite and >= 0");
  if (!std::isfinite(model.smoothness_weight) || model.smoothness_weight < 0.0)
    throw ConfigError("model.smoothness_weight must be finite and >= 0");
  if (!std::isfinite(model.smoothness_truncation) ||
      model.smoothness_truncation < 1.0)
    throw ConfigError("model.smoothness_truncation must be finite and >= 1");

  chain.validate();
  if (chain.record_window < 10)
    throw ConfigError("chain.record_window must be >= 10 for the metrics");
  if (runs < 2) throw ConfigError("runs must be >= 2");
  approx.validate();

  if (!std::isfinite(metrics.bp_threshold) || metrics.bp_threshold < 0.0)
    throw ConfigError("metrics.bp_threshold must be finite and >= 0");
  if (metrics.ks_permutations < 100)
    throw ConfigError("metrics.ks_permutations must be >= 100");
  if (!std::isfinite(metrics.noise_sigma) || metrics.noise_sigma < 0.0)
    throw ConfigError("metrics.noise_sigma must be finite and >= 0");

  std::set<std::uint32_t> millis;
  for (double f : metrics.checkpoints) {
    if (!std::isfinite(f) || f <= 0.0 || f > 100.0)
      throw ConfigError("metrics.checkpoints entries must lie in (0, 100]");
    const auto milli = static_cast<std::uint32_t>(std::llround(f * 1000.0));
    if (milli == 0 || !millis.insert(milli).second)
      throw ConfigError("metrics.checkpoints entries collide at " +
                        std::to_string(f));
  }
  for (const CheckpointPlan& plan : checkpoint_plans(*this))
    if (plan.window < 10)
      throw ConfigError("checkpoint " + std::to_string(plan.fraction) +
                        " records fewer than 10 sweeps; raise chain.iterations");

  const DivergenceSweep& d = metrics.divergence;
  if (d.points < 0) throw ConfigError("metrics.divergence.points must be >= 0");
  if (d.points > 0) {
    if (d.support != 0 && (d.support < 2 || d.support > 4096))
      throw ConfigError("metrics.divergence.support must be 0 or in [2, 4096]");
    if (!std::isfinite(d.energy_min) || !std::isfinite(d.energy_max) ||
        d.energy_max < d.energy_min)
      throw ConfigError("metrics.divergence energy range is invalid");
    if (!std::isfinite(d.temperature) || d.temperature <= 0.0)
      throw ConfigError("metrics.divergence.temperature must be > 0");
    if (d.histogram_bins < 1)
      throw ConfigError("metrics.divergence.histogram_bins must be >= 1");
  }

  if (!input.synthetic) {
    if (input.files.left.empty() || input.files.right.empty())
      throw ConfigError("input.files requires left and right paths");
    if (input.files.ground_truth_scale < 1)
      throw ConfigError("input.files.ground_truth_scale must be >= 1");
  }
  if (output_dir.empty()) throw ConfigError("output_dir must be non-empty");
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
  nlohmann::ordered_json j;
  if (input.synthetic) {
    const StereogramSpec& s = input.synth.spec;
    j["input"]["synthetic"] = {
        {"width", s.width},
        {"height", s.height},
        {"region_shift", s.region_shift},
        {"region_row", s.region_row},
        {"region_col", s.region_col},
        {"region_height", s.region_height},
        {"region_width", s.region_width},
        {"seed", s.seed},
    };
  } else {
    j["input"]["files"] = {
        {"left", input.files.left},
        {"right", input.files.right},
        {"ground_truth", input.files.ground_truth},
        {"ground_truth_scale", input.files.ground_truth_scale},
    };
  }
  j["model"] = {
      {"disparity_levels", model.disparity_levels},
      {"data_truncation", model.data_truncation},
      {"smoothness_weight", model.smoothness_weight},
      {"smoothness_truncation", model.smoothness_truncation},
  };
  j["chain"] = {
      {"iterations", chain.iterations},
      {"mode", chain.mode == ChainMode::PureSampling ? "pure" : "annealing"},
      {"initial_temperature", chain.initial_temperature},
      {"cooling_rate", chain.cooling_rate},
      {"record_window", chain.record_window},
      {"seed", chain.seed},
  };
  j["runs"] = runs;
  j["approx"] = {
      {"total_bits", approx.format.total_bits},
      {"fraction_bits", approx.format.fraction_bits},
      {"truncation_threshold", approx.truncation_threshold},
      {"lfsr_width", approx.lfsr_width},
      {"lfsr_taps", approx.lfsr_taps},
      {"lfsr_seed", approx.lfsr_seed},
  };
  j["metrics"] = {
      {"bp_threshold", metrics.bp_threshold},
      {"ks_permutations", metrics.ks_permutations},
      {"noise_sigma", metrics.noise_sigma},
      {"checkpoints", metrics.checkpoints},
      {"divergence",
       {
           {"points", metrics.divergence.points},
           {"support", metrics.divergence.support},
           {"energy_min", metrics.divergence.energy_min},
           {"energy_max", metrics.divergence.energy_max},
           {"temperature", metrics.divergence.temperature},
           {"seed", metrics.divergence.seed},
           {"histogram_bins", metrics.divergence.histogram_bins},
       }},
  };
  j["output_dir"] = output_dir;
  return j;
}

std::uint64_t ExperimentConfig::hash() const {
  nlohmann::ordered_json j = to_json();
  j.erase("output_dir");  // relocating outputs must not change identity
  const std::string canonical = j.dump();
  std::uint64_t h = kFnvOffset;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

}  // namespace statrob
