#pragma once
// Experiment configuration: one flat key=value file drives every tunable
// constant in the library. A config plus a master seed fully determines a
// run, so the canonical serialization below is hashed into run manifests.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>

#include "esnn/csv.hpp"
#include "esnn/decision.hpp"
#include "esnn/empathy.hpp"
#include "esnn/env.hpp"
#include "esnn/neuromod.hpp"
#include "esnn/rng.hpp"

namespace esnn {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kSnapshotFormatVersion = "1";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScenarioSettings {
  std::string mode = "demo";  // demo | random | file
  std::string file;           // scenario text file for mode=file
  GenerationConfig generation;
  int count = 3;               // random maps pooled by the distance analysis
  bool randomize_start = false;  // fresh A start each episode (policy maps)
};

struct TrainingSettings {
  int episodes = 2000;
  int window = 10;          // episodes per altruistic-count bucket
  int converged_tail = 400; // final episodes treated as converged
  double explore_start = 1.0;
  double explore_end = 0.05;
  int explore_anneal = 1500;   // episodes across which exploration decays
  double explore_shape = 2.0;  // anneal curvature: 1 linear, >1 convex
  // Extra exploration probability per unit of felt distress. Scales with
  // the empathy level, so a non-empathic agent keeps the bare schedule.
  double explore_distress = 0.15;
};

struct SweepSettings {
  int points = 20;  // default calibration grid size
};

struct ExperimentConfig {
  std::uint64_t seed = 42;
  ScenarioSettings scenario;
  TrainingSettings training;
  SweepSettings sweep;
  LifParams lif;                // shared by all three circuits
  PlasticityParams plasticity;  // shared pairing constants
  EmpathyConfig empathy;
  DopamineConfig dopamine;
  RpeParams rpe;
  DecisionConfig decision;

  EmpathyConfig empathy_config() const {
    EmpathyConfig c = empathy;
    c.lif = lif;
    c.plasticity = plasticity;
    return c;
  }
  DopamineConfig dopamine_config() const {
    DopamineConfig c = dopamine;
    c.lif = lif;
    return c;
  }
  DecisionConfig decision_config() const {
    DecisionConfig c = decision;
    c.lif = lif;
    c.plasticity = plasticity;
    return c;
  }
};

namespace detail {

// std::size_t and std::uint64_t can be the same underlying type, so the two
// wide-integer kinds go through distinct wrapper structs to keep the
// variant's alternatives unique on every platform.
struct SizeRef {
  std::size_t* p;
};
struct U64Ref {
  std::uint64_t* p;
};
using ConfigBinding =
    std::variant<double*, int*, SizeRef, bool*, U64Ref, std::string*>;

// Every externally tunable knob, by flat key. The same table drives parsing,
// canonical serialization, and hashing.
inline std::map<std::string, ConfigBinding> config_bindings(
    ExperimentConfig& c) {
  return {
      {"seed", U64Ref{&c.seed}},

      {"scenario.mode", &c.scenario.mode},
      {"scenario.file", &c.scenario.file},
      {"scenario.width", &c.scenario.generation.width},
      {"scenario.height", &c.scenario.generation.height},
      {"scenario.step_budget", &c.scenario.generation.step_budget},
      {"scenario.wall_density", &c.scenario.generation.wall_density},
      {"scenario.min_t_distance", &c.scenario.generation.min_t_distance},
      {"scenario.min_h_distance", &c.scenario.generation.min_h_distance},
      {"scenario.min_detour", &c.scenario.generation.min_detour},
      {"scenario.max_tries", &c.scenario.generation.max_tries},
      {"scenario.count", &c.scenario.count},
      {"scenario.randomize_start", &c.scenario.randomize_start},

      {"training.episodes", &c.training.episodes},
      {"training.window", &c.training.window},
      {"training.converged_tail", &c.training.converged_tail},
      {"training.explore_start", &c.training.explore_start},
      {"training.explore_end", &c.training.explore_end},
      {"training.explore_shape", &c.training.explore_shape},
      {"training.explore_distress", &c.training.explore_distress},
      {"training.explore_anneal", &c.training.explore_anneal},

      {"sweep.points", &c.sweep.points},

      {"lif.tau_m", &c.lif.tau_m},
      {"lif.v_rest", &c.lif.v_rest},
      {"lif.v_threshold", &c.lif.v_threshold},
      {"lif.v_reset", &c.lif.v_reset},
      {"lif.refractory", &c.lif.refractory},
      {"lif.dt", &c.lif.dt},

      {"plasticity.a_plus", &c.plasticity.a_plus},
      {"plasticity.a_minus", &c.plasticity.a_minus},
      {"plasticity.tau_plus", &c.plasticity.tau_plus},
      {"plasticity.tau_minus", &c.plasticity.tau_minus},
      {"plasticity.all_to_all", &c.plasticity.all_to_all},

      {"empathy.neurons_per_group", SizeRef{&c.empathy.neurons_per_group}},
      {"empathy.w_init", &c.empathy.w_init},
      {"empathy.w_max", &c.empathy.w_max},
      {"empathy.tau_syn", &c.empathy.tau_syn},
      {"empathy.gain_me", &c.empathy.gain_me},
      {"empathy.gain_pm", &c.empathy.gain_pm},
      {"empathy.gain_em", &c.empathy.gain_em},
      {"empathy.gain_mp", &c.empathy.gain_mp},
      {"empathy.drive_emotion", &c.empathy.drive_emotion},
      {"empathy.drive_cue", &c.empathy.drive_cue},
      {"empathy.drive_jitter", &c.empathy.drive_jitter},
      {"empathy.emotion_bias", &c.empathy.emotion_bias},
      {"empathy.trial_window", &c.empathy.trial_window},
      {"empathy.mirror_onset", &c.empathy.mirror_onset},
      {"empathy.perception_onset", &c.empathy.perception_onset},
      {"empathy.trials", &c.empathy.trials},
      {"empathy.inference_window", &c.empathy.inference_window},
      {"empathy.inhib_slots_per_neuron",
       SizeRef{&c.empathy.inhib_slots_per_neuron}},
      {"empathy.inhib_strength", &c.empathy.inhib_strength},
      {"empathy.detection_fraction", &c.empathy.detection_fraction},

      {"dopamine.n_neurons", SizeRef{&c.dopamine.n_neurons}},
      {"dopamine.n_emotion_inputs", SizeRef{&c.dopamine.n_emotion_inputs}},
      {"dopamine.baseline_drive", &c.dopamine.baseline_drive},
      {"dopamine.drive_jitter", &c.dopamine.drive_jitter},
      {"dopamine.w_inhib", &c.dopamine.w_inhib},
      {"dopamine.syn_gain", &c.dopamine.syn_gain},
      {"dopamine.tau_syn", &c.dopamine.tau_syn},
      {"dopamine.window", &c.dopamine.window},
      {"dopamine.transient_skip", &c.dopamine.transient_skip},

      {"rpe.alpha", &c.rpe.alpha},
      {"rpe.beta", &c.rpe.beta},

      {"decision.neurons_per_action", SizeRef{&c.decision.neurons_per_action}},
      {"decision.window", &c.decision.window},
      {"decision.state_drive", &c.decision.state_drive},
      {"decision.explore_drive", &c.decision.explore_drive},
      {"decision.w_init", &c.decision.w_init},
      {"decision.w_jitter", &c.decision.w_jitter},
      {"decision.w_max", &c.decision.w_max},
      {"decision.tau_syn", &c.decision.tau_syn},
      {"decision.syn_gain", &c.decision.syn_gain},
      {"decision.action_bias", &c.decision.action_bias},
      {"decision.wta_inhib", &c.decision.wta_inhib},
      {"decision.trace_retention", &c.decision.trace_retention},
      {"decision.deposit_gain", &c.decision.deposit_gain},
  };
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline void assign_config_value(const std::string& key, ConfigBinding binding,
                                const std::string& value) {
  const auto bad = [&](const char* what) {
    throw ConfigError("config: key '" + key + "' needs " + what + ", got '" +
                      value + "'");
  };
  std::size_t used = 0;
  try {
    if (auto** p = std::get_if<double*>(&binding)) {
      **p = std::stod(value, &used);
      if (used != value.size()) bad("a real number");
    } else if (auto** p = std::get_if<int*>(&binding)) {
      **p = std::stoi(value, &used);
      if (used != value.size()) bad("an integer");
    } else if (auto* p = std::get_if<SizeRef>(&binding)) {
      if (!value.empty() && value[0] == '-') bad("a non-negative integer");
      *p->p = std::stoull(value, &used);
      if (used != value.size()) bad("a non-negative integer");
    } else if (auto* p = std::get_if<U64Ref>(&binding)) {
      if (!value.empty() && value[0] == '-') bad("a non-negative integer");
      *p->p = std::stoull(value, &used);
      if (used != value.size()) bad("a non-negative integer");
    } else if (auto** p = std::get_if<bool*>(&binding)) {
      if (value == "1" || value == "true")
        **p = true;
      else if (value == "0" || value == "false")
        **p = false;
      else
        bad("a boolean (0/1/true/false)");
    } else if (auto** p = std::get_if<std::string*>(&binding)) {
      **p = value;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    bad("a parseable number");
  }
}

inline std::string render_config_value(ConfigBinding binding) {
  if (auto** p = std::get_if<double*>(&binding)) return format_double(**p);
  if (auto** p = std::get_if<int*>(&binding)) return std::to_string(**p);
  if (auto* p = std::get_if<SizeRef>(&binding)) return std::to_string(*p->p);
  if (auto* p = std::get_if<U64Ref>(&binding)) return std::to_string(*p->p);
  if (auto** p = std::get_if<bool*>(&binding)) return **p ? "1" : "0";
  if (auto** p = std::get_if<std::string*>(&binding)) return **p;
  return "";
}

}  // namespace detail

inline void apply_config_override(ExperimentConfig& cfg, const std::string& key,
                                  const std::string& value) {
  auto bindings = detail::config_bindings(cfg);
  const auto it = bindings.find(key);
  if (it == bindings.end())
    throw ConfigError("config: unknown key '" + key + "'");
  detail::assign_config_value(key, it->second, value);
}

// Parses `key = value` lines over the built-in defaults. '#' starts a
// comment; blank lines are ignored; unknown keys are rejected.
inline ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string line = text.substr(
        pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(line_no) +
                        " is not 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config: line " + std::to_string(line_no) +
                        " has an empty key");
    apply_config_override(cfg, key, value);
  }
  return cfg;
}

// Canonical one-line-per-key serialization (keys sorted); identical configs
// serialize identically, so this is what run manifests hash and embed.
inline std::string canonical_config_text(const ExperimentConfig& cfg) {
  ExperimentConfig copy = cfg;
  std::string out;
  for (const auto& [key, binding] : detail::config_bindings(copy)) {
    out += key;
    out += '=';
    out += detail::render_config_value(binding);
    out += '\n';
  }
  return out;
}

inline std::uint64_t config_hash(const ExperimentConfig& cfg) {
  return hash64(canonical_config_text(cfg));
}

inline void validate_config(const ExperimentConfig& c) {
  const auto fail = [](const std::string& msg) {
    throw ConfigError("config: " + msg);
  };
  if (c.scenario.mode != "demo" && c.scenario.mode != "random" &&
      c.scenario.mode != "file")
    fail("scenario.mode must be demo, random, or file");
  if (c.scenario.mode == "file" && c.scenario.file.empty())
    fail("scenario.mode=file requires scenario.file");
  if (c.scenario.generation.width < 4 || c.scenario.generation.height < 4)
    fail("scenario grid must be at least 4x4");
  if (c.scenario.generation.step_budget <= 0)
    fail("scenario.step_budget must be positive");
  if (c.scenario.generation.wall_density < 0.0 ||
      c.scenario.generation.wall_density >= 1.0)
    fail("scenario.wall_density must lie in [0, 1)");
  if (c.scenario.generation.max_tries <= 0)
    fail("scenario.max_tries must be positive");
  if (c.scenario.count <= 0) fail("scenario.count must be positive");

  if (c.training.episodes < 0) fail("training.episodes must be non-negative");
  if (c.training.window <= 0) fail("training.window must be positive");
  if (c.training.converged_tail < 0)
    fail("training.converged_tail must be non-negative");
  if (c.training.explore_start < 0.0 || c.training.explore_start > 1.0 ||
      c.training.explore_end < 0.0 || c.training.explore_end > 1.0)
    fail("exploration rates must lie in [0, 1]");
  if (c.training.explore_anneal <= 0)
    fail("training.explore_anneal must be positive");
  if (c.training.explore_shape <= 0.0)
    fail("training.explore_shape must be positive");
  if (c.training.explore_distress < 0.0 || c.training.explore_distress > 1.0)
    fail("training.explore_distress must lie in [0, 1]");
  if (c.sweep.points < 2) fail("sweep.points must be at least 2");

  if (c.lif.tau_m <= 0.0 || c.lif.dt <= 0.0) fail("lif.tau_m and lif.dt must be positive");
  if (c.lif.refractory < 0.0) fail("lif.refractory must be non-negative");
  if (c.lif.v_threshold <= c.lif.v_reset)
    fail("lif.v_threshold must exceed lif.v_reset");

  if (c.plasticity.a_plus < 0.0 || c.plasticity.a_minus < 0.0)
    fail("plasticity amplitudes must be non-negative");
  if (c.plasticity.tau_plus <= 0.0 || c.plasticity.tau_minus <= 0.0)
    fail("plasticity time constants must be positive");

  if (c.empathy.neurons_per_group == 0)
    fail("empathy.neurons_per_group must be positive");
  if (c.empathy.w_max <= 0.0 || c.empathy.w_init < 0.0 ||
      c.empathy.w_init > c.empathy.w_max)
    fail("empathy weights must satisfy 0 <= w_init <= w_max");
  if (c.empathy.tau_syn <= 0.0) fail("empathy.tau_syn must be positive");
  if (!(c.empathy.mirror_onset >= 0 &&
        c.empathy.mirror_onset < c.empathy.perception_onset &&
        c.empathy.perception_onset < c.empathy.trial_window))
    fail("empathy stage onsets must satisfy 0 <= mirror < perception < window");
  if (c.empathy.trials <= 0) fail("empathy.trials must be positive");
  if (c.empathy.inference_window <= 0)
    fail("empathy.inference_window must be positive");
  if (c.empathy.detection_fraction <= 0.0 ||
      c.empathy.detection_fraction > 1.0)
    fail("empathy.detection_fraction must lie in (0, 1]");
  if (c.empathy.inhib_slots_per_neuron == 0)
    fail("empathy.inhib_slots_per_neuron must be positive");

  if (c.dopamine.n_neurons == 0) fail("dopamine.n_neurons must be positive");
  if (c.dopamine.tau_syn <= 0.0) fail("dopamine.tau_syn must be positive");
  if (c.dopamine.transient_skip < 0 ||
      c.dopamine.transient_skip >= c.dopamine.window)
    fail("dopamine.transient_skip must lie inside the window");

  if (c.rpe.alpha < 0.0) fail("rpe.alpha must be non-negative");
  if (c.rpe.beta < 0.0 || c.rpe.beta > 1.0) fail("rpe.beta must lie in [0, 1]");

  if (c.decision.neurons_per_action == 0)
    fail("decision.neurons_per_action must be positive");
  if (c.decision.window <= 0) fail("decision.window must be positive");
  if (c.decision.w_max <= 0.0 || c.decision.w_init < 0.0 ||
      c.decision.w_init > c.decision.w_max)
    fail("decision weights must satisfy 0 <= w_init <= w_max");
  if (c.decision.tau_syn <= 0.0) fail("decision.tau_syn must be positive");
  if (c.decision.wta_inhib < 0.0) fail("decision.wta_inhib must be non-negative");
  if (c.decision.trace_retention < 0.0 || c.decision.trace_retention > 1.0)
    fail("decision.trace_retention must lie in [0, 1]");
  if (c.decision.deposit_gain < 0.0)
    fail("decision.deposit_gain must be non-negative");
}

}  // namespace esnn
