#pragma once
// Experiment harness: binds the empathy circuit, the dopamine system, and
// the decision network into the two-agent gridworld task. Runs training
// loops, empathy-level sweeps, and the distance analysis, and writes every
// artifact (manifest, CSVs, snapshots) deterministically.
//
// Step cycle, once per environment step: read o_emp from B's current cue,
// select an action from a decision window, advance the world, fold the
// window's pairings into the eligibility trace, measure the dopamine
// response to B's post-step cue, convert it to a reward-prediction error,
// and apply the combined task+intrinsic reward to the eligible synapses.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "esnn/config.hpp"
#include "esnn/csv.hpp"
#include "esnn/decision.hpp"
#include "esnn/empathy.hpp"
#include "esnn/env.hpp"
#include "esnn/neuromod.hpp"
#include "esnn/snapshot.hpp"
#include "esnn/stats.hpp"

namespace esnn {

struct HarnessError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EpisodeMetrics {
  int episode = 0;
  bool altruistic = false;  // relieved B's distress (necessarily before T)
  double cost = 0.0;        // negative step total
  double total_return = 0.0;  // summed task + intrinsic reward
  double da_relief = 0.0;   // dopamine burst on the relief step (0 if none)
  int steps = 0;
  int distance_to_h_at_onset = -1;  // BFS A->H when distress began; -1 if none
};

// Cached per-cue readout. Inference windows are stateless, so a trained
// network's flag and dopamine response are fixed per cue within a run.
struct CueReadout {
  int o_emp = 0;
  double s = 1.0;           // normalized dopamine activity under the cue
  double emotion_rate = 0.0;  // negative-emotion sub-group, spikes/ms
  double mirror_rate = 0.0;   // negative-mirror sub-group, spikes/ms
};

inline CueReadout make_cue_readout(const EmpathyNetwork& empathy,
                                   const DopamineCircuit& dopamine, Cue cue) {
  const InferenceResult inf = empathy.infer(cue);
  // The dopamine system listens to the negative-emotion sub-group only.
  const std::size_t n = empathy.config().neurons_per_group;
  const std::vector<SpikeTrain> negative(inf.emotion_trains.begin(),
                                         inf.emotion_trains.begin() + n);
  CueReadout r;
  r.o_emp = inf.o_emp;
  r.s = dopamine.measure(negative);
  r.emotion_rate = inf.emotion_negative_rate;
  r.mirror_rate = inf.mirror_negative_rate;
  return r;
}

// Scenario source selected by the config; `seed` only matters in random mode.
inline Scenario make_scenario(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.scenario.mode == "demo") return make_demo_scenario();
  if (cfg.scenario.mode == "file") {
    std::ifstream in(cfg.scenario.file, std::ios::binary);
    if (!in)
      throw HarnessError("scenario: cannot read file '" + cfg.scenario.file +
                         "'");
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return parse_scenario(text);
  }
  RngStream rng(split_seed(seed, "scenario"));
  return generate_scenario(cfg.scenario.generation, rng, seed);
}

// Convex anneal: a long high-exploration head discovers the relief route
// for every stream, then the rate drops fast enough that the whole second
// half of a run trains the policy at the floor.
inline double exploration_rate(const TrainingSettings& t, int episode) {
  const double f =
      std::min(1.0, double(episode) / double(t.explore_anneal));
  const double keep = std::pow(1.0 - f, t.explore_shape);
  return t.explore_end + (t.explore_start - t.explore_end) * keep;
}

struct TrainingRun {
  Scenario scenario;
  EmpathyLevel level;
  CueReadout red, green;
  std::vector<EpisodeMetrics> episodes;
  std::vector<int> window_altruistic;  // altruistic count per metric window
  DecisionNetwork decision;
  RpePredictor rpe;
  std::uint64_t run_seed = 0;
  double weight_sum = 0.0;  // learned inter-region empathy weights, total

  // Aggregates over the converged tail.
  double converged_altruistic = 0.0;  // mean altruistic count per window
  double mean_cost = 0.0;
  double mean_relief_da = 0.0;  // over the tail's altruistic episodes
  double preference = 0.0;      // intrinsic share of total reward
  double peak_relief_da = 0.0;  // largest relief burst across all episodes
};

namespace detail {

inline void finalize_training_run(TrainingRun& run,
                                  const TrainingSettings& t) {
  const int n = int(run.episodes.size());
  run.window_altruistic.clear();
  for (int start = 0; start < n; start += t.window) {
    int count = 0;
    for (int e = start; e < std::min(n, start + t.window); ++e)
      count += run.episodes[std::size_t(e)].altruistic ? 1 : 0;
    run.window_altruistic.push_back(count);
  }
  for (const auto& m : run.episodes)
    run.peak_relief_da = std::max(run.peak_relief_da, m.da_relief);

  const int tail = std::min(n, t.converged_tail);
  if (tail == 0) return;
  int altruistic = 0, relieved = 0;
  double cost = 0.0, relief_da = 0.0;
  for (int e = n - tail; e < n; ++e) {
    const auto& m = run.episodes[std::size_t(e)];
    altruistic += m.altruistic ? 1 : 0;
    cost += m.cost;
    if (m.altruistic) {
      ++relieved;
      relief_da += m.da_relief;
    }
  }
  run.converged_altruistic = double(altruistic) / tail * t.window;
  run.mean_cost = cost / tail;
  run.mean_relief_da = relieved > 0 ? relief_da / relieved : 0.0;
  run.preference = altruistic_preference(run.mean_relief_da, kGoalReward);
}

inline std::vector<Pos> episode_start_cells(const Scenario& s) {
  std::vector<Pos> cells;
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x) {
      const Pos p{x, y};
      if (!s.free_cell(p)) continue;
      if (p == s.t_goal || p == s.h_goal || p == s.b_start) continue;
      if (s.is_danger(p) || s.in_b_region(p)) continue;
      cells.push_back(p);
    }
  return cells;
}

}  // namespace detail

// One full training run at a fixed empathy level. The empathy network must
// already be self-experience trained and calibrated; it stays frozen here.
inline TrainingRun run_training(const ExperimentConfig& cfg,
                                const Scenario& scenario,
                                const EmpathyNetwork& empathy,
                                const EmpathyLevel& level,
                                std::uint64_t run_seed) {
  validate_config(cfg);
  if (!empathy.trained())
    throw HarnessError("training requires a self-experience-trained empathy network");
  if (empathy.detection_baseline() <= 0.0)
    throw HarnessError("training requires a calibrated detection baseline");

  const DopamineCircuit dopamine(cfg.dopamine_config(),
                                 split_seed(run_seed, "dopamine"));
  TrainingRun run{
      scenario,
      level,
      make_cue_readout(empathy, dopamine, Cue::red),
      make_cue_readout(empathy, dopamine, Cue::green),
      {},
      {},
      DecisionNetwork(cfg.decision_config(), std::size_t(scenario.width),
                      std::size_t(scenario.height),
                      split_seed(run_seed, "decision")),
      RpePredictor(cfg.rpe),
      run_seed,
  };
  run.weight_sum = empathy.w_emotion_mirror().total() +
                   empathy.w_mirror_emotion().total() +
                   empathy.w_mirror_perception().total() +
                   empathy.w_perception_mirror().total();

  std::vector<Pos> starts;
  if (cfg.scenario.randomize_start) {
    starts = detail::episode_start_cells(scenario);
    if (starts.empty())
      throw HarnessError("scenario has no candidate start cells");
  }

  run.episodes.reserve(std::size_t(cfg.training.episodes));
  for (int e = 0; e < cfg.training.episodes; ++e) {
    Scenario episode_scenario = scenario;
    if (!starts.empty()) {
      RngStream start_rng(split_seed(run_seed, "start", std::uint64_t(e)));
      episode_scenario.a_start = starts[start_rng.uniform_index(starts.size())];
    }
    GridWorld env(episode_scenario);
    env.reset(split_seed(run_seed, "walk", std::uint64_t(e)));
    RngStream explore(split_seed(run_seed, "explore", std::uint64_t(e)));
    const double epsilon = exploration_rate(cfg.training, e);

    run.decision.begin_episode();
    double total_return = 0.0, da_relief = 0.0;
    bool altruistic = false;
    while (!env.done()) {
      const CueReadout& pre = env.b_cue() == Cue::red ? run.red : run.green;
      const Pos a = env.a();
      // Felt distress raises the exploration pressure on top of the
      // annealed schedule: searching intensifies exactly while the agent is
      // distressed and subsides once it is calm, so a decaying help policy
      // re-seeds itself instead of unravelling.
      const double window_epsilon = std::min(
          1.0, epsilon + cfg.training.explore_distress * (1.0 - pre.s));
      std::optional<int> boost;
      if (explore.uniform() < window_epsilon)
        boost = int(explore.uniform_index(DecisionNetwork::kActions));
      const WindowResult w = run.decision.select_action(
          std::size_t(a.x), std::size_t(a.y), pre.o_emp, explore, boost);
      const StepOutcome out = env.step(Action(w.action));
      run.decision.fold_trace(w);
      const CueReadout& post = out.b_cue == Cue::red ? run.red : run.green;
      const double da = run.rpe.update(post.s);
      const MoralReward reward = make_moral_reward(out.r_self_task, da);
      run.decision.learn(reward);
      total_return += reward.r_moral;
      if (out.events.distress_relieved) {
        altruistic = true;
        da_relief = da;
      }
    }

    EpisodeMetrics m;
    m.episode = e;
    m.altruistic = altruistic;
    m.steps = env.step_index();
    m.cost = kStepPenalty * env.step_index();
    m.total_return = total_return;
    m.da_relief = da_relief;
    m.distance_to_h_at_onset = env.onset_distance_to_h();
    run.episodes.push_back(m);
  }

  detail::finalize_training_run(run, cfg.training);
  return run;
}

// ---- empathy-level sweep ----

struct SweepPoint {
  int index = 0;
  double proportion = 0.0;
  std::uint64_t point_seed = 0;
  EmpathyLevel level;
  EmpathyNetwork empathy;
  TrainingRun run;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  Correlation fe_vs_altruism;  // F_e percent vs converged altruistic count
};

// Sweeps inhibitory proportions. Each point trains a fresh empathy network
// at its proportion (one shared construction seed keeps the proportion->F_e
// map stable across points) and then runs decision training on streams
// split per point, so adding points never perturbs existing ones.
inline SweepResult sweep_empathy_levels(const ExperimentConfig& cfg,
                                        const Scenario& scenario,
                                        const std::vector<double>& proportions) {
  validate_config(cfg);
  if (proportions.size() < 2)
    throw HarnessError("sweep requires at least two proportions");
  for (std::size_t i = 0; i < proportions.size(); ++i)
    for (std::size_t j = i + 1; j < proportions.size(); ++j)
      if (proportions[i] == proportions[j])
        throw HarnessError("sweep rejects duplicate proportions");

  EmpathyCalibrator calibrator(cfg.empathy_config(),
                               split_seed(cfg.seed, "empathy"));
  SweepResult result;
  result.points.reserve(proportions.size());
  for (std::size_t i = 0; i < proportions.size(); ++i) {
    const std::uint64_t point_seed = split_seed(cfg.seed, "sweep-point", i);
    EmpathyNetwork net = calibrator.trained_network(proportions[i]);
    const EmpathyLevel level = calibrate_empathy_level(
        net, proportions[i], calibrator.reference_rate());
    TrainingRun run = run_training(cfg, scenario, net, level, point_seed);
    result.points.push_back(SweepPoint{int(i), proportions[i], point_seed,
                                       level, std::move(net), std::move(run)});
  }

  std::vector<double> xs, ys;
  for (const auto& p : result.points) {
    xs.push_back(p.level.fe_percent);
    ys.push_back(p.run.converged_altruistic);
  }
  result.fe_vs_altruism = pearson(xs, ys);
  return result;
}

// Default sweep grid: `n` F_e targets evenly covering 5..100%. Targets next
// to the detection boundary at 20% are nudged up so no point sits exactly
// on the flag's >= comparison.
inline std::vector<double> default_fe_targets(int n) {
  if (n < 2) throw HarnessError("sweep grid needs at least two targets");
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    double t = 5.0 + (100.0 - 5.0) * double(i) / double(n - 1);
    if (std::abs(t - 20.0) < 1.5) t = 22.0;
    out.push_back(t);
  }
  return out;
}

// Maps F_e targets to inhibitory proportions with the sweep's calibrator.
// The achievable F_e values are quantized (whole neurons are inhibited), so
// nearby targets can calibrate to the same proportion; duplicates are dropped
// to keep the result directly usable as a sweep grid.
inline std::vector<double> proportions_for_fe_targets(
    const ExperimentConfig& cfg, const std::vector<double>& targets) {
  EmpathyCalibrator calibrator(cfg.empathy_config(),
                               split_seed(cfg.seed, "empathy"));
  std::vector<double> out;
  out.reserve(targets.size());
  for (const double t : targets) {
    const double p = calibrator.proportion_for_fe(t);
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  }
  return out;
}

// ---- distance analysis ----

struct DistanceBand {
  double lo = 0.0, hi = 0.0;  // F_e percent bounds, inclusive
};

inline std::vector<DistanceBand> default_fe_bands() {
  return {{5.0, 25.0}, {30.0, 50.0}, {55.0, 75.0}, {80.0, 100.0}};
}

struct DistanceCell {
  int distance = 0;     // BFS A->H when distress began
  int episodes = 0;     // converged-tail episodes at this distance
  int altruistic = 0;   // of which ended in relief
  double altruistic_per_window = 0.0;  // scaled to the metric window
};

struct DistanceRow {
  DistanceBand band;
  std::vector<DistanceCell> cells;  // ascending by distance
};

// Pools converged-tail episodes of runs whose F_e falls in each band and
// groups them by the onset distance to the help goal.
inline std::vector<DistanceRow> distance_analysis(
    const std::vector<std::pair<double, std::vector<EpisodeMetrics>>>& runs,
    const std::vector<DistanceBand>& bands, const TrainingSettings& t) {
  if (runs.empty()) return {};
  std::vector<DistanceRow> table;
  for (const auto& band : bands) {
    DistanceRow row{band, {}};
    std::map<int, DistanceCell> cells;
    for (const auto& [fe, metrics] : runs) {
      if (fe < band.lo || fe > band.hi) continue;
      const int n = int(metrics.size());
      const int tail = std::min(n, t.converged_tail);
      for (int e = n - tail; e < n; ++e) {
        const auto& m = metrics[std::size_t(e)];
        if (m.distance_to_h_at_onset < 0) continue;  // no distress that episode
        auto& cell = cells[m.distance_to_h_at_onset];
        cell.distance = m.distance_to_h_at_onset;
        cell.episodes += 1;
        cell.altruistic += m.altruistic ? 1 : 0;
      }
    }
    for (auto& [d, cell] : cells) {
      cell.altruistic_per_window =
          double(cell.altruistic) / cell.episodes * t.window;
      row.cells.push_back(cell);
    }
    table.push_back(std::move(row));
  }
  return table;
}

// Greedy rollout over the per-state argmax policy on one empathy layer.
inline bool greedy_rollout_reaches(const DecisionNetwork& net,
                                   const Scenario& s, Pos start, int o_emp,
                                   Pos goal, int max_steps = 256) {
  Pos p = start;
  for (int k = 0; k < max_steps; ++k) {
    if (p == goal) return true;
    const auto entry =
        net.policy_at(std::size_t(p.x), std::size_t(p.y), o_emp);
    const Pos d = action_delta(Action(entry.action));
    const Pos next{p.x + d.x, p.y + d.y};
    if (!s.free_cell(next)) return false;  // bumps a wall: stuck forever
    p = next;
  }
  return p == goal;
}

// ---- artifact emission ----

inline void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw HarnessError("artifacts: cannot create directory '" + dir +
                       "': " + ec.message());
  const std::string probe = dir + "/.write-probe";
  {
    std::ofstream f(probe, std::ios::binary);
    if (!f)
      throw HarnessError("artifacts: destination '" + dir +
                         "' is not writable");
  }
  std::filesystem::remove(probe, ec);
}

inline void write_episodes_csv(const std::string& path,
                               const std::vector<EpisodeMetrics>& metrics) {
  CsvWriter w(path);
  w.row({"episode", "altruistic", "cost", "return", "da_relief", "steps",
         "distance_to_h_at_onset"});
  for (const auto& m : metrics)
    w.row({cell(m.episode), cell(int(m.altruistic)), cell(m.cost),
           cell(m.total_return), cell(m.da_relief), cell(m.steps),
           cell(m.distance_to_h_at_onset)});
}

inline void write_windows_csv(const std::string& path,
                              const std::vector<int>& window_altruistic,
                              double fe_percent) {
  CsvWriter w(path);
  w.row({"window", "fe_percent", "altruistic_count"});
  for (std::size_t i = 0; i < window_altruistic.size(); ++i)
    w.row({cell(i), cell(fe_percent), cell(window_altruistic[i])});
}

inline void write_policy_csv(const std::string& path,
                             const DecisionNetwork& net) {
  CsvWriter w(path);
  w.row({"x", "y", "o_emp", "best_action", "action_name", "best_weight"});
  for (const int o_emp : {0, -1})
    for (std::size_t y = 0; y < net.grid_height(); ++y)
      for (std::size_t x = 0; x < net.grid_width(); ++x) {
        const auto e = net.policy_at(x, y, o_emp);
        w.row({cell(x), cell(y), cell(o_emp), cell(e.action),
               cell(std::string(action_name(Action(e.action)))),
               cell(e.weight)});
      }
}

inline void write_sweep_csv(const std::string& path, const SweepResult& res) {
  CsvWriter w(path);
  w.row({"point", "proportion", "fe_percent", "altruistic_per_window",
         "mean_cost", "mean_relief_da", "preference"});
  for (const auto& p : res.points)
    w.row({cell(p.index), cell(p.proportion), cell(p.level.fe_percent),
           cell(p.run.converged_altruistic), cell(p.run.mean_cost),
           cell(p.run.mean_relief_da), cell(p.run.preference)});
}

inline void write_correlation_csv(const std::string& path,
                                  const Correlation& c, const std::string& xs,
                                  const std::string& ys) {
  CsvWriter w(path);
  w.row({"xs", "ys", "n", "computable", "r", "p"});
  if (c.computable)
    w.row({xs, ys, cell(c.n), "1", cell(c.r), cell(c.p)});
  else
    w.row({xs, ys, cell(c.n), "0", "not-computable", "not-computable"});
}

inline void write_firing_csv(const std::string& path, const SweepResult& res) {
  CsvWriter w(path);
  w.row({"point", "fe_percent", "emotion_rate", "mirror_rate", "weight_sum",
         "peak_relief_da"});
  for (const auto& p : res.points)
    w.row({cell(p.index), cell(p.level.fe_percent), cell(p.run.red.emotion_rate),
           cell(p.run.red.mirror_rate), cell(p.run.weight_sum),
           cell(p.run.peak_relief_da)});
}

inline void write_preference_csv(const std::string& path,
                                 const SweepResult& res) {
  CsvWriter w(path);
  w.row({"point", "fe_percent", "mean_relief_da", "r_self_task", "preference"});
  for (const auto& p : res.points)
    w.row({cell(p.index), cell(p.level.fe_percent), cell(p.run.mean_relief_da),
           cell(kGoalReward), cell(p.run.preference)});
}

inline void write_calibration_csv(const std::string& path,
                                  const std::vector<EmpathyLevel>& table) {
  CsvWriter w(path);
  w.row({"proportion", "rate", "fe_percent"});
  for (const auto& l : table)
    w.row({cell(l.proportion), cell(l.rate), cell(l.fe_percent)});
}

inline void write_distance_csv(const std::string& path,
                               const std::vector<DistanceRow>& table) {
  CsvWriter w(path);
  w.row({"band_lo", "band_hi", "distance", "episodes", "altruistic",
         "altruistic_per_window"});
  for (const auto& row : table)
    for (const auto& c : row.cells)
      w.row({cell(row.band.lo), cell(row.band.hi), cell(c.distance),
             cell(c.episodes), cell(c.altruistic),
             cell(c.altruistic_per_window)});
}

inline void write_scenario_file(const std::string& path, const Scenario& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw HarnessError("artifacts: cannot write '" + path + "'");
  out << serialize_scenario(s);
}

// Run manifest: everything needed to reproduce the run byte-for-byte. The
// embedded canonical config plus the command parameters fully determine it.
inline nlohmann::json make_manifest(const ExperimentConfig& cfg,
                                    const std::string& command,
                                    const nlohmann::json& params,
                                    const std::vector<std::string>& artifacts) {
  nlohmann::json j;
  j["format"] = "esnn-run-manifest";
  j["version"] = kSnapshotFormatVersion;
  j["tool_version"] = kToolVersion;
  j["command"] = command;
  j["params"] = params;
  j["seed"] = cfg.seed;
  j["config_hash"] = config_hash(cfg);
  j["config"] = canonical_config_text(cfg);
  j["artifacts"] = artifacts;
  return j;
}

inline void write_manifest(const std::string& dir, const nlohmann::json& j) {
  const std::string path = dir + "/manifest.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw HarnessError("artifacts: cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw HarnessError("artifacts: write failed for '" + path + "'");
}

}  // namespace esnn
