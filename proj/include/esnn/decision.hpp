#pragma once
// Moral decision-making network.
//
// Place-coded state neurons (one per grid cell per empathy-flag layer) are
// fully connected to four action populations of identical LIF neurons. One
// environment step simulates one decision window: the active state neuron
// is driven continuously, its spikes excite the action populations through
// the learned weights, and the group with the most spikes is the selected
// action (ties broken uniformly from the caller's stream).
//
// Learning is reward-modulated: the window's state->action spike pairs are
// evaluated with the bidirectional pairing rule and folded into a per-
// synapse eligibility trace that decays once per environment step; the
// delayed moral reward then scales the trace into a weight update. Traces
// are zeroed at episode boundaries so credit never leaks across episodes.
//
// Exploration biases the vote instead of overriding it: an explored window
// injects extra drive into one group, so the executed action always matches
// the activity pattern the eligibility trace records.
//
// The state drive is kept below the action-population operating point: a
// more active postsynaptic group forms potentiation-dominant pair sums, so
// step costs depress recently used synapses and rewards potentiate them.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "esnn/lif.hpp"
#include "esnn/plasticity.hpp"
#include "esnn/rng.hpp"

namespace esnn {

struct MoralReward {
  double r_self_task = 0.0;
  double da_in_emp = 0.0;
  double r_moral = 0.0;  // always r_self_task + da_in_emp
};

inline MoralReward make_moral_reward(double r_self_task, double da_in_emp) {
  return {r_self_task, da_in_emp, r_self_task + da_in_emp};
}

struct DecisionConfig {
  LifParams lif;
  PlasticityParams plasticity;      // bidirectional pairing for deposits
  std::size_t neurons_per_action = 50;
  int window = 200;                 // ms per environment step
  double state_drive = 2.0;         // constant drive on the active state neuron
  double explore_drive = 4.0;       // extra drive on a boosted action group
  double w_init = 0.5;
  double w_jitter = 0.05;           // uniform +- on initial weights
  // The ceiling leaves headroom above the largest single reward update
  // (peak reward x fresh trace), so repeated rewards keep weights graded
  // instead of pinning every recently used synapse to the same value.
  double w_max = 15.0;
  double tau_syn = 5.0;             // ms
  double syn_gain = 3.0;            // current per unit weight per state spike
  // Tonic per-neuron bias on action neurons (uniform +-). The operating
  // point sits near threshold, so heterogeneous biases turn weight
  // differences into graded spike-count differences instead of lockstep
  // all-or-none volleys.
  double action_bias = 0.6;
  // Winner-take-all coupling: each group is inhibited by its rivals' spikes
  // (exponentially filtered like the feedforward synapses). The leading
  // population suppresses the others, so the executed action dominates the
  // window's activity and therefore the eligibility deposits.
  double wta_inhib = 0.15;
  double trace_retention = 0.982;   // eligibility kept per environment step
  double deposit_gain = 0.01;       // pair-sum scale folded into the trace
};

struct WindowResult {
  std::size_t state_index = 0;
  int action = 0;                        // selected group
  std::array<int, 4> counts{};           // spikes per group
  SpikeTrain state_train;                // window-relative times
  std::vector<SpikeTrain> action_trains; // all action neurons
};

class DecisionNetwork {
 public:
  static constexpr int kActions = 4;

  DecisionNetwork(DecisionConfig cfg, std::size_t grid_width,
                  std::size_t grid_height, std::uint64_t seed)
      : cfg_(cfg),
        width_(grid_width),
        height_(grid_height),
        w_dm_(SynapseMatrix::excitatory(grid_width * grid_height * 2,
                                        std::size_t(kActions) * cfg.neurons_per_action,
                                        cfg.w_init, cfg.w_max)),
        trace_(w_dm_.values().size(), 0.0) {
    if (width_ == 0 || height_ == 0 || cfg_.neurons_per_action == 0)
      throw std::invalid_argument("decision: empty geometry");
    RngStream rng(split_seed(seed, "decision-weights"));
    w_dm_.jitter(cfg_.w_jitter, rng);
    RngStream bias_rng(split_seed(seed, "decision-bias"));
    bias_.resize(n_action_neurons());
    for (auto& b : bias_) b = cfg_.action_bias * bias_rng.uniform(-1.0, 1.0);
  }

  const DecisionConfig& config() const { return cfg_; }
  std::size_t grid_width() const { return width_; }
  std::size_t grid_height() const { return height_; }
  std::size_t n_states() const { return width_ * height_ * 2; }
  std::size_t n_action_neurons() const {
    return std::size_t(kActions) * cfg_.neurons_per_action;
  }
  const SynapseMatrix& weights() const { return w_dm_; }
  SynapseMatrix& weights_mut() { return w_dm_; }

  // State layout: cell-major within a layer, empathy layer stacked above.
  std::size_t encode_state(std::size_t x, std::size_t y, int o_emp) const {
    if (x >= width_ || y >= height_)
      throw std::out_of_range("decision: state coordinates outside grid");
    if (o_emp != 0 && o_emp != -1)
      throw std::invalid_argument("decision: empathy flag must be 0 or -1");
    return y * width_ + x + (o_emp == -1 ? width_ * height_ : 0u);
  }

  // Argmax over group spike counts; ties broken uniformly. Scaling all
  // counts by a positive constant preserves the tie-set and the choice.
  static int pick_action(const std::array<int, 4>& counts, RngStream& rng) {
    int best = counts[0];
    for (int c : counts) best = std::max(best, c);
    std::array<int, 4> tied{};
    std::size_t n_tied = 0;
    for (int g = 0; g < 4; ++g)
      if (counts[std::size_t(g)] == best) tied[n_tied++] = g;
    return n_tied == 1 ? tied[0] : tied[rng.uniform_index(n_tied)];
  }

  // Simulates one decision window. The stream is consumed only to break
  // exact count ties; `boost` injects exploration drive into one group.
  WindowResult select_action(std::size_t x, std::size_t y, int o_emp,
                             RngStream& rng,
                             std::optional<int> boost = std::nullopt) const {
    if (boost && (*boost < 0 || *boost >= kActions))
      throw std::invalid_argument("decision: boost group out of range");
    WindowResult r;
    r.state_index = encode_state(x, y, o_emp);

    LifPopulation state(1, cfg_.lif, /*population_id=*/0, nullptr);
    LifPopulation actions(n_action_neurons(), cfg_.lif, 1, nullptr);
    ExpSynCurrent syn(n_action_neurons(), cfg_.tau_syn, cfg_.lif.dt);
    std::vector<double> in_state(1), in_actions(n_action_neurons());
    std::array<double, kActions> rivals{};  // filtered rival spike counts
    const double rival_decay = std::exp(-cfg_.lif.dt / cfg_.tau_syn);
    for (int t = 0; t < cfg_.window; ++t) {
      syn.decay();
      for (std::size_t i = 0; i < in_actions.size(); ++i)
        in_actions[i] = bias_[i] -
                        cfg_.wta_inhib * rivals[i / cfg_.neurons_per_action];
      syn.add_to(in_actions);
      if (boost) {
        const std::size_t base = std::size_t(*boost) * cfg_.neurons_per_action;
        for (std::size_t i = 0; i < cfg_.neurons_per_action; ++i)
          in_actions[base + i] += cfg_.explore_drive;
      }
      in_state[0] = cfg_.state_drive;
      const bool state_fired = !state.step(in_state).empty();
      const auto& fired = actions.step(in_actions);
      std::array<int, kActions> tick_counts{};
      for (const std::size_t idx : fired)
        ++tick_counts[idx / cfg_.neurons_per_action];
      int tick_total = 0;
      for (const int c : tick_counts) tick_total += c;
      for (int g = 0; g < kActions; ++g) {
        rivals[std::size_t(g)] *= rival_decay;
        rivals[std::size_t(g)] += tick_total - tick_counts[std::size_t(g)];
      }
      if (state_fired) syn.deposit(w_dm_, r.state_index, cfg_.syn_gain);
    }

    r.state_train = state.trains()[0];
    r.action_trains = actions.trains();
    for (int g = 0; g < kActions; ++g) {
      int total = 0;
      const std::size_t base = std::size_t(g) * cfg_.neurons_per_action;
      for (std::size_t i = 0; i < cfg_.neurons_per_action; ++i)
        total += int(r.action_trains[base + i].times.size());
      r.counts[std::size_t(g)] = total;
    }
    r.action = pick_action(r.counts, rng);
    return r;
  }

  // Decays every eligibility element by the per-step retention, then folds
  // in the window's signed state->action pair sums.
  void fold_trace(const WindowResult& r) {
    for (auto& e : trace_) e *= cfg_.trace_retention;
    const std::size_t cols = n_action_neurons();
    for (std::size_t j = 0; j < cols; ++j) {
      const double d =
          stdp_bidirectional(r.state_train, r.action_trains[j], cfg_.plasticity);
      if (d != 0.0)
        trace_[r.state_index * cols + j] += cfg_.deposit_gain * d;
    }
  }

  // Applies the delayed reward to every eligible synapse.
  void learn(const MoralReward& reward) {
    if (reward.r_moral != reward.r_self_task + reward.da_in_emp)
      throw std::invalid_argument("decision: moral reward identity violated");
    apply_reward(w_dm_, reward.r_moral, trace_);
  }

  void begin_episode() { std::fill(trace_.begin(), trace_.end(), 0.0); }

  const std::vector<double>& trace() const { return trace_; }
  double max_abs_trace() const {
    double m = 0.0;
    for (double e : trace_) m = std::max(m, std::abs(e));
    return m;
  }

  // Mean weight from one state onto one action group.
  double group_weight(std::size_t state_index, int group) const {
    const std::size_t base = std::size_t(group) * cfg_.neurons_per_action;
    double s = 0.0;
    for (std::size_t i = 0; i < cfg_.neurons_per_action; ++i)
      s += w_dm_.at(state_index, base + i);
    return s / double(cfg_.neurons_per_action);
  }

  struct PolicyEntry {
    int action = 0;
    double weight = 0.0;  // mean weight of the winning group
  };

  // Greedy per-state readout: the group with the largest mean weight.
  PolicyEntry policy_at(std::size_t x, std::size_t y, int o_emp) const {
    const std::size_t s = encode_state(x, y, o_emp);
    PolicyEntry best{0, group_weight(s, 0)};
    for (int g = 1; g < kActions; ++g) {
      const double w = group_weight(s, g);
      if (w > best.weight) best = {g, w};
    }
    return best;
  }

 private:
  DecisionConfig cfg_;
  std::size_t width_, height_;
  SynapseMatrix w_dm_;
  std::vector<double> trace_;
  std::vector<double> bias_;
};

}  // namespace esnn
