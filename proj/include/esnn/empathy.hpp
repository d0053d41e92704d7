#pragma once
// Mirror-pathway empathy circuit.
//
// Three regions (emotion, mirror, perception), each split into two category
// sub-groups (negative, normal) of identical LIF neurons. The four
// excitatory pathways emotion<->mirror and mirror<->perception start at a
// uniform sub-threshold weight and are learned with the potentiation-only
// pairing rule during staged self-experience trials: the emotion sub-group
// of the trial's category is driven from t=0, mirror from +100 ms,
// perception from +200 ms. Categories alternate across trials, so each
// category's pathway is learned while the other stays silent.
//
// An inhibitory input bank targets the emotion region: each emotion neuron
// owns a fixed number of synapse slots, and a proportion p of all slots is
// active (round-robin across neurons, so per-neuron counts differ by at
// most one). Each active slot contributes a constant negative current. The
// proportion applies during both training and inference and controls the
// empathy level F_e = measured negative-emotion rate under a red cue,
// expressed as a percentage of the uninhibited reference rate.
//
// Inference presents a cue: the matching perception sub-group is driven for
// the inference window and activity propagates through the learned
// pathways. The outward empathy signal o_emp is -1 when the negative
// emotion sub-group fires at or above a fixed fraction of the calibrated
// reference rate, else 0.
//
// Windows are stateless: every trial and every inference starts from rest.
// The emotion region's training drive is larger than the cue drive so the
// inhibition range spans both phases smoothly (the inference-time synaptic
// drive onto emotion sits far above threshold once the pathways saturate).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "esnn/env.hpp"
#include "esnn/lif.hpp"
#include "esnn/plasticity.hpp"
#include "esnn/rng.hpp"

namespace esnn {

enum class Region { emotion = 0, mirror = 1, perception = 2 };
enum class Category { negative = 0, normal = 1 };

struct EmpathyConfig {
  LifParams lif;
  PlasticityParams plasticity;           // potentiation side only is used
  std::size_t neurons_per_group = 20;    // per category per region
  double w_init = 0.05;
  double w_max = 5.0;
  double tau_syn = 5.0;                  // ms
  // Per-pathway synaptic gains (current per unit weight per spike). The
  // cue->perception->mirror->emotion chain dominates and the feedback legs
  // stay weak, so an empathized cue makes the emotion sub-group the loudest
  // in the net while the loop still locks all pathways during training.
  double gain_me = 0.6;    // mirror -> emotion
  double gain_pm = 0.06;   // perception -> mirror
  double gain_em = 0.005;  // emotion -> mirror feedback
  double gain_mp = 0.005;  // mirror -> perception feedback
  double drive_emotion = 20.0;           // self-experience drive, emotion region
  double drive_cue = 1.5;                // perception cue + mirror training drive
  double drive_jitter = 0.15;            // per-neuron multiplicative spread
  int trial_window = 300;                // ms
  int mirror_onset = 100;                // ms
  int perception_onset = 200;            // ms
  int trials = 50;
  int inference_window = 200;            // ms
  // Tonic per-neuron bias on the emotion region (uniform in +-emotion_bias,
  // applied in every phase). At inference the emotion neurons see identical
  // saturated synaptic input, so without a heterogeneous bias they silence
  // in clumps as inhibition rises instead of one by one.
  double emotion_bias = 0.5;
  std::size_t inhib_slots_per_neuron = 100;
  double inhib_strength = 0.25;          // current per active slot
  double detection_fraction = 0.2;       // o_emp = -1 at >= this * reference

  std::size_t region_size() const { return 2 * neurons_per_group; }
};

struct InferenceResult {
  int o_emp = 0;  // -1 empathized distress, 0 otherwise
  double emotion_negative_rate = 0.0;  // spikes/ms over the window
  double emotion_normal_rate = 0.0;
  double mirror_negative_rate = 0.0;
  double mirror_normal_rate = 0.0;
  double perception_negative_rate = 0.0;
  double perception_normal_rate = 0.0;
  double mirror_rate = 0.0;      // whole region
  double perception_rate = 0.0;  // whole region
  bool mirror_responded = false;
  std::string note;  // "ok", "no-mirror-response" or "uncalibrated"
  std::vector<SpikeTrain> emotion_trains;  // all emotion neurons
};

class EmpathyNetwork {
 public:
  EmpathyNetwork(EmpathyConfig cfg, std::uint64_t seed)
      : cfg_(cfg),
        w_em_(SynapseMatrix::excitatory(cfg.region_size(), cfg.region_size(),
                                        cfg.w_init, cfg.w_max)),
        w_me_(w_em_),
        w_mp_(w_em_),
        w_pm_(w_em_) {
    if (cfg_.neurons_per_group == 0)
      throw std::invalid_argument("empathy: empty groups");
    RngStream rng(split_seed(seed, "empathy-jitter"));
    for (auto* jit : {&jit_emotion_, &jit_mirror_, &jit_perception_}) {
      jit->resize(cfg_.region_size());
      for (auto& j : *jit)
        j = 1.0 + cfg_.drive_jitter * rng.uniform(-1.0, 1.0);
    }
    RngStream bias_rng(split_seed(seed, "empathy-bias"));
    bias_emotion_.resize(cfg_.region_size());
    for (auto& b : bias_emotion_)
      b = cfg_.emotion_bias * bias_rng.uniform(-1.0, 1.0);
  }

  const EmpathyConfig& config() const { return cfg_; }

  void set_inhibition_proportion(double p) {
    if (p < 0.0 || p > 1.0)
      throw std::invalid_argument("empathy: proportion outside [0,1]");
    proportion_ = p;
  }
  double inhibition_proportion() const { return proportion_; }

  // Active inhibitory slots fill one emotion neuron at a time, alternating
  // between the two categories so both are suppressed evenly. A neuron's
  // full slot bank outweighs even the strong self-experience drive, so the
  // proportion silences roughly that fraction of the region during training
  // as well as inference, and the learned weights shrink with it.
  std::vector<int> inhibition_counts() const {
    const std::size_t n = cfg_.region_size();
    const std::size_t per = cfg_.inhib_slots_per_neuron;
    auto active = std::size_t(proportion_ * double(n * per) + 1e-9);
    std::vector<int> counts(n, 0);
    const std::size_t half = cfg_.neurons_per_group;
    for (std::size_t k = 0; k < n && active > 0; ++k) {
      // 0, half, 1, half+1, ... : alternate negative/normal categories.
      const std::size_t idx = (k % 2 == 0) ? k / 2 : half + k / 2;
      const auto take = std::min<std::size_t>(per, active);
      counts[idx] = int(take);
      active -= take;
    }
    return counts;
  }

  bool trained() const { return trials_run_ > 0; }
  int trials_run() const { return trials_run_; }

  // Staged self-experience trials with alternating categories. Stops early
  // once a full cycle of both categories no longer changes any weight
  // (everything trainable has saturated against the bounds).
  void train_self_experience() {
    double cycle_delta = 0.0;
    for (int trial = 0; trial < cfg_.trials; ++trial) {
      const auto cat = Category(trial % 2);
      const double delta = run_training_trial(cat);
      cycle_delta = (trial % 2 == 0) ? delta : cycle_delta + delta;
      ++trials_run_;
      if (trial % 2 == 1 && trial >= 3 && cycle_delta < 1e-12) break;
    }
  }

  InferenceResult infer(Cue cue, SpikeLog* log = nullptr) const {
    InferenceResult r;
    const auto cat =
        cue == Cue::red ? Category::negative : Category::normal;
    Sim sim(*this, log);
    for (int t = 0; t < cfg_.inference_window; ++t)
      sim.tick(/*emotion_cat=*/std::nullopt, /*mirror_cat=*/std::nullopt,
               /*perception_cat=*/cat);
    const double t0 = 0.0, t1 = double(cfg_.inference_window);
    r.emotion_negative_rate = group_rate(sim.emotion.trains(), Category::negative, t0, t1);
    r.emotion_normal_rate = group_rate(sim.emotion.trains(), Category::normal, t0, t1);
    r.mirror_negative_rate = group_rate(sim.mirror.trains(), Category::negative, t0, t1);
    r.mirror_normal_rate = group_rate(sim.mirror.trains(), Category::normal, t0, t1);
    r.perception_negative_rate = group_rate(sim.perception.trains(), Category::negative, t0, t1);
    r.perception_normal_rate = group_rate(sim.perception.trains(), Category::normal, t0, t1);
    r.mirror_rate = population_rate(sim.mirror.trains(), t0, t1);
    r.perception_rate = population_rate(sim.perception.trains(), t0, t1);
    r.mirror_responded = r.mirror_rate > 0.0;
    r.emotion_trains = sim.emotion.trains();
    if (!r.mirror_responded) {
      r.note = "no-mirror-response";
    } else if (detection_baseline_ <= 0.0) {
      r.note = "uncalibrated";
    } else {
      r.note = "ok";
      if (r.emotion_negative_rate >=
          cfg_.detection_fraction * detection_baseline_)
        r.o_emp = -1;
    }
    return r;
  }

  void set_detection_baseline(double rate) { detection_baseline_ = rate; }
  double detection_baseline() const { return detection_baseline_; }

  const SynapseMatrix& w_emotion_mirror() const { return w_em_; }
  const SynapseMatrix& w_mirror_emotion() const { return w_me_; }
  const SynapseMatrix& w_mirror_perception() const { return w_mp_; }
  const SynapseMatrix& w_perception_mirror() const { return w_pm_; }
  SynapseMatrix& w_emotion_mirror_mut() { return w_em_; }
  SynapseMatrix& w_mirror_emotion_mut() { return w_me_; }
  SynapseMatrix& w_mirror_perception_mut() { return w_mp_; }
  SynapseMatrix& w_perception_mirror_mut() { return w_pm_; }

  // Sum of weights inside one category block of a pathway matrix.
  double block_sum(const SynapseMatrix& w, Category pre, Category post) const {
    const std::size_t n = cfg_.neurons_per_group;
    const std::size_t pi = std::size_t(pre) * n, pj = std::size_t(post) * n;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) s += w.at(pi + i, pj + j);
    return s;
  }

  double group_rate(const std::vector<SpikeTrain>& trains, Category cat,
                    double t0, double t1) const {
    const std::size_t n = cfg_.neurons_per_group;
    const std::size_t base = std::size_t(cat) * n;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      total += double(count_in_window(trains[base + i], t0, t1));
    return total / double(n) / (t1 - t0);
  }

  void set_trials_run(int n) { trials_run_ = n; }  // snapshot restore

 private:
  // One network simulation with fresh populations; drives are per-region
  // optional categories (the driven sub-group receives the region's drive).
  struct Sim {
    const EmpathyNetwork& net;
    LifPopulation emotion, mirror, perception;
    ExpSynCurrent cur_em, cur_me, cur_mp, cur_pm;
    std::vector<double> in_e, in_m, in_p;
    std::vector<int> inhib;

    explicit Sim(const EmpathyNetwork& n, SpikeLog* log)
        : net(n),
          emotion(n.cfg_.region_size(), n.cfg_.lif, int(Region::emotion), log),
          mirror(n.cfg_.region_size(), n.cfg_.lif, int(Region::mirror), log),
          perception(n.cfg_.region_size(), n.cfg_.lif, int(Region::perception), log),
          cur_em(n.cfg_.region_size(), n.cfg_.tau_syn, n.cfg_.lif.dt),
          cur_me(n.cfg_.region_size(), n.cfg_.tau_syn, n.cfg_.lif.dt),
          cur_mp(n.cfg_.region_size(), n.cfg_.tau_syn, n.cfg_.lif.dt),
          cur_pm(n.cfg_.region_size(), n.cfg_.tau_syn, n.cfg_.lif.dt),
          in_e(n.cfg_.region_size()),
          in_m(n.cfg_.region_size()),
          in_p(n.cfg_.region_size()),
          inhib(n.inhibition_counts()) {}

    void drive_group(std::vector<double>& in, std::optional<Category> cat,
                     double amount, const std::vector<double>& jit) {
      if (!cat) return;
      const std::size_t n = net.cfg_.neurons_per_group;
      const std::size_t base = std::size_t(*cat) * n;
      for (std::size_t i = 0; i < n; ++i)
        in[base + i] += amount * jit[base + i];
    }

    void tick(std::optional<Category> emotion_cat,
              std::optional<Category> mirror_cat,
              std::optional<Category> perception_cat) {
      cur_em.decay();
      cur_me.decay();
      cur_mp.decay();
      cur_pm.decay();
      std::fill(in_e.begin(), in_e.end(), 0.0);
      std::fill(in_m.begin(), in_m.end(), 0.0);
      std::fill(in_p.begin(), in_p.end(), 0.0);
      drive_group(in_e, emotion_cat, net.cfg_.drive_emotion, net.jit_emotion_);
      drive_group(in_m, mirror_cat, net.cfg_.drive_cue, net.jit_mirror_);
      drive_group(in_p, perception_cat, net.cfg_.drive_cue, net.jit_perception_);
      cur_me.add_to(in_e);
      cur_em.add_to(in_m);
      cur_pm.add_to(in_m);
      cur_mp.add_to(in_p);
      for (std::size_t i = 0; i < in_e.size(); ++i)
        in_e[i] += net.bias_emotion_[i] -
                   double(inhib[i]) * net.cfg_.inhib_strength;

      const auto& fe = emotion.step(in_e);
      const auto& fm = mirror.step(in_m);
      const auto& fp = perception.step(in_p);
      for (auto i : fe) cur_em.deposit(net.w_em_, i, net.cfg_.gain_em);
      for (auto i : fm) {
        cur_me.deposit(net.w_me_, i, net.cfg_.gain_me);
        cur_mp.deposit(net.w_mp_, i, net.cfg_.gain_mp);
      }
      for (auto i : fp) cur_pm.deposit(net.w_pm_, i, net.cfg_.gain_pm);
    }
  };

  // Runs one staged trial and applies the potentiation rule to all four
  // pathways; returns the largest absolute weight change.
  double run_training_trial(Category cat) {
    Sim sim(*this, nullptr);
    for (int t = 0; t < cfg_.trial_window; ++t) {
      const bool m_on = t >= cfg_.mirror_onset;
      const bool p_on = t >= cfg_.perception_onset;
      sim.tick(cat, m_on ? std::optional<Category>(cat) : std::nullopt,
               p_on ? std::optional<Category>(cat) : std::nullopt);
    }
    double max_delta = 0.0;
    max_delta = std::max(max_delta, apply_ltp(w_em_, sim.emotion.trains(), sim.mirror.trains()));
    max_delta = std::max(max_delta, apply_ltp(w_me_, sim.mirror.trains(), sim.emotion.trains()));
    max_delta = std::max(max_delta, apply_ltp(w_mp_, sim.mirror.trains(), sim.perception.trains()));
    max_delta = std::max(max_delta, apply_ltp(w_pm_, sim.perception.trains(), sim.mirror.trains()));
    return max_delta;
  }

  double apply_ltp(SynapseMatrix& w, const std::vector<SpikeTrain>& pre,
                   const std::vector<SpikeTrain>& post) {
    double max_delta = 0.0;
    for (std::size_t i = 0; i < pre.size(); ++i) {
      if (pre[i].times.empty()) continue;
      for (std::size_t j = 0; j < post.size(); ++j) {
        if (post[j].times.empty()) continue;
        const double dw = ltp_update(pre[i], post[j], cfg_.plasticity);
        if (dw == 0.0) continue;
        const double before = w.at(i, j);
        w.add(i, j, dw);
        max_delta = std::max(max_delta, std::abs(w.at(i, j) - before));
      }
    }
    return max_delta;
  }

  EmpathyConfig cfg_;
  SynapseMatrix w_em_, w_me_, w_mp_, w_pm_;
  std::vector<double> jit_emotion_, jit_mirror_, jit_perception_;
  std::vector<double> bias_emotion_;
  double proportion_ = 0.0;
  double detection_baseline_ = 0.0;
  int trials_run_ = 0;
};

// ---- empathy-level calibration ----

struct EmpathyLevel {
  double proportion = 0.0;
  double rate = 0.0;        // red-cue negative-emotion rate, spikes/ms
  double fe_percent = 0.0;  // 100 * rate / reference rate
};

// Sets the proportion on a network trained under it, measures the red-cue
// negative-emotion rate, stores the detection baseline, and returns the
// empathy level relative to the given uninhibited reference rate.
inline EmpathyLevel calibrate_empathy_level(EmpathyNetwork& net,
                                            double proportion,
                                            double reference_rate) {
  if (reference_rate <= 0.0)
    throw std::invalid_argument("calibrate: reference rate must be positive");
  net.set_inhibition_proportion(proportion);
  net.set_detection_baseline(reference_rate);
  const auto r = net.infer(Cue::red);
  EmpathyLevel lvl;
  lvl.proportion = proportion;
  lvl.rate = r.emotion_negative_rate;
  lvl.fe_percent = 100.0 * r.emotion_negative_rate / reference_rate;
  return lvl;
}

// Builds seed-deterministic networks trained under each probed proportion
// (inhibition shapes learning, so every probe retrains from scratch) and
// measures them against the shared uninhibited reference.
class EmpathyCalibrator {
 public:
  EmpathyCalibrator(EmpathyConfig cfg, std::uint64_t seed)
      : cfg_(cfg), seed_(seed) {}

  EmpathyNetwork trained_network(double proportion) const {
    EmpathyNetwork net(cfg_, seed_);
    net.set_inhibition_proportion(proportion);
    net.train_self_experience();
    return net;
  }

  double reference_rate() {
    if (reference_rate_ < 0.0) {
      EmpathyNetwork net = trained_network(0.0);
      const auto r = net.infer(Cue::red);
      if (r.emotion_negative_rate <= 0.0)
        throw std::runtime_error("calibrate: uninhibited circuit is silent");
      reference_rate_ = r.emotion_negative_rate;
    }
    return reference_rate_;
  }

  EmpathyLevel measure(double proportion) {
    const auto it = cache_.find(proportion);
    if (it != cache_.end()) return it->second;
    EmpathyNetwork net = trained_network(proportion);
    const auto lvl = calibrate_empathy_level(net, proportion, reference_rate());
    cache_.emplace(proportion, lvl);
    return lvl;
  }

  // Inclusive grid over [0, 1].
  std::vector<EmpathyLevel> table(int n_points) {
    if (n_points < 2) throw std::invalid_argument("calibrate: need >= 2 points");
    std::vector<EmpathyLevel> out;
    out.reserve(std::size_t(n_points));
    for (int k = 0; k < n_points; ++k)
      out.push_back(measure(double(k) / double(n_points - 1)));
    return out;
  }

  // Bisection on the monotone proportion -> F_e map.
  double proportion_for_fe(double fe_target, double tol = 0.5) {
    if (fe_target <= 0.0 || fe_target > 100.0)
      throw std::invalid_argument("calibrate: F_e target outside (0, 100]");
    double lo = 0.0, hi = 1.0;  // F_e(lo) = 100 >= target >= F_e(hi)
    if (measure(hi).fe_percent >= fe_target) return hi;
    for (int it = 0; it < 22; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fe = measure(mid).fe_percent;
      if (std::abs(fe - fe_target) <= tol) return mid;
      (fe > fe_target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

 private:
  EmpathyConfig cfg_;
  std::uint64_t seed_;
  double reference_rate_ = -1.0;
  std::map<double, EmpathyLevel> cache_;
};

}  // namespace esnn
