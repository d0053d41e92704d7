#pragma once
// Dopamine reward-prediction-error machinery.
//
// A small dopamine population fires at a tonic baseline rate set by a
// constant drive. Negative-emotion neurons project uniform inhibitory
// synapses onto it, so empathic distress suppresses the dopamine rate. The
// measured rate is normalized by the uninhibited baseline, giving
// S in [0, 1]: silent emotion input reads 1, full empathic distress reads
// near 0. Normalization keeps the intrinsic reward alpha * (S - P)
// commensurate with the task reward.
//
// The running predictor P tracks S with learning rate beta; each update
// returns the intrinsic reward alpha * (S - P) and shrinks the prediction
// error by exactly (1 - beta). P is initialized once per run, not per
// episode, so distress onsets yield negative surprises and reliefs yield
// positive ones.
//
// Measurement windows are stateless (fresh population each call), so the
// rate for a fixed emotion spike pattern is deterministic and cacheable.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "esnn/lif.hpp"
#include "esnn/plasticity.hpp"
#include "esnn/rng.hpp"

namespace esnn {

struct RpeParams {
  double alpha = 30.0;  // intrinsic-reward gain
  double beta = 0.2;    // prediction learning rate
};

class RpePredictor {
 public:
  explicit RpePredictor(RpeParams params = {}) : params_(params) {
    if (params_.beta < 0.0 || params_.beta > 1.0)
      throw std::invalid_argument("rpe: beta outside [0,1]");
  }

  double prediction() const { return prediction_; }
  const RpeParams& params() const { return params_; }

  // Returns the intrinsic reward alpha * (s - P) and moves P toward s.
  double update(double s) {
    if (!std::isfinite(s)) throw std::invalid_argument("rpe: non-finite rate");
    const double delta = s - prediction_;
    prediction_ += params_.beta * delta;
    return params_.alpha * delta;
  }

  void reset() { prediction_ = 0.0; }
  void set_prediction(double p) { prediction_ = p; }  // snapshot restore

 private:
  RpeParams params_;
  double prediction_ = 0.0;
};

struct DopamineConfig {
  LifParams lif;
  std::size_t n_neurons = 20;
  std::size_t n_emotion_inputs = 20;  // negative-emotion group size
  double baseline_drive = 1.46;       // tonic current, ~40 Hz uninhibited
  double drive_jitter = 0.15;         // per-neuron spread; grades suppression
  double w_inhib = 0.015;             // inhibitory weight per emotion synapse
  double syn_gain = 1.0;
  double tau_syn = 20.0;              // ms; integrates across emotion volleys
  int window = 200;                   // ms, one decision step
  // Rate is read from [transient_skip, window): the empathy cascade needs
  // tens of ms to ignite, so the early window reflects pre-cue baseline
  // firing, not the suppressed steady state. Baseline uses the same span.
  int transient_skip = 100;           // ms
};

class DopamineCircuit {
 public:
  DopamineCircuit(DopamineConfig cfg, std::uint64_t seed)
      : cfg_(cfg),
        w_emotion_da_(SynapseMatrix::inhibitory(cfg.n_emotion_inputs,
                                                cfg.n_neurons, -cfg.w_inhib,
                                                -5.0)) {
    if (cfg_.n_neurons == 0) throw std::invalid_argument("da: empty population");
    RngStream rng(split_seed(seed, "dopamine-jitter"));
    jitter_.resize(cfg_.n_neurons);
    for (auto& j : jitter_) j = 1.0 + cfg_.drive_jitter * rng.uniform(-1.0, 1.0);
    baseline_rate_ = raw_rate({});
    if (baseline_rate_ <= 0.0)
      throw std::invalid_argument("da: baseline drive leaves population silent");
  }

  const DopamineConfig& config() const { return cfg_; }
  double baseline_rate() const { return baseline_rate_; }  // spikes/ms
  const SynapseMatrix& w_emotion_da() const { return w_emotion_da_; }

  // Mean population rate (spikes/ms) under inhibition replayed from the
  // given negative-emotion spike trains (times within [0, window)).
  double raw_rate(const std::vector<SpikeTrain>& emotion_trains) const {
    if (emotion_trains.size() > cfg_.n_emotion_inputs)
      throw std::invalid_argument("da: more emotion trains than inputs");
    // Emotion spikes are timestamped at integer multiples of dt; bucket
    // them per tick so each spike starts inhibiting on the following tick.
    std::vector<std::vector<std::size_t>> at_tick(std::size_t(cfg_.window));
    for (std::size_t i = 0; i < emotion_trains.size(); ++i) {
      for (double t : emotion_trains[i].times) {
        const auto tick = std::size_t(t / cfg_.lif.dt + 0.5);
        if (tick < at_tick.size()) at_tick[tick].push_back(i);
      }
    }
    if (cfg_.transient_skip < 0 || cfg_.transient_skip >= cfg_.window)
      throw std::invalid_argument("da: transient skip outside window");
    LifPopulation pop(cfg_.n_neurons, cfg_.lif, /*population_id=*/0, nullptr);
    ExpSynCurrent inhib(cfg_.n_neurons, cfg_.tau_syn, cfg_.lif.dt);
    std::vector<double> input(cfg_.n_neurons);
    std::size_t spikes = 0;
    for (int t = 0; t < cfg_.window; ++t) {
      inhib.decay();
      for (auto i : at_tick[std::size_t(t)])
        inhib.deposit(w_emotion_da_, i, cfg_.syn_gain);
      for (std::size_t i = 0; i < cfg_.n_neurons; ++i)
        input[i] = cfg_.baseline_drive * jitter_[i];
      inhib.add_to(input);
      const auto n = pop.step(input).size();
      if (t >= cfg_.transient_skip) spikes += n;
    }
    return double(spikes) / double(cfg_.n_neurons) /
           double(cfg_.window - cfg_.transient_skip);
  }

  // Baseline-normalized rate S in [0, 1].
  double measure(const std::vector<SpikeTrain>& emotion_trains) const {
    const double s = raw_rate(emotion_trains) / baseline_rate_;
    return std::min(1.0, std::max(0.0, s));
  }

 private:
  DopamineConfig cfg_;
  SynapseMatrix w_emotion_da_;
  std::vector<double> jitter_;
  double baseline_rate_ = 0.0;
};

}  // namespace esnn
