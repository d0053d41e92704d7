#pragma once
// Spike-pairing plasticity rules, eligibility traces, and bounded synapse
// matrices.
//
// Pair convention used throughout: dt = t_pre - t_post. Causal pairs (pre
// fires first, dt < 0) potentiate with A+ * exp(dt / tau+); acausal pairs
// (dt > 0) depress with A- * exp(-dt / tau-); dt == 0 contributes nothing.
// The potentiation-only rule drops the depression branch.
//
// Default pairing is nearest-neighbor: each post spike pairs with the most
// recent earlier pre spike, and (for the bidirectional rule) each pre spike
// pairs with the most recent earlier post spike. All-to-all pairing over the
// window is available as a configuration option.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "esnn/lif.hpp"
#include "esnn/rng.hpp"

namespace esnn {

struct PlasticityParams {
  double a_plus = 0.5;
  double a_minus = 0.45;
  double tau_plus = 20.0;   // ms
  double tau_minus = 20.0;  // ms
  bool all_to_all = false;  // nearest-neighbor pairing when false
};

inline double stdp_potentiation(double dt, const PlasticityParams& p) {
  return dt < 0.0 ? p.a_plus * std::exp(dt / p.tau_plus) : 0.0;
}

// Signed pair contribution of the bidirectional rule.
inline double stdp_pair_delta(double dt, const PlasticityParams& p) {
  if (dt < 0.0) return p.a_plus * std::exp(dt / p.tau_plus);
  if (dt > 0.0) return -p.a_minus * std::exp(-dt / p.tau_minus);
  return 0.0;
}

// Latest element of `times` strictly before t, or -1 if none.
inline int latest_before(const std::vector<double>& times, double t) {
  auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return -1;
  return static_cast<int>(it - times.begin()) - 1;
}

// Potentiation-only update: sums A+ * exp((t_pre - t_post)/tau+) over causal
// pairs. Used by the self-experience training of the empathy circuit.
inline double ltp_update(const SpikeTrain& pre, const SpikeTrain& post,
                         const PlasticityParams& p) {
  double sum = 0.0;
  if (p.all_to_all) {
    for (double tj : post.times)
      for (double ti : pre.times)
        if (ti < tj) sum += stdp_potentiation(ti - tj, p);
  } else {
    for (double tj : post.times) {
      const int i = latest_before(pre.times, tj);
      if (i >= 0) sum += stdp_potentiation(pre.times[i] - tj, p);
    }
  }
  return sum;
}

// Bidirectional update: signed sum over causal (potentiating) and acausal
// (depressing) pairs.
inline double stdp_bidirectional(const SpikeTrain& pre, const SpikeTrain& post,
                                 const PlasticityParams& p) {
  double sum = 0.0;
  if (p.all_to_all) {
    for (double tj : post.times)
      for (double ti : pre.times) sum += stdp_pair_delta(ti - tj, p);
    return sum;
  }
  for (double tj : post.times) {
    const int i = latest_before(pre.times, tj);
    if (i >= 0) sum += stdp_pair_delta(pre.times[i] - tj, p);
  }
  for (double ti : pre.times) {
    const int j = latest_before(post.times, ti);
    if (j >= 0) sum += stdp_pair_delta(ti - post.times[j], p);
  }
  return sum;
}

// ---- eligibility trace ----

struct EligibilityParams {
  double tau_e = 10.0;  // decay constant, in units of the caller's clock
  bool exact = false;   // exact exponential decay instead of explicit Euler
};

// One update of de/dt = -e/tau_e + input, advanced by dt.
inline double eligibility_update(double e, double stdp_input, double dt,
                                 const EligibilityParams& p) {
  if (dt <= 0.0 || p.tau_e <= 0.0)
    throw std::invalid_argument("eligibility: dt and tau_e must be positive");
  const double keep =
      p.exact ? std::exp(-dt / p.tau_e) : 1.0 - dt / p.tau_e;
  if (keep < 0.0)
    throw std::invalid_argument("eligibility: dt > tau_e under Euler decay");
  return e * keep + stdp_input;
}

// ---- bounded synapse matrix ----

// Dense pre-major weight matrix with hard bounds. Excitatory matrices clip
// to [0, w_max]; inhibitory ones to [w_min, 0].
class SynapseMatrix {
 public:
  SynapseMatrix(std::size_t n_pre, std::size_t n_post, double w0, double lo,
                double hi)
      : n_pre_(n_pre), n_post_(n_post), lo_(lo), hi_(hi),
        w_(n_pre * n_post, w0) {
    if (lo > hi) throw std::invalid_argument("synapse: lo > hi");
    clip_all();
  }

  static SynapseMatrix excitatory(std::size_t n_pre, std::size_t n_post,
                                  double w0, double w_max = 5.0) {
    return SynapseMatrix(n_pre, n_post, w0, 0.0, w_max);
  }

  static SynapseMatrix inhibitory(std::size_t n_pre, std::size_t n_post,
                                  double w0, double w_min = -5.0) {
    return SynapseMatrix(n_pre, n_post, w0, w_min, 0.0);
  }

  std::size_t n_pre() const { return n_pre_; }
  std::size_t n_post() const { return n_post_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  double at(std::size_t pre, std::size_t post) const {
    return w_[index(pre, post)];
  }

  void set(std::size_t pre, std::size_t post, double w) {
    w_[index(pre, post)] = clip(w);
  }

  void add(std::size_t pre, std::size_t post, double dw) {
    auto& w = w_[index(pre, post)];
    w = clip(w + dw);
  }

  // Adds per-neuron jitter drawn uniformly from [-j, +j] (then clipped).
  void jitter(double j, RngStream& rng) {
    for (auto& w : w_) w = clip(w + rng.uniform(-j, j));
  }

  const std::vector<double>& values() const { return w_; }
  std::vector<double>& values_mut() { return w_; }

  double row_sum(std::size_t pre) const {
    double s = 0.0;
    for (std::size_t j = 0; j < n_post_; ++j) s += at(pre, j);
    return s;
  }

  double total() const {
    double s = 0.0;
    for (double w : w_) s += w;
    return s;
  }

  double max_abs() const {
    double m = 0.0;
    for (double w : w_) m = std::max(m, std::abs(w));
    return m;
  }

  void clip_all() {
    for (auto& w : w_) w = clip(w);
  }

  std::size_t index(std::size_t pre, std::size_t post) const {
    if (pre >= n_pre_ || post >= n_post_)
      throw std::out_of_range("synapse: index out of range");
    return pre * n_post_ + post;
  }

  double clip(double w) const { return std::min(hi_, std::max(lo_, w)); }

 private:
  std::size_t n_pre_, n_post_;
  double lo_, hi_;
  std::vector<double> w_;
};

// Reward application w += r * e with clipping; trace shape must match.
inline void apply_reward(SynapseMatrix& w, double reward,
                         const std::vector<double>& trace) {
  if (trace.size() != w.values().size())
    throw std::invalid_argument("apply_reward: trace shape mismatch");
  auto& v = w.values_mut();
  for (std::size_t k = 0; k < v.size(); ++k)
    v[k] = w.clip(v[k] + reward * trace[k]);
}

// ---- current-based exponential synapses ----

// Per-target synaptic current bank: decays by exp(-dt/tau_syn) each step; a
// presynaptic spike adds gain * w(pre, post) to every target's accumulator.
class ExpSynCurrent {
 public:
  ExpSynCurrent(std::size_t n_target, double tau_syn, double dt)
      : decay_(std::exp(-dt / tau_syn)), i_(n_target, 0.0) {
    if (tau_syn <= 0.0) throw std::invalid_argument("synapse: tau_syn <= 0");
  }

  void decay() {
    for (double& x : i_) x *= decay_;
  }

  void deposit(const SynapseMatrix& w, std::size_t pre, double gain) {
    if (i_.size() != w.n_post())
      throw std::invalid_argument("synapse: target size mismatch");
    const auto& v = w.values();
    const std::size_t base = pre * w.n_post();
    for (std::size_t j = 0; j < i_.size(); ++j) i_[j] += gain * v[base + j];
  }

  void add_to(std::vector<double>& input) const {
    for (std::size_t j = 0; j < i_.size(); ++j) input[j] += i_[j];
  }

  void reset() { std::fill(i_.begin(), i_.end(), 0.0); }

  const std::vector<double>& currents() const { return i_; }

 private:
  double decay_;
  std::vector<double> i_;
};

}  // namespace esnn
