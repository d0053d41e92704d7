#pragma once
// Clock-driven leaky integrate-and-fire populations, explicit Euler:
//
//   tau_m * dV/dt = -(V - v_rest) + I        (input resistance folded into I)
//
// A step advances every neuron by dt and records threshold crossings. Spikes
// are timestamped with the end of the step in which they occur, so the first
// possible spike time is dt. During the absolute refractory period the
// membrane holds at v_reset and input is ignored.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "esnn/csv.hpp"

namespace esnn {

struct LifParams {
  double tau_m = 20.0;      // ms
  double v_rest = 0.0;
  double v_threshold = 1.0;
  double v_reset = 0.0;
  double refractory = 2.0;  // ms
  double dt = 1.0;          // ms
};

// Per-neuron spike record; times are strictly increasing.
struct SpikeTrain {
  std::size_t neuron = 0;
  std::vector<double> times;
};

struct SpikeEvent {
  double time_ms = 0.0;
  int population = 0;
  std::size_t neuron = 0;
};

// Flat event log shared by all populations of a simulation; row order is the
// order spikes were recorded, which is deterministic.
class SpikeLog {
 public:
  void record(double t, int population, std::size_t neuron) {
    events_.push_back({t, population, neuron});
  }

  const std::vector<SpikeEvent>& events() const { return events_; }

  void write_csv(const std::string& path) const {
    CsvWriter w(path);
    w.row({"time_ms", "population_id", "neuron_index"});
    for (const auto& e : events_)
      w.row({cell(e.time_ms), cell(e.population), cell(e.neuron)});
  }

 private:
  std::vector<SpikeEvent> events_;
};

class LifPopulation {
 public:
  LifPopulation(std::size_t n, LifParams params = {}, int population_id = 0,
                SpikeLog* log = nullptr)
      : params_(params),
        id_(population_id),
        log_(log),
        v_(n, params.v_rest),
        refr_until_(n, -1.0),
        last_spike_(n, -1.0),
        trains_(n) {
    if (params_.dt <= 0.0 || params_.tau_m <= 0.0)
      throw std::invalid_argument("lif: dt and tau_m must be positive");
    for (std::size_t i = 0; i < n; ++i) trains_[i].neuron = i;
  }

  std::size_t size() const { return v_.size(); }
  double now() const { return now_; }
  const LifParams& params() const { return params_; }
  double potential(std::size_t i) const { return v_.at(i); }
  // Most recent spike time, or a negative value if the neuron never fired.
  double last_spike_time(std::size_t i) const { return last_spike_.at(i); }
  const std::vector<SpikeTrain>& trains() const { return trains_; }
  const SpikeTrain& train(std::size_t i) const { return trains_.at(i); }

  // Advances one dt with the given per-neuron input current; returns the
  // indices of neurons that fired this step.
  const std::vector<std::size_t>& step(const std::vector<double>& input) {
    if (input.size() != v_.size())
      throw std::invalid_argument("lif: input size mismatch");
    fired_.clear();
    const double k = params_.dt / params_.tau_m;
    const double t_spike = now_ + params_.dt;
    for (std::size_t i = 0; i < v_.size(); ++i) {
      if (!std::isfinite(input[i]))
        throw std::invalid_argument("lif: non-finite input current");
      if (t_spike <= refr_until_[i]) continue;
      v_[i] += k * (-(v_[i] - params_.v_rest) + input[i]);
      if (v_[i] >= params_.v_threshold) {
        v_[i] = params_.v_reset;
        refr_until_[i] = t_spike + params_.refractory;
        last_spike_[i] = t_spike;
        trains_[i].times.push_back(t_spike);
        if (log_) log_->record(t_spike, id_, i);
        fired_.push_back(i);
      }
    }
    now_ = t_spike;
    return fired_;
  }

  // Returns the population to its construction state (fresh window).
  void reset() {
    now_ = 0.0;
    for (std::size_t i = 0; i < v_.size(); ++i) {
      v_[i] = params_.v_rest;
      refr_until_[i] = -1.0;
      last_spike_[i] = -1.0;
      trains_[i].times.clear();
    }
  }

 private:
  LifParams params_;
  int id_ = 0;
  SpikeLog* log_ = nullptr;
  double now_ = 0.0;
  std::vector<double> v_;
  std::vector<double> refr_until_;
  std::vector<double> last_spike_;
  std::vector<SpikeTrain> trains_;
  std::vector<std::size_t> fired_;
};

// ---- firing-rate measurement over a window [t0, t1) ----

inline void check_window(double t0, double t1) {
  if (!(t1 > t0)) throw std::invalid_argument("rate: empty window (t1 <= t0)");
}

inline std::size_t count_in_window(const SpikeTrain& train, double t0, double t1) {
  check_window(t0, t1);
  std::size_t n = 0;
  for (double t : train.times)
    if (t >= t0 && t < t1) ++n;
  return n;
}

inline std::vector<std::size_t> spike_counts(const std::vector<SpikeTrain>& trains,
                                             double t0, double t1) {
  check_window(t0, t1);
  std::vector<std::size_t> out;
  out.reserve(trains.size());
  for (const auto& tr : trains) out.push_back(count_in_window(tr, t0, t1));
  return out;
}

// Mean spikes per neuron in the window.
inline double population_mean_count(const std::vector<SpikeTrain>& trains,
                                    double t0, double t1) {
  check_window(t0, t1);
  if (trains.empty()) throw std::invalid_argument("rate: no neurons");
  double total = 0.0;
  for (const auto& tr : trains) total += static_cast<double>(count_in_window(tr, t0, t1));
  return total / static_cast<double>(trains.size());
}

// Mean rate in spikes per millisecond.
inline double population_rate(const std::vector<SpikeTrain>& trains, double t0,
                              double t1) {
  return population_mean_count(trains, t0, t1) / (t1 - t0);
}

}  // namespace esnn
