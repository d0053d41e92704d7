#pragma once
// Versioned agent snapshots. Every double is stored as a C hex-float
// string, so save -> load reproduces the exact bit pattern; networks are
// rebuilt from their construction seeds and then overwritten with the
// persisted mutable state.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "esnn/config.hpp"
#include "esnn/decision.hpp"
#include "esnn/empathy.hpp"
#include "esnn/neuromod.hpp"
#include "esnn/plasticity.hpp"

namespace esnn {

struct SnapshotError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string hex_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

inline double parse_hex_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size())
    throw SnapshotError("snapshot: bad double literal '" + s + "'");
  return v;
}

namespace detail {

inline nlohmann::json matrix_to_json(const SynapseMatrix& m) {
  nlohmann::json j;
  j["rows"] = m.n_pre();
  j["cols"] = m.n_post();
  j["lo"] = hex_double(m.lo());
  j["hi"] = hex_double(m.hi());
  nlohmann::json values = nlohmann::json::array();
  for (double w : m.values()) values.push_back(hex_double(w));
  j["values"] = std::move(values);
  return j;
}

inline void matrix_from_json(const nlohmann::json& j, SynapseMatrix& m) {
  if (j.at("rows").get<std::size_t>() != m.n_pre() ||
      j.at("cols").get<std::size_t>() != m.n_post())
    throw SnapshotError("snapshot: matrix shape does not match the config");
  if (parse_hex_double(j.at("lo").get<std::string>()) != m.lo() ||
      parse_hex_double(j.at("hi").get<std::string>()) != m.hi())
    throw SnapshotError("snapshot: matrix bounds do not match the config");
  const auto& values = j.at("values");
  if (values.size() != m.values().size())
    throw SnapshotError("snapshot: matrix value count mismatch");
  auto& out = m.values_mut();
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = parse_hex_double(values[k].get<std::string>());
}

}  // namespace detail

struct AgentSnapshot {
  std::uint64_t point_seed = 0;
  std::uint64_t empathy_seed = 0;
  std::uint64_t decision_seed = 0;
  EmpathyNetwork empathy;
  EmpathyLevel level;
  RpePredictor rpe;
  DecisionNetwork decision;
};

inline nlohmann::json agent_snapshot_to_json(const ExperimentConfig& cfg,
                                             const AgentSnapshot& snap) {
  nlohmann::json j;
  j["format"] = "esnn-agent-snapshot";
  j["version"] = kSnapshotFormatVersion;
  j["tool_version"] = kToolVersion;
  j["config_hash"] = config_hash(cfg);
  j["point_seed"] = snap.point_seed;

  nlohmann::json e;
  e["seed"] = snap.empathy_seed;
  e["proportion"] = hex_double(snap.level.proportion);
  e["rate"] = hex_double(snap.level.rate);
  e["fe_percent"] = hex_double(snap.level.fe_percent);
  e["detection_baseline"] = hex_double(snap.empathy.detection_baseline());
  e["trials_run"] = snap.empathy.trials_run();
  e["w_emotion_mirror"] = detail::matrix_to_json(snap.empathy.w_emotion_mirror());
  e["w_mirror_emotion"] = detail::matrix_to_json(snap.empathy.w_mirror_emotion());
  e["w_mirror_perception"] =
      detail::matrix_to_json(snap.empathy.w_mirror_perception());
  e["w_perception_mirror"] =
      detail::matrix_to_json(snap.empathy.w_perception_mirror());
  j["empathy"] = std::move(e);

  j["rpe"]["prediction"] = hex_double(snap.rpe.prediction());

  nlohmann::json d;
  d["seed"] = snap.decision_seed;
  d["width"] = snap.decision.grid_width();
  d["height"] = snap.decision.grid_height();
  d["weights"] = detail::matrix_to_json(snap.decision.weights());
  j["decision"] = std::move(d);
  return j;
}

inline void save_agent_snapshot(const std::string& path,
                                const ExperimentConfig& cfg,
                                const AgentSnapshot& snap) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SnapshotError("snapshot: cannot write " + path);
  out << agent_snapshot_to_json(cfg, snap).dump(2) << '\n';
  if (!out) throw SnapshotError("snapshot: write failed for " + path);
}

inline AgentSnapshot agent_snapshot_from_json(const nlohmann::json& j,
                                              const ExperimentConfig& cfg) {
  if (j.at("format").get<std::string>() != "esnn-agent-snapshot")
    throw SnapshotError("snapshot: unrecognized format tag");
  if (j.at("version").get<std::string>() != kSnapshotFormatVersion)
    throw SnapshotError("snapshot: unsupported version");
  if (j.at("config_hash").get<std::uint64_t>() != config_hash(cfg))
    throw SnapshotError("snapshot: config hash mismatch");

  const auto& e = j.at("empathy");
  const auto& d = j.at("decision");
  AgentSnapshot snap{
      j.at("point_seed").get<std::uint64_t>(),
      e.at("seed").get<std::uint64_t>(),
      d.at("seed").get<std::uint64_t>(),
      EmpathyNetwork(cfg.empathy_config(), e.at("seed").get<std::uint64_t>()),
      EmpathyLevel{},
      RpePredictor(cfg.rpe),
      DecisionNetwork(cfg.decision_config(), d.at("width").get<std::size_t>(),
                      d.at("height").get<std::size_t>(),
                      d.at("seed").get<std::uint64_t>()),
  };

  snap.level.proportion = parse_hex_double(e.at("proportion").get<std::string>());
  snap.level.rate = parse_hex_double(e.at("rate").get<std::string>());
  snap.level.fe_percent = parse_hex_double(e.at("fe_percent").get<std::string>());
  snap.empathy.set_inhibition_proportion(snap.level.proportion);
  snap.empathy.set_detection_baseline(
      parse_hex_double(e.at("detection_baseline").get<std::string>()));
  snap.empathy.set_trials_run(e.at("trials_run").get<int>());
  detail::matrix_from_json(e.at("w_emotion_mirror"),
                           snap.empathy.w_emotion_mirror_mut());
  detail::matrix_from_json(e.at("w_mirror_emotion"),
                           snap.empathy.w_mirror_emotion_mut());
  detail::matrix_from_json(e.at("w_mirror_perception"),
                           snap.empathy.w_mirror_perception_mut());
  detail::matrix_from_json(e.at("w_perception_mirror"),
                           snap.empathy.w_perception_mirror_mut());

  snap.rpe.set_prediction(
      parse_hex_double(j.at("rpe").at("prediction").get<std::string>()));

  detail::matrix_from_json(d.at("weights"), snap.decision.weights_mut());
  return snap;
}

inline AgentSnapshot load_agent_snapshot(const std::string& path,
                                         const ExperimentConfig& cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError("snapshot: cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& ex) {
    throw SnapshotError(std::string("snapshot: parse failure: ") + ex.what());
  }
  try {
    return agent_snapshot_from_json(j, cfg);
  } catch (const nlohmann::json::exception& ex) {
    throw SnapshotError(std::string("snapshot: malformed document: ") +
                        ex.what());
  }
}

}  // namespace esnn
