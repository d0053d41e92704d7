#pragma once
// Two-agent gridworld. Agent A moves under the caller's policy; agent B
// random-walks inside its own sub-region and becomes distressed when it
// steps onto a danger cell. Distress persists until A reaches the help
// goal H; reaching the task goal T ends the episode.
//
// Coordinates: x = column, y = row, origin at the top-left; "up" decreases
// y. Moves off the grid or into a wall are no-ops that still cost one step.
//
// Scenario text format: a header line `seed=<u64> m=<steps>` followed by
// one row per line. Cell characters: '.' free, '#' wall, 'D' danger,
// 'T' task goal, 'H' help goal, 'A' agent A start, 'B' agent B start.
// One cell per character, so the special cells are distinct by construction.
//
// B's sub-region is the set of free (non-wall) cells inside the bounding
// box of B's start and the danger cells; with no danger cells B never moves.
// At most one distress onset per episode; re-entering danger after relief
// does not re-trigger it.

#include <cstdint>
#include <deque>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "esnn/rng.hpp"

namespace esnn {

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Pos {
  int x = 0;
  int y = 0;
  bool operator==(const Pos&) const = default;
};

enum class Action { up = 0, down = 1, left = 2, right = 3 };
inline const char* action_name(Action a) {
  switch (a) {
    case Action::up: return "up";
    case Action::down: return "down";
    case Action::left: return "left";
    case Action::right: return "right";
  }
  return "?";
}

enum class Emotion { normal = 0, negative = 1 };
enum class Cue { green = 0, red = 1 };

struct Scenario {
  int width = 0;
  int height = 0;
  std::vector<char> cells;  // '.' or '#' terrain only
  Pos a_start, b_start, t_goal, h_goal;
  std::vector<Pos> danger;
  std::uint64_t seed = 0;
  int step_budget = 60;

  bool in_bounds(Pos p) const {
    return p.x >= 0 && p.x < width && p.y >= 0 && p.y < height;
  }
  char terrain(Pos p) const { return cells[std::size_t(p.y) * width + p.x]; }
  bool wall(Pos p) const { return terrain(p) == '#'; }
  bool free_cell(Pos p) const { return in_bounds(p) && !wall(p); }
  bool is_danger(Pos p) const {
    for (const auto& d : danger)
      if (d == p) return true;
    return false;
  }

  // B's roaming sub-region: free cells in the bounding box of b_start and
  // the danger cells.
  std::vector<Pos> b_region() const {
    int x0 = b_start.x, x1 = b_start.x, y0 = b_start.y, y1 = b_start.y;
    for (const auto& d : danger) {
      x0 = std::min(x0, d.x);
      x1 = std::max(x1, d.x);
      y0 = std::min(y0, d.y);
      y1 = std::max(y1, d.y);
    }
    std::vector<Pos> cellsv;
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x)
        if (free_cell({x, y})) cellsv.push_back({x, y});
    return cellsv;
  }

  bool in_b_region(Pos p) const {
    int x0 = b_start.x, x1 = b_start.x, y0 = b_start.y, y1 = b_start.y;
    for (const auto& d : danger) {
      x0 = std::min(x0, d.x);
      x1 = std::max(x1, d.x);
      y0 = std::min(y0, d.y);
      y1 = std::max(y1, d.y);
    }
    return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1 && free_cell(p);
  }

  bool operator==(const Scenario&) const = default;
};

inline Pos action_delta(Action a) {
  switch (a) {
    case Action::up: return {0, -1};
    case Action::down: return {0, 1};
    case Action::left: return {-1, 0};
    case Action::right: return {1, 0};
  }
  return {0, 0};
}

// ---- scenario text format ----

inline std::string serialize_scenario(const Scenario& s) {
  std::ostringstream out;
  out << "seed=" << s.seed << " m=" << s.step_budget << "\n";
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      Pos p{x, y};
      char c = s.terrain(p);
      if (s.is_danger(p)) c = 'D';
      if (p == s.t_goal) c = 'T';
      if (p == s.h_goal) c = 'H';
      if (p == s.a_start) c = 'A';
      if (p == s.b_start) c = 'B';
      out << c;
    }
    out << "\n";
  }
  return out.str();
}

inline Scenario parse_scenario(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header)) throw ScenarioError("scenario: empty input");
  Scenario s;
  {
    std::istringstream hs(header);
    std::string seed_kv, m_kv;
    if (!(hs >> seed_kv >> m_kv) || seed_kv.rfind("seed=", 0) != 0 ||
        m_kv.rfind("m=", 0) != 0)
      throw ScenarioError("scenario: header must be 'seed=<u64> m=<steps>'");
    try {
      s.seed = std::stoull(seed_kv.substr(5));
      s.step_budget = std::stoi(m_kv.substr(2));
    } catch (const std::exception&) {
      throw ScenarioError("scenario: bad header numbers");
    }
    std::string extra;
    if (hs >> extra) throw ScenarioError("scenario: trailing header tokens");
  }
  if (s.step_budget <= 0) throw ScenarioError("scenario: step budget must be positive");

  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(line);
  }
  if (rows.empty()) throw ScenarioError("scenario: no grid rows");
  s.height = int(rows.size());
  s.width = int(rows[0].size());
  s.cells.assign(std::size_t(s.width) * s.height, '.');
  int n_a = 0, n_b = 0, n_t = 0, n_h = 0;
  for (int y = 0; y < s.height; ++y) {
    if (int(rows[y].size()) != s.width)
      throw ScenarioError("scenario: ragged rows");
    for (int x = 0; x < s.width; ++x) {
      const char c = rows[y][x];
      Pos p{x, y};
      switch (c) {
        case '.': break;
        case '#': s.cells[std::size_t(y) * s.width + x] = '#'; break;
        case 'D': s.danger.push_back(p); break;
        case 'T': s.t_goal = p; ++n_t; break;
        case 'H': s.h_goal = p; ++n_h; break;
        case 'A': s.a_start = p; ++n_a; break;
        case 'B': s.b_start = p; ++n_b; break;
        default:
          throw ScenarioError(std::string("scenario: unknown cell '") + c + "'");
      }
    }
  }
  if (n_a != 1 || n_b != 1 || n_t != 1 || n_h != 1)
    throw ScenarioError("scenario: need exactly one each of A, B, T, H");
  return s;
}

// ---- shortest paths ----

inline std::optional<int> bfs_distance(const Scenario& s, Pos from, Pos to) {
  if (!s.free_cell(from) || !s.free_cell(to)) return std::nullopt;
  std::vector<int> dist(std::size_t(s.width) * s.height, -1);
  auto idx = [&](Pos p) { return std::size_t(p.y) * s.width + p.x; };
  std::deque<Pos> q;
  dist[idx(from)] = 0;
  q.push_back(from);
  while (!q.empty()) {
    const Pos p = q.front();
    q.pop_front();
    if (p == to) return dist[idx(p)];
    for (Action a : {Action::up, Action::down, Action::left, Action::right}) {
      const Pos d = action_delta(a);
      const Pos n{p.x + d.x, p.y + d.y};
      if (!s.free_cell(n) || dist[idx(n)] >= 0) continue;
      dist[idx(n)] = dist[idx(p)] + 1;
      q.push_back(n);
    }
  }
  return std::nullopt;
}

// ---- episode simulation ----

// Task reward structure: every step costs one unit; arriving at the task
// goal pays a fixed bonus on top of that step's cost.
inline constexpr double kStepPenalty = -1.0;
inline constexpr double kGoalReward = 10.0;

struct StepEvents {
  bool distress_onset = false;
  bool distress_relieved = false;
  bool reached_t = false;
  bool timeout = false;
};

struct StepOutcome {
  Pos a, b;
  double r_self_task = kStepPenalty;
  Cue b_cue = Cue::green;
  StepEvents events;
  bool done = false;
  int step_index = 0;  // 1-based index of the step just taken
};

class GridWorld {
 public:
  explicit GridWorld(Scenario scenario)
      : s_(std::move(scenario)), walk_(0) {
    if (!s_.free_cell(s_.a_start) || !s_.free_cell(s_.b_start) ||
        !s_.free_cell(s_.t_goal) || !s_.free_cell(s_.h_goal))
      throw ScenarioError("scenario: special cells must be free");
    reset(s_.seed);
  }

  const Scenario& scenario() const { return s_; }
  Pos a() const { return a_; }
  Pos b() const { return b_; }
  Emotion b_emotion() const { return emo_; }
  Cue b_cue() const { return emo_ == Emotion::negative ? Cue::red : Cue::green; }
  int step_index() const { return step_; }
  bool done() const { return done_; }
  int onset_step() const { return onset_step_; }
  int relieved_step() const { return relieved_step_; }
  int reached_t_step() const { return reached_t_step_; }
  int onset_distance_to_h() const { return onset_distance_; }

  // Starts a fresh episode; B's walk follows the given seed.
  void reset(std::uint64_t walk_seed) {
    walk_ = RngStream(walk_seed);
    a_ = s_.a_start;
    b_ = s_.b_start;
    emo_ = Emotion::normal;
    step_ = 0;
    done_ = false;
    onset_consumed_ = false;
    onset_step_ = relieved_step_ = reached_t_step_ = -1;
    onset_distance_ = -1;
  }

  // One simultaneous step: A moves first, relief and task-goal checks use
  // the distress state A observed when acting, then B walks and may trigger
  // onset, then the budget check runs.
  StepOutcome step(Action action) {
    if (done_) throw std::logic_error("gridworld: episode already done");
    ++step_;
    StepOutcome out;
    out.step_index = step_;

    const Pos d = action_delta(action);
    const Pos target{a_.x + d.x, a_.y + d.y};
    if (s_.free_cell(target)) a_ = target;

    out.r_self_task = kStepPenalty;
    if (emo_ == Emotion::negative && a_ == s_.h_goal) {
      emo_ = Emotion::normal;
      relieved_step_ = step_;
      out.events.distress_relieved = true;
    }
    if (a_ == s_.t_goal) {
      reached_t_step_ = step_;
      out.events.reached_t = true;
      out.r_self_task += kGoalReward;
      done_ = true;
    }

    if (!done_) {
      move_b();
      if (!onset_consumed_ && emo_ == Emotion::normal && s_.is_danger(b_)) {
        emo_ = Emotion::negative;
        onset_consumed_ = true;
        onset_step_ = step_;
        const auto dist = bfs_distance(s_, a_, s_.h_goal);
        onset_distance_ = dist ? *dist : -1;
        out.events.distress_onset = true;
      }
      if (step_ >= s_.step_budget) {
        out.events.timeout = true;
        done_ = true;
      }
    }

    out.a = a_;
    out.b = b_;
    out.b_cue = b_cue();
    out.done = done_;
    return out;
  }

 private:
  void move_b() {
    Pos options[4];
    std::size_t n = 0;
    for (Action a : {Action::up, Action::down, Action::left, Action::right}) {
      const Pos d = action_delta(a);
      const Pos t{b_.x + d.x, b_.y + d.y};
      if (s_.in_b_region(t)) options[n++] = t;
    }
    if (n > 0) b_ = options[walk_.uniform_index(n)];
  }

  Scenario s_;
  RngStream walk_;
  Pos a_, b_;
  Emotion emo_ = Emotion::normal;
  int step_ = 0;
  bool done_ = false;
  bool onset_consumed_ = false;
  int onset_step_ = -1, relieved_step_ = -1, reached_t_step_ = -1;
  int onset_distance_ = -1;
};

// ---- canned demo layout and randomized generation ----

// Fixed demonstration layout. A's shortest route to T is 5 steps; helping
// means an 8-step detour (A->H 9, H->T 4). H sits on the far side of T, so
// every cell on a shortest A->T route is also en route to H: distress onset
// at step k leaves A exactly 9-k steps from H no matter which shortest path
// it follows, and after helping only a short walk back to T re-arms the
// reward predictor. B's region is a 3-cell corridor ending in the danger
// cell: B's walk reaches danger within a few steps, so nearly every episode
// poses the dilemma, but one or more calm steps first keep the predictor
// anchored to the no-distress baseline.
inline const char* demo_scenario_text() {
  return
      "seed=1 m=60\n"
      ".....B.D\n"
      "...H....\n"
      "........\n"
      "........\n"
      "..T.....\n"
      "........\n"
      "........\n"
      "A.......\n";
}

inline Scenario make_demo_scenario() { return parse_scenario(demo_scenario_text()); }

struct GenerationConfig {
  int width = 8;
  int height = 8;
  int step_budget = 60;
  double wall_density = 0.08;
  int min_t_distance = 5;   // BFS(A,T) at least this long
  int min_h_distance = 3;   // BFS(A,H) at least this long
  int min_detour = 2;       // BFS(A,H)+BFS(H,T)-BFS(A,T) at least this
  int max_tries = 10000;
};

// Rejection-sampled random scenario: reachable goals, a genuine detour to
// the help goal, and a three-cell corridor that walks B into danger.
inline Scenario generate_scenario(const GenerationConfig& cfg, RngStream& rng,
                                  std::uint64_t scenario_seed) {
  if (cfg.width < 4 || cfg.height < 4)
    throw ScenarioError("generate: grid too small");
  for (int attempt = 0; attempt < cfg.max_tries; ++attempt) {
    Scenario s;
    s.width = cfg.width;
    s.height = cfg.height;
    s.step_budget = cfg.step_budget;
    s.seed = scenario_seed;
    s.cells.assign(std::size_t(cfg.width) * cfg.height, '.');
    for (auto& c : s.cells)
      if (rng.uniform() < cfg.wall_density) c = '#';

    auto random_free = [&]() -> std::optional<Pos> {
      for (int k = 0; k < 64; ++k) {
        Pos p{int(rng.uniform_index(std::size_t(cfg.width))),
              int(rng.uniform_index(std::size_t(cfg.height)))};
        if (s.free_cell(p)) return p;
      }
      return std::nullopt;
    };

    const auto a = random_free(), t = random_free(), h = random_free();
    if (!a || !t || !h) continue;
    s.a_start = *a;
    s.t_goal = *t;
    s.h_goal = *h;
    if (s.a_start == s.t_goal || s.a_start == s.h_goal || s.t_goal == s.h_goal)
      continue;

    // Corridor: three collinear free cells, B at one end, danger at the other.
    const auto c0 = random_free();
    if (!c0) continue;
    const Pos dir = action_delta(Action(rng.uniform_index(4)));
    Pos c1{c0->x + dir.x, c0->y + dir.y}, c2{c0->x + 2 * dir.x, c0->y + 2 * dir.y};
    if (!s.free_cell(c1) || !s.free_cell(c2)) continue;
    bool overlap = false;
    for (Pos p : {*c0, c1, c2})
      if (p == s.a_start || p == s.t_goal || p == s.h_goal) overlap = true;
    if (overlap) continue;
    s.b_start = *c0;
    s.danger = {c2};

    const auto d_at = bfs_distance(s, s.a_start, s.t_goal);
    const auto d_ah = bfs_distance(s, s.a_start, s.h_goal);
    const auto d_ht = bfs_distance(s, s.h_goal, s.t_goal);
    if (!d_at || !d_ah || !d_ht) continue;
    if (*d_at < cfg.min_t_distance) continue;
    if (*d_ah < cfg.min_h_distance) continue;
    if (*d_ah + *d_ht - *d_at < cfg.min_detour) continue;
    if (*d_ah + *d_ht + *d_at > cfg.step_budget) continue;
    return s;
  }
  throw ScenarioError("generate: no valid scenario within retry budget");
}

}  // namespace esnn
