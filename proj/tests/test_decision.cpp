// Decision network: state encoding, windowed action selection, eligibility
// bookkeeping, and reward-gated weight updates.
#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "esnn/decision.hpp"

namespace {

using esnn::DecisionConfig;
using esnn::DecisionNetwork;
using esnn::MoralReward;
using esnn::RngStream;
using esnn::WindowResult;
using esnn::make_moral_reward;

constexpr std::uint64_t kSeed = 42;

DecisionNetwork make_net(std::uint64_t seed = kSeed) {
  return DecisionNetwork(DecisionConfig{}, 8, 8, seed);
}

TEST(MoralRewardTest, SumIdentityHoldsByConstruction) {
  const MoralReward a = make_moral_reward(-1.0, 0.0);
  EXPECT_DOUBLE_EQ(a.r_self_task, -1.0);
  EXPECT_DOUBLE_EQ(a.da_in_emp, 0.0);
  EXPECT_DOUBLE_EQ(a.r_moral, -1.0);

  const MoralReward b = make_moral_reward(10.0, 27.0);
  EXPECT_DOUBLE_EQ(b.r_moral, 37.0);

  const MoralReward c = make_moral_reward(-1.0, 8.9753);
  EXPECT_DOUBLE_EQ(c.r_moral, -1.0 + 8.9753);
}

TEST(DecisionNetworkTest, StateEncodingIsRowMajorWithStackedEmpathyLayer) {
  const auto net = make_net();
  EXPECT_EQ(net.encode_state(0, 0, 0), 0u);
  EXPECT_EQ(net.encode_state(1, 0, 0), 1u);
  EXPECT_EQ(net.encode_state(0, 1, 0), 8u);
  EXPECT_EQ(net.encode_state(7, 7, 0), 63u);
  EXPECT_EQ(net.encode_state(0, 0, -1), 64u);
  EXPECT_EQ(net.encode_state(7, 7, -1), 127u);
  EXPECT_EQ(net.n_states(), 128u);
  EXPECT_EQ(net.n_action_neurons(), 200u);

  EXPECT_THROW(net.encode_state(8, 0, 0), std::out_of_range);
  EXPECT_THROW(net.encode_state(0, 8, 0), std::out_of_range);
  EXPECT_THROW(net.encode_state(0, 0, 1), std::invalid_argument);
  EXPECT_THROW(net.encode_state(0, 0, -2), std::invalid_argument);
}

TEST(DecisionNetworkTest, ConstructionRejectsEmptyGeometry) {
  EXPECT_THROW(DecisionNetwork(DecisionConfig{}, 0, 8, kSeed),
               std::invalid_argument);
  EXPECT_THROW(DecisionNetwork(DecisionConfig{}, 8, 0, kSeed),
               std::invalid_argument);
  DecisionConfig cfg;
  cfg.neurons_per_action = 0;
  EXPECT_THROW(DecisionNetwork(cfg, 8, 8, kSeed), std::invalid_argument);
}

TEST(DecisionNetworkTest, PickActionIsArgmaxAndScaleInvariant) {
  RngStream rng(1);
  EXPECT_EQ(DecisionNetwork::pick_action({3, 9, 1, 0}, rng), 1);
  EXPECT_EQ(DecisionNetwork::pick_action({12, 9, 1, 0}, rng), 0);
  EXPECT_EQ(DecisionNetwork::pick_action({0, 0, 0, 7}, rng), 3);
  // Multiplying every count by a positive constant preserves the argmax.
  EXPECT_EQ(DecisionNetwork::pick_action({9, 27, 3, 0}, rng), 1);
  EXPECT_EQ(DecisionNetwork::pick_action({36, 27, 3, 0}, rng), 0);
}

TEST(DecisionNetworkTest, FourWayTiesBreakUniformly) {
  RngStream rng(7);
  std::array<int, 4> hits{};
  const int n = 10000;
  for (int k = 0; k < n; ++k)
    ++hits[std::size_t(DecisionNetwork::pick_action({5, 5, 5, 5}, rng))];
  for (int g = 0; g < 4; ++g)
    EXPECT_NEAR(double(hits[std::size_t(g)]) / n, 0.25, 0.025) << "group " << g;
}

TEST(DecisionNetworkTest, TwoWayTiesSplitBetweenTiedGroupsOnly) {
  RngStream rng(11);
  std::array<int, 4> hits{};
  const int n = 10000;
  for (int k = 0; k < n; ++k)
    ++hits[std::size_t(DecisionNetwork::pick_action({2, 8, 8, 1}, rng))];
  EXPECT_EQ(hits[0], 0);
  EXPECT_EQ(hits[3], 0);
  EXPECT_NEAR(double(hits[1]) / n, 0.5, 0.03);
  EXPECT_NEAR(double(hits[2]) / n, 0.5, 0.03);
}

TEST(DecisionNetworkTest, SpikeCountsGradeMonotonicallyWithGroupWeight) {
  DecisionNetwork net = make_net();
  RngStream rng(3);
  int prev = -1;
  for (double w : {0.3, 0.6, 1.0, 2.0, 5.0}) {
    auto& m = net.weights_mut();
    const std::size_t s = net.encode_state(0, 0, 0);
    for (std::size_t j = 0; j < net.config().neurons_per_action; ++j)
      m.set(s, j, w);
    const WindowResult r = net.select_action(0, 0, 0, rng);
    EXPECT_GT(r.counts[0], prev) << "weight " << w;
    prev = r.counts[0];
  }
  // A group driven at the weight ceiling dwarfs groups at initialization.
  const WindowResult r = net.select_action(0, 0, 0, rng);
  EXPECT_EQ(r.action, 0);
  for (int g = 1; g < 4; ++g)
    EXPECT_GT(r.counts[0], 3 * r.counts[std::size_t(g)]) << "group " << g;
}

TEST(DecisionNetworkTest, ExplorationBoostDominatesEveryGroup) {
  const DecisionNetwork net = make_net(11);
  RngStream rng(5);
  for (int g = 0; g < 4; ++g) {
    const WindowResult r = net.select_action(2, 5, 0, rng, g);
    EXPECT_EQ(r.action, g);
    for (int other = 0; other < 4; ++other) {
      if (other != g) {
        EXPECT_GT(r.counts[std::size_t(g)],
                  2 * r.counts[std::size_t(other)]);
      }
    }
  }
  EXPECT_THROW(net.select_action(2, 5, 0, rng, -1), std::invalid_argument);
  EXPECT_THROW(net.select_action(2, 5, 0, rng, 4), std::invalid_argument);
}

// Recomputes the expected eligibility trace from the returned spike trains
// and checks the fold reproduces it exactly, including geometric retention
// across consecutive windows and zero rows for unvisited states.
TEST(DecisionNetworkTest, TraceFoldMatchesStandaloneRecomputation) {
  DecisionNetwork net = make_net();
  const DecisionConfig& cfg = net.config();
  RngStream rng(9);

  net.begin_episode();
  const WindowResult r1 = net.select_action(3, 2, 0, rng);
  net.fold_trace(r1);
  const WindowResult r2 = net.select_action(4, 2, -1, rng);
  net.fold_trace(r2);

  ASSERT_NE(r1.state_index, r2.state_index);
  const std::size_t cols = net.n_action_neurons();
  std::vector<double> expected(net.n_states() * cols, 0.0);
  for (std::size_t j = 0; j < cols; ++j)
    expected[r1.state_index * cols + j] +=
        cfg.deposit_gain *
        esnn::stdp_bidirectional(r1.state_train, r1.action_trains[j],
                                 cfg.plasticity);
  for (auto& e : expected) e *= cfg.trace_retention;
  for (std::size_t j = 0; j < cols; ++j)
    expected[r2.state_index * cols + j] +=
        cfg.deposit_gain *
        esnn::stdp_bidirectional(r2.state_train, r2.action_trains[j],
                                 cfg.plasticity);

  const std::vector<double>& got = net.trace();
  ASSERT_EQ(got.size(), expected.size());
  for (std::size_t k = 0; k < got.size(); ++k)
    ASSERT_DOUBLE_EQ(got[k], expected[k]) << "element " << k;

  // Only the two visited state rows may carry eligibility.
  for (std::size_t s = 0; s < net.n_states(); ++s) {
    if (s == r1.state_index || s == r2.state_index) continue;
    for (std::size_t j = 0; j < cols; ++j)
      ASSERT_EQ(got[s * cols + j], 0.0) << "state " << s;
  }
}

TEST(DecisionNetworkTest, ActiveWindowDepositsNetPotentiation) {
  DecisionNetwork net = make_net();
  RngStream rng(13);
  net.begin_episode();
  const WindowResult r = net.select_action(1, 1, 0, rng);
  net.fold_trace(r);
  const std::size_t cols = net.n_action_neurons();
  double row_sum = 0.0;
  for (std::size_t j = 0; j < cols; ++j)
    row_sum += net.trace()[r.state_index * cols + j];
  EXPECT_GT(row_sum, 0.0);
  EXPECT_GT(net.max_abs_trace(), 0.0);
}

TEST(DecisionNetworkTest, BeginEpisodeClearsEligibility) {
  DecisionNetwork net = make_net();
  RngStream rng(17);
  net.fold_trace(net.select_action(6, 6, 0, rng));
  ASSERT_GT(net.max_abs_trace(), 0.0);
  net.begin_episode();
  EXPECT_EQ(net.max_abs_trace(), 0.0);
}

TEST(DecisionNetworkTest, LearnAppliesRewardTimesTraceWithClipping) {
  DecisionNetwork net = make_net();
  RngStream rng(19);
  net.begin_episode();
  const WindowResult r = net.select_action(5, 5, 0, rng);
  net.fold_trace(r);

  const std::vector<double> before = net.weights().values();
  const std::vector<double> trace = net.trace();
  const double reward = -1.0;
  net.learn(make_moral_reward(reward, 0.0));
  const std::vector<double>& after = net.weights().values();
  const auto& m = net.weights();
  for (std::size_t k = 0; k < after.size(); ++k)
    ASSERT_DOUBLE_EQ(after[k], m.clip(before[k] + reward * trace[k]))
        << "element " << k;
}

TEST(DecisionNetworkTest, LearnClipsAtBothWeightBounds) {
  DecisionNetwork net = make_net();
  RngStream rng(23);
  net.begin_episode();
  const WindowResult r = net.select_action(0, 0, 0, rng);
  net.fold_trace(r);
  ASSERT_GT(net.max_abs_trace(), 0.0);

  DecisionNetwork up = net;
  up.learn(make_moral_reward(1e9, 0.0));
  DecisionNetwork down = net;
  down.learn(make_moral_reward(-1e9, 0.0));
  const std::size_t cols = net.n_action_neurons();
  const std::size_t s = r.state_index;
  bool saw_ceiling = false;
  for (std::size_t j = 0; j < cols; ++j) {
    const double e = net.trace()[s * cols + j];
    if (e > 0.0) {
      EXPECT_DOUBLE_EQ(up.weights().at(s, j), net.config().w_max);
      EXPECT_DOUBLE_EQ(down.weights().at(s, j), 0.0);
      saw_ceiling = true;
    }
  }
  EXPECT_TRUE(saw_ceiling);
}

TEST(DecisionNetworkTest, LearnRejectsInconsistentRewardDecomposition) {
  DecisionNetwork net = make_net();
  MoralReward bad{-1.0, 5.0, 3.0};  // 3 != -1 + 5
  EXPECT_THROW(net.learn(bad), std::invalid_argument);
}

TEST(DecisionNetworkTest, SameSeedReproducesWindowsExactly) {
  const DecisionNetwork a = make_net(kSeed);
  const DecisionNetwork b = make_net(kSeed);
  RngStream ra(31), rb(31);
  for (int step = 0; step < 3; ++step) {
    const WindowResult wa = a.select_action(3, 4, 0, ra);
    const WindowResult wb = b.select_action(3, 4, 0, rb);
    EXPECT_EQ(wa.action, wb.action);
    EXPECT_EQ(wa.counts, wb.counts);
    ASSERT_EQ(wa.action_trains.size(), wb.action_trains.size());
    for (std::size_t j = 0; j < wa.action_trains.size(); ++j)
      EXPECT_EQ(wa.action_trains[j].times, wb.action_trains[j].times);
  }
}

TEST(DecisionNetworkTest, DifferentSeedsChangeTheWindow) {
  const DecisionNetwork a = make_net(kSeed);
  const DecisionNetwork b = make_net(kSeed + 1);
  RngStream ra(31), rb(31);
  const WindowResult wa = a.select_action(3, 4, 0, ra);
  const WindowResult wb = b.select_action(3, 4, 0, rb);
  EXPECT_NE(wa.counts, wb.counts);
}

TEST(DecisionNetworkTest, PolicyReadoutTracksStrongestGroup) {
  DecisionNetwork net = make_net();
  const std::size_t s = net.encode_state(2, 1, 0);
  auto& m = net.weights_mut();
  for (std::size_t i = 0; i < net.config().neurons_per_action; ++i)
    m.set(s, 3 * net.config().neurons_per_action + i, 2.5);
  const auto entry = net.policy_at(2, 1, 0);
  EXPECT_EQ(entry.action, 3);
  EXPECT_DOUBLE_EQ(entry.weight, net.group_weight(s, 3));
  EXPECT_DOUBLE_EQ(entry.weight, 2.5);
  // The stacked empathy layer is untouched by edits to the base layer.
  const auto other = net.policy_at(2, 1, -1);
  EXPECT_LT(other.weight, 1.0);
}

}  // namespace
