// Mirror-pathway empathy circuit: staged self-experience training, category
// selectivity under outward cues, inhibition-controlled empathy level, and
// the calibration/bisection machinery on top of it.
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "esnn/empathy.hpp"

namespace esnn {
namespace {

constexpr std::uint64_t kSeed = 42;

TEST(EmpathyNetwork, UntrainedCueProducesNoResponse) {
  EmpathyNetwork net{EmpathyConfig{}, kSeed};
  const auto r = net.infer(Cue::red);
  EXPECT_FALSE(r.mirror_responded);
  EXPECT_EQ(r.o_emp, 0);
  EXPECT_EQ(r.note, "no-mirror-response");
  EXPECT_DOUBLE_EQ(r.emotion_negative_rate, 0.0);
  EXPECT_DOUBLE_EQ(r.mirror_rate, 0.0);
}

TEST(EmpathyNetwork, TrainingSaturatesWellBeforeTrialBudget) {
  EmpathyNetwork net{EmpathyConfig{}, kSeed};
  net.train_self_experience();
  EXPECT_TRUE(net.trained());
  EXPECT_GE(net.trials_run(), 4);
  EXPECT_LT(net.trials_run(), 50);

  const auto& cfg = net.config();
  for (const auto* w : {&net.w_emotion_mirror(), &net.w_mirror_emotion(),
                        &net.w_mirror_perception(), &net.w_perception_mirror()}) {
    // Within-category blocks saturate against the upper bound; cross-category
    // blocks never see paired spikes and keep their exact initial value.
    for (auto cat : {Category::negative, Category::normal}) {
      const std::size_t base = std::size_t(cat) * cfg.neurons_per_group;
      for (std::size_t i = 0; i < cfg.neurons_per_group; ++i)
        for (std::size_t j = 0; j < cfg.neurons_per_group; ++j)
          EXPECT_DOUBLE_EQ(w->at(base + i, base + j), cfg.w_max);
      const std::size_t other = (std::size_t(cat) ^ 1u) * cfg.neurons_per_group;
      for (std::size_t i = 0; i < cfg.neurons_per_group; ++i)
        for (std::size_t j = 0; j < cfg.neurons_per_group; ++j)
          EXPECT_DOUBLE_EQ(w->at(base + i, other + j), cfg.w_init);
    }
  }
}

TEST(EmpathyNetwork, WeightsNeverShrinkUnderTraining) {
  EmpathyNetwork net{EmpathyConfig{}, kSeed};
  net.set_inhibition_proportion(0.3);
  net.train_self_experience();
  for (const auto* w : {&net.w_emotion_mirror(), &net.w_mirror_emotion(),
                        &net.w_mirror_perception(), &net.w_perception_mirror()})
    for (double v : w->values()) EXPECT_GE(v, net.config().w_init);
}

TEST(EmpathyNetwork, RedCueActivatesNegativeEmotionAtLeastTwiceAnySubgroup) {
  EmpathyNetwork net{EmpathyConfig{}, kSeed};
  net.train_self_experience();
  const auto r = net.infer(Cue::red);
  ASSERT_TRUE(r.mirror_responded);
  EXPECT_GT(r.emotion_negative_rate, 0.0);
  const double others = std::max({r.emotion_normal_rate, r.mirror_negative_rate,
                                  r.mirror_normal_rate, r.perception_negative_rate,
                                  r.perception_normal_rate});
  EXPECT_GE(r.emotion_negative_rate, 2.0 * others);
  EXPECT_DOUBLE_EQ(r.emotion_normal_rate, 0.0);  // wrong-category silence
}

TEST(EmpathyNetwork, GreenCueMirrorsIntoNormalCategory) {
  EmpathyNetwork net{EmpathyConfig{}, kSeed};
  net.train_self_experience();
  const auto red = net.infer(Cue::red);
  const auto green = net.infer(Cue::green);
  EXPECT_DOUBLE_EQ(green.emotion_negative_rate, 0.0);
  EXPECT_GT(green.emotion_normal_rate, 0.0);
  // The two category pathways are built the same way; allow small
  // jitter-driven asymmetry.
  EXPECT_NEAR(green.emotion_normal_rate, red.emotion_negative_rate, 0.03);
}

TEST(EmpathyNetwork, InferenceIsDeterministicAndSeedSensitive) {
  EmpathyNetwork a{EmpathyConfig{}, kSeed}, b{EmpathyConfig{}, kSeed};
  a.train_self_experience();
  b.train_self_experience();
  const auto ra1 = a.infer(Cue::red), ra2 = a.infer(Cue::red);
  const auto rb = b.infer(Cue::red);
  EXPECT_DOUBLE_EQ(ra1.emotion_negative_rate, ra2.emotion_negative_rate);
  EXPECT_DOUBLE_EQ(ra1.emotion_negative_rate, rb.emotion_negative_rate);
  for (std::size_t i = 0; i < ra1.emotion_trains.size(); ++i) {
    EXPECT_EQ(ra1.emotion_trains[i].times, ra2.emotion_trains[i].times);
    EXPECT_EQ(ra1.emotion_trains[i].times, rb.emotion_trains[i].times);
  }
  EmpathyNetwork c{EmpathyConfig{}, kSeed + 1};
  c.train_self_experience();
  const auto rc = c.infer(Cue::red);
  bool any_difference = false;
  for (std::size_t i = 0; i < ra1.emotion_trains.size(); ++i)
    if (ra1.emotion_trains[i].times != rc.emotion_trains[i].times)
      any_difference = true;
  EXPECT_TRUE(any_difference);
}

TEST(EmpathyNetwork, InhibitionCountsFillNeuronsAlternatingCategories) {
  EmpathyNetwork net{EmpathyConfig{}, kSeed};  // 40 neurons x 100 slots
  net.set_inhibition_proportion(0.0);
  for (int c : net.inhibition_counts()) EXPECT_EQ(c, 0);
  net.set_inhibition_proportion(1.0);
  for (int c : net.inhibition_counts()) EXPECT_EQ(c, 100);
  // 0.25 of 4000 slots = 1000: five whole neurons per category.
  net.set_inhibition_proportion(0.25);
  {
    const auto counts = net.inhibition_counts();
    for (std::size_t i = 0; i < counts.size(); ++i) {
      const bool filled = (i < 20 ? i < 5 : i - 20 < 5);
      EXPECT_EQ(counts[i], filled ? 100 : 0) << "neuron " << i;
    }
  }
  // A fractional bank lands on exactly one neuron (the next in the
  // negative/normal alternation) as a partial count.
  net.set_inhibition_proportion(1003.0 / 4000.0);
  {
    const auto counts = net.inhibition_counts();
    int partial = 0, full = 0;
    for (int c : counts) {
      if (c == 100) ++full;
      else if (c > 0) { ++partial; EXPECT_EQ(c, 3); }
    }
    EXPECT_EQ(full, 10);
    EXPECT_EQ(partial, 1);
  }
  // Counts grow monotonically with the proportion.
  std::vector<int> prev(40, -1);
  for (double p = 0.0; p <= 1.0; p += 0.01) {
    net.set_inhibition_proportion(p);
    const auto cur = net.inhibition_counts();
    for (std::size_t i = 0; i < cur.size(); ++i) EXPECT_GE(cur[i], prev[i]);
    prev = cur;
  }
  EXPECT_THROW(net.set_inhibition_proportion(-0.1), std::invalid_argument);
  EXPECT_THROW(net.set_inhibition_proportion(1.1), std::invalid_argument);
}

TEST(EmpathyCalibration, CurveIsMonotoneAndSpansFullRange) {
  EmpathyCalibrator cal{EmpathyConfig{}, kSeed};
  const auto table = cal.table(11);
  ASSERT_EQ(table.size(), 11u);
  EXPECT_DOUBLE_EQ(table.front().fe_percent, 100.0);
  EXPECT_DOUBLE_EQ(table.back().fe_percent, 0.0);
  int strictly_between = 0;
  for (std::size_t k = 0; k < table.size(); ++k) {
    if (k > 0) EXPECT_LE(table[k].fe_percent, table[k - 1].fe_percent + 1e-9);
    if (table[k].fe_percent > 0.0 && table[k].fe_percent < 100.0)
      ++strictly_between;
  }
  EXPECT_GE(strictly_between, 4);
}

TEST(EmpathyCalibration, BisectionReachesTargets) {
  EmpathyCalibrator cal{EmpathyConfig{}, kSeed};
  // Whole-neuron silencing quantizes the reachable levels to ~5% steps, so
  // the bisection can only land on the plateau nearest the target.
  for (double target : {85.0, 45.0, 25.0}) {
    const double p = cal.proportion_for_fe(target, 1.0);
    EXPECT_NEAR(cal.measure(p).fe_percent, target, 3.0) << "target " << target;
  }
  EXPECT_THROW(cal.proportion_for_fe(0.0), std::invalid_argument);
  EXPECT_THROW(cal.proportion_for_fe(101.0), std::invalid_argument);
}

TEST(EmpathyCalibration, DetectionGateAtTwentyPercent) {
  EmpathyCalibrator cal{EmpathyConfig{}, kSeed};
  const double ref = cal.reference_rate();

  auto above = cal.trained_network(cal.proportion_for_fe(25.0, 1.0));
  const auto lvl_above =
      calibrate_empathy_level(above, above.inhibition_proportion(), ref);
  EXPECT_GT(lvl_above.fe_percent, 20.0);
  EXPECT_EQ(above.infer(Cue::red).o_emp, -1);
  EXPECT_EQ(above.infer(Cue::green).o_emp, 0);

  auto below = cal.trained_network(cal.proportion_for_fe(14.0, 1.5));
  const auto lvl_below =
      calibrate_empathy_level(below, below.inhibition_proportion(), ref);
  EXPECT_LT(lvl_below.fe_percent, 20.0);
  const auto r = below.infer(Cue::red);
  EXPECT_EQ(r.o_emp, 0);  // empathic response below the detection gate
  EXPECT_EQ(r.note, "ok");
  EXPECT_GT(r.emotion_negative_rate, 0.0);
}

TEST(EmpathyCalibration, LevelIdentityAndValidation) {
  EmpathyCalibrator cal{EmpathyConfig{}, kSeed};
  const double ref = cal.reference_rate();
  auto net = cal.trained_network(0.3);
  const auto lvl = calibrate_empathy_level(net, 0.3, ref);
  EXPECT_DOUBLE_EQ(lvl.fe_percent, 100.0 * lvl.rate / ref);
  EXPECT_DOUBLE_EQ(net.detection_baseline(), ref);
  EXPECT_DOUBLE_EQ(net.inhibition_proportion(), 0.3);
  EXPECT_THROW(calibrate_empathy_level(net, 0.3, 0.0), std::invalid_argument);
  EXPECT_THROW(cal.table(1), std::invalid_argument);
}

TEST(EmpathyCalibration, UncalibratedInferenceNeverRaisesTheFlag) {
  EmpathyNetwork net{EmpathyConfig{}, kSeed};
  net.train_self_experience();
  const auto r = net.infer(Cue::red);  // no detection baseline set
  EXPECT_TRUE(r.mirror_responded);
  EXPECT_EQ(r.o_emp, 0);
  EXPECT_EQ(r.note, "uncalibrated");
}

}  // namespace
}  // namespace esnn
