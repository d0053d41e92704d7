// Pearson correlation with two-sided t-test p-values, plus the
// altruistic-preference fraction.
#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "esnn/stats.hpp"

namespace {

using esnn::altruistic_preference;
using esnn::Correlation;
using esnn::pearson;
using esnn::regularized_incomplete_beta;
using esnn::t_test_two_sided_p;

TEST(IncompleteBetaTest, BoundaryAndSymmetry) {
  EXPECT_DOUBLE_EQ(regularized_incomplete_beta(2.0, 3.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(regularized_incomplete_beta(2.0, 3.0, 1.0), 1.0);
  // I_x(1, 1) is the uniform CDF.
  EXPECT_NEAR(regularized_incomplete_beta(1.0, 1.0, 0.37), 0.37, 1e-14);
  // I_x(a, b) = 1 - I_{1-x}(b, a).
  const double lhs = regularized_incomplete_beta(2.5, 4.0, 0.3);
  const double rhs = 1.0 - regularized_incomplete_beta(4.0, 2.5, 0.7);
  EXPECT_NEAR(lhs, rhs, 1e-14);
  EXPECT_THROW(regularized_incomplete_beta(0.0, 1.0, 0.5),
               std::invalid_argument);
  EXPECT_THROW(regularized_incomplete_beta(1.0, 1.0, 1.5),
               std::invalid_argument);
}

TEST(TTestTest, KnownQuantiles) {
  // With 1 degree of freedom the t distribution is Cauchy: P(|T| > 1) = 1/2.
  EXPECT_NEAR(t_test_two_sided_p(1.0, 1.0), 0.5, 1e-12);
  // t = 0 carries no evidence.
  EXPECT_DOUBLE_EQ(t_test_two_sided_p(0.0, 8.0), 1.0);
  EXPECT_THROW(t_test_two_sided_p(1.0, 0.0), std::invalid_argument);
}

TEST(PearsonTest, PerfectCorrelationIsExact) {
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.5, 9.0};
  std::vector<double> ys = xs;
  Correlation c = pearson(xs, ys);
  ASSERT_TRUE(c.computable);
  EXPECT_DOUBLE_EQ(c.r, 1.0);
  EXPECT_DOUBLE_EQ(c.p, 0.0);

  for (auto& v : ys) v = -v;
  c = pearson(xs, ys);
  ASSERT_TRUE(c.computable);
  EXPECT_DOUBLE_EQ(c.r, -1.0);
  EXPECT_DOUBLE_EQ(c.p, 0.0);

  // An affine map of x keeps r = 1.
  for (std::size_t i = 0; i < ys.size(); ++i) ys[i] = 3.0 * xs[i] + 7.0;
  c = pearson(xs, ys);
  EXPECT_DOUBLE_EQ(c.r, 1.0);
}

TEST(PearsonTest, FrozenTenPointDatasetMatchesHighPrecisionValues) {
  // Reference values computed independently with 60-digit arithmetic
  // (r from the product-moment definition; p from the regularized
  // incomplete beta tail of the t distribution with n-2 = 8 dof).
  const std::vector<double> xs{5.0,  10.0, 15.0, 25.0, 40.0,
                               55.0, 70.0, 80.0, 90.0, 100.0};
  const std::vector<double> ys{0.0, 0.0, 1.0, 2.0, 4.0,
                               6.0, 7.0, 9.0, 9.0, 10.0};
  const Correlation c = pearson(xs, ys);
  ASSERT_TRUE(c.computable);
  EXPECT_EQ(c.n, 10u);
  EXPECT_NEAR(c.r, 0.9945311581003178, 1e-12);
  EXPECT_NEAR(c.p / 3.887823715686957e-09, 1.0, 1e-9);
}

TEST(PearsonTest, FrozenEightPointNoisyDatasetMatchesHighPrecisionValues) {
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0};
  const std::vector<double> ys{2.0, 1.0, 4.0, 3.0, 2.5, 5.0, 3.5, 4.5};
  const Correlation c = pearson(xs, ys);
  ASSERT_TRUE(c.computable);
  EXPECT_NEAR(c.r, 0.7100963191231674, 1e-12);
  EXPECT_NEAR(c.p, 0.048435749414573265, 1e-12);
  EXPECT_LT(c.p, 0.05);
}

TEST(PearsonTest, DegenerateInputsAreNotComputable) {
  // Fewer than 3 points.
  Correlation c = pearson({1.0, 2.0}, {3.0, 4.0});
  EXPECT_FALSE(c.computable);
  EXPECT_EQ(c.n, 2u);
  // Zero variance in y (e.g. identical networks at every sweep point).
  c = pearson({1.0, 2.0, 3.0, 4.0}, {5.0, 5.0, 5.0, 5.0});
  EXPECT_FALSE(c.computable);
  // Zero variance in x.
  c = pearson({2.0, 2.0, 2.0}, {1.0, 5.0, 9.0});
  EXPECT_FALSE(c.computable);
  // Errors.
  EXPECT_THROW(pearson({1.0, 2.0, 3.0}, {1.0, 2.0}), std::invalid_argument);
  EXPECT_THROW(pearson({1.0, 2.0, std::nan("")}, {1.0, 2.0, 3.0}),
               std::invalid_argument);
}

TEST(PreferenceTest, DefinitionAndAnchors) {
  EXPECT_DOUBLE_EQ(altruistic_preference(0.0, 10.0), 0.0);
  EXPECT_DOUBLE_EQ(altruistic_preference(10.0, 10.0), 0.5);
  // The da value at which the fraction crosses 0.473 with a task reward of
  // 10: da = 0.473 * 10 / (1 - 0.473).
  const double da = 0.473 * 10.0 / (1.0 - 0.473);
  EXPECT_NEAR(da, 8.9753, 5e-5);
  EXPECT_NEAR(altruistic_preference(da, 10.0), 0.473, 1e-15);
  EXPECT_NEAR(altruistic_preference(8.9753, 10.0), 0.473, 1e-5);
}

TEST(PreferenceTest, RejectsDegenerateInputs) {
  EXPECT_THROW(altruistic_preference(5.0, -5.0), std::invalid_argument);
  EXPECT_THROW(altruistic_preference(std::nan(""), 1.0),
               std::invalid_argument);
  EXPECT_THROW(altruistic_preference(1.0, std::nan("")),
               std::invalid_argument);
}

}  // namespace
