#include <gtest/gtest.h>

#include <cmath>

#include "mace/errors.h"
#include "mace/wmi.h"
#include "support.h"

namespace mace {
namespace {

// Regression constants from exact enumeration of the illustrative states at
// p(a1) = 0.5, computed independently in double precision.
constexpr double kMiHalf = 0.3098835762452221;
constexpr double kWmiState1Half = 0.9296507287356663;
constexpr double kWmiState2Half = 2.169185033716555;

TEST(WmiTest, IndependentJointIsZero) {
  Eigen::MatrixXd p(2, 3);
  const double pa[] = {0.3, 0.7};
  const double pz[] = {0.2, 0.5, 0.3};
  for (int a = 0; a < 2; ++a)
    for (int z = 0; z < 3; ++z) p(a, z) = pa[a] * pz[z];
  const DiscreteJoint j({1, 2, 3}, p);
  EXPECT_NEAR(MutualInformation(j), 0.0, 1e-15);
  EXPECT_NEAR(WeightedMutualInformation(j), 0.0, 1e-15);
  for (int a = 0; a < 2; ++a)
    for (int z = 0; z < 3; ++z) EXPECT_NEAR(PointwiseMutualInformation(j, a, z), 0.0, 1e-15);
}

TEST(WmiTest, DeterministicJointIsLogTwo) {
  Eigen::MatrixXd p(2, 2);
  p << 0.5, 0.0, 0.0, 0.5;
  const DiscreteJoint j({1, 1}, p);
  EXPECT_DOUBLE_EQ(MutualInformation(j), std::log(2.0));
  EXPECT_DOUBLE_EQ(WeightedMutualInformation(j), std::log(2.0));
  EXPECT_GT(PointwiseMutualInformation(j, 0, 0), 0.0);
}

TEST(WmiTest, RejectsInvalidJoints) {
  Eigen::MatrixXd p(2, 2);
  p << 0.5, 0.1, 0.1, 0.5;
  EXPECT_THROW(DiscreteJoint({1, 1}, p), UsageError);
  p << 0.5, -0.1, 0.1, 0.5;
  EXPECT_THROW(DiscreteJoint({1, 1}, p), UsageError);
  p << 0.5, 0.0, 0.0, 0.5;
  EXPECT_THROW(DiscreteJoint({1, 1, 1}, p), UsageError);
  Eigen::MatrixXd q(2, 2);
  q << 0.5, 0.5, 0.0, 0.0;
  EXPECT_THROW(PointwiseMutualInformation(DiscreteJoint({1, 2}, q), 1, 0), UsageError);
}

TEST(WmiTest, IllustrativeStatesAtHalf) {
  const DiscreteJoint s1 = IllustrativeState(1, 0.5);
  const DiscreteJoint s2 = IllustrativeState(2, 0.5);
  EXPECT_NEAR(MutualInformation(s1), kMiHalf, 1e-14);
  EXPECT_NEAR(MutualInformation(s2), kMiHalf, 1e-14);
  EXPECT_NEAR(WeightedMutualInformation(s1), kWmiState1Half, 1e-13);
  EXPECT_NEAR(WeightedMutualInformation(s2), kWmiState2Half, 1e-13);
}

TEST(WmiTest, SweepKeepsMiEqualAndOrdersWmi) {
  std::vector<double> grid;
  for (int k = 1; k <= 19; ++k) grid.push_back(0.05 * k);
  for (const SweepRow& r : IllustrativeSweep(grid)) {
    EXPECT_NEAR(r.mi_s1, r.mi_s2, 1e-12) << r.p_a1;
    EXPECT_GT(r.wmi_s2, r.wmi_s1) << r.p_a1;
  }
}

// MI is non-negative on random joints; scaling all outcome values by c
// scales WMI by c and leaves MI unchanged.
TEST(WmiPropertyTest, NonNegativityAndScaling) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const DiscreteJoint j = testing::RandomJoint(4, 8, seed);
    EXPECT_GE(MutualInformation(j), -1e-15);
    std::vector<double> scaled = j.outcomes();
    for (double& z : scaled) z *= 3.5;
    const DiscreteJoint k(scaled, j.p());
    EXPECT_NEAR(MutualInformation(k), MutualInformation(j), 1e-14);
    EXPECT_NEAR(WeightedMutualInformation(k), 3.5 * WeightedMutualInformation(j), 1e-12);
  }
}

TEST(WmiPropertyTest, MonteCarloAgreesWithExact) {
  for (std::uint64_t seed = 100; seed < 103; ++seed) {
    const DiscreteJoint j = testing::RandomJoint(4, 8, seed);
    const double exact = WeightedMutualInformation(j);
    const double mc = testing::MonteCarloWmi(j, 200000, seed + 1);
    EXPECT_NEAR(mc, exact, std::max(0.02 * std::abs(exact), 0.005));
  }
}

TEST(WmiTest, FromConditionals) {
  Eigen::MatrixXd cond(2, 2);
  cond << 1.0, 0.0, 0.0, 1.0;
  const double pa[] = {0.25, 0.75};
  const DiscreteJoint j = DiscreteJoint::FromConditionals({1, 2}, pa, cond);
  EXPECT_DOUBLE_EQ(j.p()(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(j.p()(1, 1), 0.75);
  EXPECT_DOUBLE_EQ(j.outcome_marginal()(1), 0.75);
}

}  // namespace
}  // namespace mace
