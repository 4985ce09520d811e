#include <gtest/gtest.h>

#include "cmdp/divergence.hpp"
#include "cmdp/errors.hpp"
#include "cmdp/exact_eval.hpp"
#include "cmdp/pmd_pd.hpp"
#include "support.hpp"

using namespace cmdp;
using cmdp::testing::random_policy;

TEST(PseudoKl, SelfDivergenceIsZero) {
  const CmdpModel m = generate_random(RandomCmdpSpec{5, 3, 1, 0.8, 1});
  const VisitationDistribution d = visitation(m, random_policy(5, 3, 1));
  EXPECT_NEAR(pseudo_kl(d, d), 0.0, 1e-15);
}

TEST(PseudoKl, EqualsExpectedKlUnderFirstMarginal) {
  for (std::uint64_t k = 0; k < 10; ++k) {
    const CmdpModel m = generate_random(RandomCmdpSpec{5, 3, 1, 0.8, 10 + k});
    const TabularPolicy p1 = random_policy(5, 3, 2 * k), p2 = random_policy(5, 3, 2 * k + 1);
    const VisitationDistribution d1 = visitation(m, p1), d2 = visitation(m, p2);
    EXPECT_NEAR(pseudo_kl(d1, d2), expected_kl(d1.marginal(), p1, p2), 1e-10);
    EXPECT_GE(pseudo_kl(d1, d2), 0.0);
  }
}

TEST(PseudoKl, BregmanIdentity) {
  for (std::uint64_t k = 0; k < 10; ++k) {
    const CmdpModel m = generate_random(RandomCmdpSpec{5, 3, 1, 0.9, 40 + k});
    const VisitationDistribution d1 = visitation(m, random_policy(5, 3, 60 + k, 2.0));
    const VisitationDistribution d2 = visitation(m, random_policy(5, 3, 80 + k, 2.0));
    EXPECT_NEAR(pseudo_kl(d1, d2), occupancy_bregman(d1, d2), 1e-9);
  }
}

TEST(PseudoKl, SupportViolationNamesState) {
  VisitationDistribution d1, d2;
  d1.d = Eigen::MatrixXd(2, 2);
  d2.d = Eigen::MatrixXd(2, 2);
  d1.d << 0.25, 0.25, 0.25, 0.25;
  d2.d << 0.5, 0.0, 0.25, 0.25;
  try {
    pseudo_kl(d1, d2);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("state 0"), std::string::npos);
  }
}

TEST(PseudoKl, ZeroWhenConditionalsAgreeOnSupport) {
  VisitationDistribution d1, d2;
  d1.d = Eigen::MatrixXd(2, 2);
  d2.d = Eigen::MatrixXd(2, 2);
  d1.d << 0.3, 0.1, 0.0, 0.0;
  d2.d << 0.15, 0.05, 0.4, 0.4;
  EXPECT_NEAR(pseudo_kl(d1, d2), 0.0, 1e-15);
}

TEST(VisitationDistance, BoundHoldsOnRandomPairs) {
  for (std::uint64_t inst = 0; inst < 3; ++inst) {
    const CmdpModel m = generate_random(RandomCmdpSpec{6, 3, 1, 0.8, 500 + inst});
    for (std::uint64_t k = 0; k < 100; ++k) {
      const TabularPolicy a = random_policy(6, 3, 1000 * inst + 2 * k, 1.5);
      const TabularPolicy b = random_policy(6, 3, 1000 * inst + 2 * k + 1, 1.5);
      const double l1 = (visitation(m, a).d - visitation(m, b).d).cwiseAbs().sum();
      EXPECT_LE(l1, visitation_distance_bound(m, a, b) + 1e-12);
    }
  }
}

TEST(VisitationDistance, IdenticalPoliciesGiveZero) {
  const CmdpModel m = generate_random(RandomCmdpSpec{4, 2, 1, 0.8, 3});
  const TabularPolicy a = random_policy(4, 2, 1);
  EXPECT_EQ(visitation_distance_bound(m, a, a), 0.0);
}

TEST(Pushback, HoldsAroundRegularisedOptimum) {
  const CmdpModel m = generate_random(RandomCmdpSpec{4, 3, 1, 0.8, 7});
  const TabularPolicy ref = random_policy(4, 3, 5);
  const double alpha = 0.8;
  const TabularPolicy star = solve_regularized(m, ref, m.objective_cost, alpha, 1e-12);
  const double slack = 1e-9;
  EXPECT_EQ(pushback_residual(m, m.objective_cost, star, star, ref, alpha, slack), 0.0);
  EXPECT_EQ(pushback_residual(m, m.objective_cost, star, ref, ref, alpha, slack), 0.0);
  for (std::uint64_t k = 0; k < 20; ++k) {
    const TabularPolicy any = random_policy(4, 3, 100 + k, 2.0);
    EXPECT_EQ(pushback_residual(m, m.objective_cost, star, any, ref, alpha, slack), 0.0) << k;
  }
}

TEST(Pushback, DetectsNonOptimalMinimiser) {
  const CmdpModel m = generate_random(RandomCmdpSpec{4, 3, 1, 0.8, 8});
  const TabularPolicy ref = random_policy(4, 3, 5);
  const TabularPolicy star = solve_regularized(m, ref, m.objective_cost, 0.8, 1e-12);
  const TabularPolicy bad = random_policy(4, 3, 77, 3.0);
  EXPECT_GT(pushback_residual(m, m.objective_cost, bad, star, ref, 0.8, 0.0), 0.0);
}
