#include <cmath>

#include <gtest/gtest.h>

#include "cmdp/errors.hpp"
#include "cmdp/exact_eval.hpp"
#include "cmdp/pmd_pd.hpp"
#include "support.hpp"

using namespace cmdp;
using cmdp::testing::random_cost;
using cmdp::testing::random_policy;

namespace {

CmdpModel one_state(double c, double gamma) {
  CmdpModel m;
  m.num_states = 1;
  m.num_actions = 1;
  m.gamma = gamma;
  m.transition = Eigen::MatrixXd::Ones(1, 1);
  m.objective_cost = Eigen::MatrixXd::Constant(1, 1, c);
  m.rho = Eigen::VectorXd::Ones(1);
  return m;
}

CmdpModel random_model(int S, int A, std::uint64_t seed, double gamma = 0.8) {
  return generate_random(RandomCmdpSpec{S, A, 1, gamma, seed});
}

}  // namespace

TEST(PolicyValue, OneStateGeometricSeries) {
  const CmdpModel m = one_state(0.5, 0.8);
  const EvalBundle b = policy_value(m, uniform_policy(1, 1), m.objective_cost);
  EXPECT_NEAR(b.v(0), 2.5, 1e-14);
  EXPECT_NEAR(b.v_rho, 2.5, 1e-14);
}

TEST(PolicyValue, ZeroDiscountIsOneStepCost) {
  const CmdpModel m = random_model(5, 3, 1, 0.0);
  const TabularPolicy pi = random_policy(5, 3, 2);
  const EvalBundle b = policy_value(m, pi, m.objective_cost);
  const Eigen::VectorXd expect = (pi.probabilities().array() * m.objective_cost.array()).rowwise().sum();
  EXPECT_LE((b.v - expect).lpNorm<Eigen::Infinity>(), 1e-15);
}

TEST(PolicyValue, DeterministicTwoCycle) {
  CmdpModel m;
  m.num_states = 2;
  m.num_actions = 1;
  m.gamma = 0.5;
  m.transition = Eigen::MatrixXd(2, 2);
  m.transition << 0, 1, 1, 0;
  m.objective_cost = Eigen::Vector2d(1.0, -1.0);
  m.rho = Eigen::Vector2d(1.0, 0.0);
  const EvalBundle b = policy_value(m, uniform_policy(2, 1), m.objective_cost);
  // truncated series 1 - 0.5 + 0.25 - ... to 1e-12
  double series = 0.0, term = 1.0;
  while (std::abs(term) > 1e-16) {
    series += term;
    term *= -0.5;
  }
  EXPECT_NEAR(b.v(0), series, 1e-12);
  EXPECT_NEAR(b.v(0), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(b.v(1), -2.0 / 3.0, 1e-12);
}

TEST(PolicyValue, AgreesWithFixedPointIteration) {
  for (std::uint64_t k = 0; k < 5; ++k) {
    const CmdpModel m = random_model(8, 4, k, 0.9);
    const TabularPolicy pi = random_policy(8, 4, 10 + k);
    const EvalBundle b = policy_value(m, pi, m.objective_cost);
    const Eigen::VectorXd ref = cmdp::testing::series_value(m, pi.probabilities(), m.objective_cost);
    EXPECT_LE((b.v - ref).lpNorm<Eigen::Infinity>(), 1e-11);
  }
}

TEST(PolicyValue, BellmanIdentitiesAndBound) {
  const CmdpModel m = random_model(10, 5, 3, 0.95);
  const TabularPolicy pi = random_policy(10, 5, 4);
  const EvalBundle b = policy_value(m, pi, m.objective_cost);
  EXPECT_LE(bellman_residual(m, pi, m.objective_cost, b.v), 1e-9);
  const Eigen::VectorXd vq = (pi.probabilities().array() * b.q.array()).rowwise().sum();
  EXPECT_LE((vq - b.v).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_LE(b.v.cwiseAbs().maxCoeff(), m.objective_cost.cwiseAbs().maxCoeff() / (1.0 - m.gamma));
}

TEST(PolicyValue, AllValuesMatchesIndividualSolves) {
  const CmdpModel m = generate_random(RandomCmdpSpec{6, 3, 3, 0.8, 5});
  const TabularPolicy pi = random_policy(6, 3, 6);
  const Eigen::VectorXd all = all_values(m, pi);
  ASSERT_EQ(all.size(), 4);
  EXPECT_NEAR(all(0), value_at_rho(m, pi, m.objective_cost), 1e-13);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(all(i + 1), value_at_rho(m, pi, m.constraint_costs[i]), 1e-13);
}

TEST(PolicyValue, ShapeMismatchIsRejected) {
  const CmdpModel m = random_model(3, 2, 1);
  EXPECT_THROW(policy_value(m, uniform_policy(3, 3), m.objective_cost), ValidationError);
}

TEST(Visitation, OneStateEqualsPolicy) {
  CmdpModel m = one_state(0.0, 0.7);
  m.num_actions = 3;
  m.transition = Eigen::MatrixXd::Ones(3, 1);
  m.objective_cost = Eigen::MatrixXd::Zero(1, 3);
  const TabularPolicy pi = random_policy(1, 3, 1);
  EXPECT_LE((visitation(m, pi).d - pi.probabilities()).lpNorm<Eigen::Infinity>(), 1e-15);
}

TEST(Visitation, ZeroDiscountIsStartDistribution) {
  CmdpModel m = random_model(4, 3, 2, 0.0);
  m.rho << 0.1, 0.2, 0.3, 0.4;
  const TabularPolicy pi = random_policy(4, 3, 2);
  const Eigen::MatrixXd d = visitation(m, pi).d;
  for (int s = 0; s < 4; ++s)
    for (int a = 0; a < 3; ++a) EXPECT_NEAR(d(s, a), m.rho(s) * pi.prob(s, a), 1e-15);
}

TEST(Visitation, ValueDualityAndFlow) {
  const CmdpModel m = random_model(5, 3, 7);
  const TabularPolicy pi = random_policy(5, 3, 8);
  const VisitationDistribution d = visitation(m, pi);
  EXPECT_NEAR(d.d.sum(), 1.0, 1e-12);
  EXPECT_GE(d.d.minCoeff(), 0.0);
  EXPECT_LE(flow_residual(m, d.d), 1e-9);
  for (std::uint64_t k = 0; k < 10; ++k) {
    const Eigen::MatrixXd c = random_cost(5, 3, 100 + k);
    EXPECT_NEAR((d.d.array() * c.array()).sum() / (1.0 - m.gamma), value_at_rho(m, pi, c), 1e-9);
  }
}

TEST(RegularizedValue, ReferenceEqualsPolicyDropsKl) {
  const CmdpModel m = random_model(5, 3, 9);
  const TabularPolicy pi = random_policy(5, 3, 1);
  const EvalBundle r = regularized_value(m, pi, pi, m.objective_cost, 3.0);
  EXPECT_LE((r.v - policy_value(m, pi, m.objective_cost).v).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(RegularizedValue, ZeroAlphaIsPlainValue) {
  const CmdpModel m = random_model(5, 3, 10);
  const TabularPolicy pi = random_policy(5, 3, 2), ref = random_policy(5, 3, 3);
  const EvalBundle r = regularized_value(m, pi, ref, m.objective_cost, 0.0);
  const EvalBundle p = policy_value(m, pi, m.objective_cost);
  EXPECT_LE((r.v - p.v).lpNorm<Eigen::Infinity>(), 1e-13);
  EXPECT_LE((r.q - p.q).lpNorm<Eigen::Infinity>(), 1e-13);
}

TEST(RegularizedValue, QDefinitionAndRowAverage) {
  const CmdpModel m = random_model(4, 3, 11);
  const TabularPolicy pi = random_policy(4, 3, 5), ref = random_policy(4, 3, 6);
  const double alpha = 0.7;
  const EvalBundle r = regularized_value(m, pi, ref, m.objective_cost, alpha);
  // v(s) = Sum_a pi (q - alpha log(1/pi)) when q carries alpha log(1/ref)
  const Eigen::MatrixXd p = pi.probabilities();
  const Eigen::VectorXd vq =
      (p.array() * (r.q.array() + alpha * pi.log_probs().array())).rowwise().sum();
  EXPECT_LE((vq - r.v).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(RegularizedValue, SandwichAtRegularisedOptimum) {
  for (std::uint64_t k = 0; k < 5; ++k) {
    const CmdpModel m = random_model(5, 3, 20 + k);
    const TabularPolicy ref = random_policy(5, 3, 30 + k);
    const double alpha = 0.5;
    const TabularPolicy star = solve_regularized(m, ref, m.objective_cost, alpha);
    const Eigen::VectorXd plain_star = policy_value(m, star, m.objective_cost).v;
    const Eigen::VectorXd reg_star = regularized_value(m, star, ref, m.objective_cost, alpha).v;
    const Eigen::VectorXd reg_ref = regularized_value(m, ref, ref, m.objective_cost, alpha).v;
    const Eigen::VectorXd plain_ref = policy_value(m, ref, m.objective_cost).v;
    EXPECT_GE((reg_star - plain_star).minCoeff(), -1e-10);
    EXPECT_GE((reg_ref - reg_star).minCoeff(), -1e-10);
    EXPECT_LE((reg_ref - plain_ref).lpNorm<Eigen::Infinity>(), 1e-12);
    // soft value iteration is an independent route to the same optimum
    const auto soft = cmdp::testing::soft_value_iteration(m, ref.log_probs(), m.objective_cost, alpha);
    EXPECT_LE((soft.v - reg_star).lpNorm<Eigen::Infinity>(), 1e-9);
  }
}

TEST(RegularizedValue, VeryPeakedReferenceIsAccepted) {
  const CmdpModel m = random_model(3, 2, 12);
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(3, 2);
  l(0, 1) = -5000.0;
  const TabularPolicy ref = TabularPolicy::from_logits(l);
  const EvalBundle r = regularized_value(m, ref, ref, m.objective_cost, 0.2);
  EXPECT_TRUE(r.v.allFinite());
  EXPECT_TRUE(r.q.allFinite());
}
