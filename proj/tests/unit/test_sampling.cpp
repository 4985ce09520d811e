#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "cmdp/errors.hpp"
#include "cmdp/exact_eval.hpp"
#include "cmdp/sampling.hpp"
#include "support.hpp"

using namespace cmdp;
using cmdp::testing::random_policy;

namespace {

CmdpModel one_state(double cost, double gamma) {
  CmdpModel m;
  m.num_states = 1;
  m.num_actions = 1;
  m.gamma = gamma;
  m.transition = Eigen::MatrixXd::Ones(1, 1);
  m.objective_cost = Eigen::MatrixXd::Constant(1, 1, cost);
  m.constraint_costs = {Eigen::MatrixXd::Constant(1, 1, -cost)};
  m.rho = Eigen::VectorXd::Ones(1);
  return m;
}

// Two-sided Hoeffding half-width for the mean of M draws in an interval of `width`.
double hoeffding(double width, int m, double fail_prob) {
  return width * std::sqrt(std::log(2.0 / fail_prob) / (2.0 * m));
}

std::string csv_of(const RunHistory& h) {
  std::ostringstream os;
  write_history_csv(h, os);
  return os.str();
}

}  // namespace

TEST(Trajectory, LengthZeroIsTheStartPair) {
  const CmdpModel m = generate_random(RandomCmdpSpec{4, 3, 1, 0.8, 1});
  Engine e(3);
  const Trajectory tr = sample_trajectory(m, uniform_policy(4, 3), TrajectoryStart::at(2, 1), 0, e);
  ASSERT_EQ(tr.size(), 1u);
  EXPECT_EQ(tr.states[0], 2);
  EXPECT_EQ(tr.actions[0], 1);
  EXPECT_THROW(sample_trajectory(m, uniform_policy(4, 3), TrajectoryStart::from_rho(), -1, e),
               ParameterError);
}

TEST(Trajectory, DeterministicKernelFollowsTheCycle) {
  // s -> s + 1 mod 3 whatever the action
  CmdpModel m = generate_random(RandomCmdpSpec{3, 2, 0, 0.8, 2});
  m.transition.setZero();
  for (int s = 0; s < 3; ++s)
    for (int a = 0; a < 2; ++a) m.transition(m.row(s, a), (s + 1) % 3) = 1.0;
  Engine e(9);
  const Trajectory tr = sample_trajectory(m, uniform_policy(3, 2), TrajectoryStart::at(1, 0), 6, e);
  ASSERT_EQ(tr.size(), 7u);
  for (int l = 0; l <= 6; ++l) EXPECT_EQ(tr.states[l], (1 + l) % 3);
}

TEST(Trajectory, NextStateFrequenciesMatchKernel) {
  const CmdpModel m = generate_random(RandomCmdpSpec{5, 2, 0, 0.8, 4});
  const TabularPolicy pi = uniform_policy(5, 2);
  const int draws = 100000;
  for (int s = 0; s < 5; ++s) {
    Eigen::VectorXd count = Eigen::VectorXd::Zero(5);
    Engine e(derive_seed(77, {static_cast<std::uint64_t>(s)}));
    for (int j = 0; j < draws; ++j)
      count(sample_trajectory(m, pi, TrajectoryStart::at(s, 1), 1, e).states[1]) += 1.0;
    // Pearson chi-square, 4 degrees of freedom, 0.999 quantile
    double chi2 = 0.0;
    for (int sp = 0; sp < 5; ++sp) {
      const double expect = draws * m.transition(m.row(s, 1), sp);
      chi2 += (count(sp) - expect) * (count(sp) - expect) / expect;
    }
    EXPECT_LT(chi2, 18.47) << "state " << s;
  }
}

TEST(EstimateV, DeterministicChainIsExactTruncatedSeries) {
  const CmdpModel m = one_state(0.5, 0.8);
  const double expect = 0.5 * (1.0 - std::pow(0.8, 50)) / 0.2;
  EXPECT_NEAR(estimate_v(m, uniform_policy(1, 1), m.objective_cost, 3, 50, 11), expect, 1e-13);
  EXPECT_NEAR(estimate_v(m, uniform_policy(1, 1), m.objective_cost, 1, 1, 11), 0.5, 0.0);
  EXPECT_THROW(estimate_v(m, uniform_policy(1, 1), m.objective_cost, 0, 5, 1), ParameterError);
}

TEST(EstimateV, HorizonOneAveragesFirstCost) {
  // cost depends on the state only; rho is a point mass, so every draw sees c(s0)
  CmdpModel m = generate_random(RandomCmdpSpec{4, 3, 0, 0.8, 5});
  m.rho = Eigen::Vector4d(0, 0, 1, 0);
  m.objective_cost.row(2).setConstant(0.37);
  EXPECT_DOUBLE_EQ(estimate_v(m, random_policy(4, 3, 1), m.objective_cost, 25, 1, 3), 0.37);
}

TEST(EstimateV, HoeffdingAcrossRepeats) {
  const CmdpModel m = generate_random(RandomCmdpSpec{5, 3, 1, 0.8, 6});
  const TabularPolicy pi = random_policy(5, 3, 12);
  const double truth = value_at_rho(m, pi, m.objective_cost);
  const int M = 2000, N = 60;
  const double cmax = m.objective_cost.cwiseAbs().maxCoeff();
  const double width = 2.0 * cmax * (1.0 - std::pow(m.gamma, N)) / (1.0 - m.gamma);
  const double bias = cmax * std::pow(m.gamma, N) / (1.0 - m.gamma);
  const double tol = hoeffding(width, M, 0.01) + bias;
  int misses = 0;
  for (std::uint64_t r = 0; r < 100; ++r)
    if (std::abs(estimate_v(m, pi, m.objective_cost, M, N, 1000 + r) - truth) > tol) ++misses;
  // P(Binomial(100, 0.01) > 5) < 1e-3
  EXPECT_LE(misses, 5);
}

TEST(EstimateV, SameSeedReplays) {
  const CmdpModel m = generate_random(RandomCmdpSpec{5, 3, 2, 0.8, 7});
  const TabularPolicy pi = random_policy(5, 3, 2);
  const Eigen::VectorXd a = estimate_values(m, pi, m.constraint_costs, 50, 20, 42);
  const Eigen::VectorXd b = estimate_values(m, pi, m.constraint_costs, 50, 20, 42);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, estimate_values(m, pi, m.constraint_costs, 50, 20, 43));
  EXPECT_EQ(a(1), estimate_v(m, pi, m.constraint_costs[1], 50, 20, 42));
}

TEST(EstimateQ, SamePolicyAddsOnlyTheAnchorTerm) {
  const CmdpModel m = generate_random(RandomCmdpSpec{4, 3, 1, 0.8, 8});
  const TabularPolicy pi = random_policy(4, 3, 3);
  const Eigen::MatrixXd plain = estimate_q_reg(m, pi, pi, m.objective_cost, 0.0, 30, 15, 5);
  const Eigen::MatrixXd reg = estimate_q_reg(m, pi, pi, m.objective_cost, 0.7, 30, 15, 5);
  EXPECT_LE((reg - plain + 0.7 * pi.log_probs()).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(EstimateQ, UnregularisedMatchesExactQ) {
  const CmdpModel m = generate_random(RandomCmdpSpec{5, 3, 1, 0.8, 9});
  const TabularPolicy pi = random_policy(5, 3, 4);
  const int M = 4000, N = 80;
  const Eigen::MatrixXd q = estimate_q_reg(m, pi, pi, m.objective_cost, 0.0, M, N, 6);
  const Eigen::MatrixXd exact = policy_value(m, pi, m.objective_cost).q;
  const double cmax = m.objective_cost.cwiseAbs().maxCoeff();
  const double tol = hoeffding(2.0 * cmax / (1.0 - m.gamma), M, 1e-4) +
                     cmax * std::pow(m.gamma, N) / (1.0 - m.gamma);
  EXPECT_LE((q - exact).lpNorm<Eigen::Infinity>(), tol);
}

TEST(EstimateQ, RegularisedMatchesExactWithinEpsilon) {
  const CmdpModel m = generate_random(RandomCmdpSpec{5, 3, 1, 0.8, 10});
  const TabularPolicy anchor = random_policy(5, 3, 5);
  const TabularPolicy current = random_policy(5, 3, 6, 0.5);
  const double alpha = 0.5, eps = 0.1;
  const StepBudget b = schedule_params(eps, 0.1, m.gamma, 1.0, 10);
  const Eigen::MatrixXd q = estimate_q_reg(m, current, anchor, m.objective_cost, alpha, 10000, b.n_q, 8);
  const Eigen::MatrixXd exact =
      regularized_value(m, current, anchor, m.objective_cost, alpha).q;
  // per-step reward c + alpha KL, truncated after N_Q steps
  const double step_max = m.objective_cost.cwiseAbs().maxCoeff() +
                          alpha * statewise_kl(current, anchor).maxCoeff();
  const double tol = hoeffding(2.0 * step_max / (1.0 - m.gamma), 10000, 1e-4) +
                     step_max * std::pow(m.gamma, b.n_q) / (1.0 - m.gamma);
  EXPECT_LE((q - exact).lpNorm<Eigen::Infinity>(), tol);
  EXPECT_LE(tol, 10.0 * eps);
}

TEST(Schedule, WorkedExample) {
  const StepBudget b = schedule_params(0.1, 0.1, 0.8, 0.0, schedule_macro_steps(0.1));
  EXPECT_EQ(schedule_macro_steps(0.1), 10);
  EXPECT_EQ(b.n_v, 11);
  EXPECT_EQ(b.inner_steps, 12);  // ceil(log 10 / 0.2)
  EXPECT_DOUBLE_EQ(b.delta_prime, 0.1 / (10.0 * 13.0));
  EXPECT_EQ(b.m_v, static_cast<int>(std::ceil(std::log(1.0 / b.delta_prime) / 0.01)));
}

TEST(Schedule, HalvingEpsilonScalesBudgets) {
  const StepBudget a = schedule_params(0.1, 0.1, 0.8, 0.0, schedule_macro_steps(0.1));
  const StepBudget b = schedule_params(0.05, 0.1, 0.8, 0.0, schedule_macro_steps(0.05));
  EXPECT_EQ(schedule_macro_steps(0.05), 2 * schedule_macro_steps(0.1));
  const double log_ratio = std::log(1.0 / b.delta_prime) / std::log(1.0 / a.delta_prime);
  EXPECT_NEAR(static_cast<double>(b.m_v) / a.m_v, 4.0 * log_ratio, 0.01);
  EXPECT_GE(b.m_v, 4 * a.m_v - 4);
}

TEST(Schedule, UnionBoundStaysBelowDelta) {
  for (double eps : {0.5, 0.2, 0.1, 0.03})
    for (double lam : {0.0, 3.0, 40.0}) {
      const int K = schedule_macro_steps(eps);
      const StepBudget b = schedule_params(eps, 0.05, 0.9, lam, K);
      EXPECT_LE(K * (b.inner_steps + 1) * b.delta_prime, 0.05 * (1.0 + 1e-12));
    }
}

TEST(Schedule, RejectsBadArguments) {
  EXPECT_THROW(schedule_params(0.0, 0.1, 0.8, 0.0, 5), ParameterError);
  EXPECT_THROW(schedule_params(0.1, 1.0, 0.8, 0.0, 5), ParameterError);
  EXPECT_THROW(schedule_params(0.1, 0.1, 0.8, 0.0, 0), ParameterError);
  EXPECT_THROW(schedule_macro_steps(1.5), ParameterError);
}

TEST(Schedule, GoodEventFrequency) {
  // fraction of V estimates at the scheduled budget that miss by more than eps
  const CmdpModel m = generate_random(RandomCmdpSpec{5, 3, 1, 0.5, 11});
  const double eps = 0.15, delta = 0.2;
  const StepBudget b = schedule_params(eps, delta, m.gamma, 0.0, schedule_macro_steps(eps));
  int misses = 0;
  const int repeats = 60;
  for (std::uint64_t r = 0; r < repeats; ++r) {
    const TabularPolicy pi = random_policy(5, 3, 500 + r);
    const double truth = value_at_rho(m, pi, m.constraint_costs[0]);
    if (std::abs(estimate_v(m, pi, m.constraint_costs[0], b.m_v, b.n_v, 900 + r) - truth) > eps)
      ++misses;
  }
  EXPECT_LE(static_cast<double>(misses) / repeats, delta + 0.05);
}

TEST(PmdPdA, QueryCountMatchesClosedForm) {
  const CmdpModel m = generate_random(RandomCmdpSpec{3, 2, 1, 0.35, 12});
  SampleConfig cfg;
  cfg.epsilon = 0.3;
  cfg.seed = 4;
  SampleRunLog log;
  const RunHistory h = run_pmd_pd_a(m, cfg, &log);
  EXPECT_EQ(static_cast<int>(h.size()), schedule_macro_steps(0.3));
  EXPECT_EQ(log.queries, log.closed_form_queries());
  EXPECT_EQ(static_cast<int>(log.budgets.size()), static_cast<int>(h.size()));
  ASSERT_TRUE(h.back().queries_cumulative.has_value());
  EXPECT_EQ(*h.back().queries_cumulative, log.queries);
  ASSERT_TRUE(h.back().estimates.has_value());
}

TEST(PmdPdA, SameSeedReplaysByteForByte) {
  const CmdpModel m = generate_random(RandomCmdpSpec{3, 2, 1, 0.35, 13});
  SampleConfig cfg;
  cfg.epsilon = 0.3;
  cfg.seed = 21;
  const std::string a = csv_of(run_pmd_pd_a(m, cfg));
  EXPECT_EQ(a, csv_of(run_pmd_pd_a(m, cfg)));
  cfg.seed = 22;
  EXPECT_NE(a, csv_of(run_pmd_pd_a(m, cfg)));
}

TEST(PmdPdA, LargeBudgetTracksExactRun) {
  const CmdpModel m = generate_random(RandomCmdpSpec{3, 2, 1, 0.35, 14});
  SampleConfig cfg;
  cfg.epsilon = 0.3;
  cfg.seed = 5;
  cfg.constants.m_v = 1200.0;
  cfg.constants.m_q = 1200.0;
  SampleRunLog log;
  const RunHistory sampled = run_pmd_pd_a(m, cfg, &log);
  const int t = log.budgets.front().inner_steps;
  for (const StepBudget& b : log.budgets) ASSERT_EQ(b.inner_steps, t);
  ASSERT_GE(log.budgets.front().m_q, 100000);

  const TheoremParams p = theorem_params(m, 1.0, static_cast<int>(sampled.size()), 0.0);
  PmdPdConfig ex;
  ex.macro_steps = static_cast<int>(sampled.size());
  ex.alpha = p.alpha;
  ex.eta = p.eta;
  ex.inner_steps = t;
  const RunHistory exact = run_pmd_pd(m, ex);
  for (std::size_t k = 0; k < exact.size(); ++k)
    EXPECT_LE((sampled.records()[k].values - exact.records()[k].values).lpNorm<Eigen::Infinity>(),
              2.0 * cfg.epsilon)
        << k;
}
