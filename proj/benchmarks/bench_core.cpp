#include <benchmark/benchmark.h>

#include "cmdp/exact_eval.hpp"
#include "cmdp/ground_truth.hpp"
#include "cmdp/model.hpp"
#include "cmdp/pmd_pd.hpp"
#include "cmdp/sampling.hpp"

namespace {

cmdp::CmdpModel instance(int states, int actions) {
  cmdp::RandomCmdpSpec spec;
  spec.num_states = states;
  spec.num_actions = actions;
  spec.seed = 11;
  return cmdp::generate_random(spec);
}

void BM_PolicyValue(benchmark::State& state) {
  const auto model = instance(static_cast<int>(state.range(0)), 10);
  const auto pi = cmdp::uniform_policy(model.num_states, model.num_actions);
  for (auto _ : state) benchmark::DoNotOptimize(cmdp::policy_value(model, pi, model.objective_cost));
}
BENCHMARK(BM_PolicyValue)->Arg(20)->Arg(50)->Arg(100);

void BM_RegularizedValue(benchmark::State& state) {
  const auto model = instance(20, 10);
  const auto ref = cmdp::uniform_policy(20, 10);
  const auto pi = cmdp::npg_step(ref, model.objective_cost, 1.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(cmdp::regularized_value(model, pi, ref, model.objective_cost, 0.5));
}
BENCHMARK(BM_RegularizedValue);

void BM_SolveLp(benchmark::State& state) {
  const auto model = instance(static_cast<int>(state.range(0)), 10);
  for (auto _ : state) benchmark::DoNotOptimize(cmdp::solve_lp(model));
}
BENCHMARK(BM_SolveLp)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_DualBisection(benchmark::State& state) {
  const auto model = instance(20, 10);
  for (auto _ : state) benchmark::DoNotOptimize(cmdp::dual_bisection(model));
}
BENCHMARK(BM_DualBisection)->Unit(benchmark::kMillisecond);

void BM_PmdPdTheorem(benchmark::State& state) {
  const auto model = instance(20, 10);
  cmdp::PmdPdConfig cfg;
  cfg.macro_steps = static_cast<int>(state.range(0));
  cfg.check_inner_optimality = false;
  for (auto _ : state) benchmark::DoNotOptimize(cmdp::run_pmd_pd(model, cfg));
}
BENCHMARK(BM_PmdPdTheorem)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_EstimateQ(benchmark::State& state) {
  const auto model = instance(5, 3);
  const auto pi = cmdp::uniform_policy(5, 3);
  const int m = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(cmdp::estimate_q_reg(model, pi, pi, model.objective_cost, 1.0, m, 10, 3));
  state.SetItemsProcessed(state.iterations() * m * 10 * 15);
}
BENCHMARK(BM_EstimateQ)->Arg(100)->Arg(1000);

}  // namespace
BENCHMARK_MAIN();
