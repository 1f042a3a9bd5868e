#include <benchmark/benchmark.h>

#include "netgame/benchmark.hpp"
#include "netgame/experiments.hpp"
#include "netgame/general_model.hpp"
#include "netgame/planner.hpp"
#include "netgame/sensitivity.hpp"

namespace {

using namespace netgame;

void BM_SolveEquilibrium(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PlannerInstance inst = sample_planner_instance(1, n, LinkSign::kMixed);
  const Intervention iv = Intervention::zero(n);
  long iterations = 0;
  for (auto _ : state) {
    const EquilibriumReport rep = solve_equilibrium(inst.params, iv);
    iterations = rep.iterations;
    benchmark::DoNotOptimize(rep.profile.a.data());
  }
  state.counters["br_rounds"] = static_cast<double>(iterations);
}
BENCHMARK(BM_SolveEquilibrium)->DenseRange(2, 10, 4)->Arg(20)->Arg(40);

void BM_SolveGeneralEquilibrium(benchmark::State& state) {
  const double gamma = state.range(0) / 10.0, kappa = state.range(1) / 10.0;
  const GeneralInstance inst = sample_general_instance(1, 4, gamma, kappa, LinkSign::kNonNegative);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_general_equilibrium(inst.spec, inst.params, Intervention::zero(4)).profile.a.data());
  }
}
BENCHMARK(BM_SolveGeneralEquilibrium)->Args({20, 10})->Args({30, 5})->Args({15, 20});

void BM_Sensitivity(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PlannerInstance inst = sample_planner_instance(2, n, LinkSign::kMixed);
  const Intervention iv = Intervention::zero(n);
  const EquilibriumReport rep = solve_equilibrium(inst.params, iv);
  for (auto _ : state) {
    const SensitivityReport sens = d_welfare(inst.welfare, inst.params, iv, rep);
    benchmark::DoNotOptimize(sens.dW_dsigma.data());
  }
}
BENCHMARK(BM_Sensitivity)->DenseRange(2, 10, 4)->Arg(20);

void BM_PlannerGradient(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PlannerInstance inst = sample_planner_instance(3, n, LinkSign::kMixed);
  const EndogenousPlannerProblem prob(inst.params, inst.welfare);
  const Vector x = Vector::Constant(prob.dimension(), 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(prob.evaluate(x, true).welfare_grad.data());
}
BENCHMARK(BM_PlannerGradient)->DenseRange(2, 10, 4);

void BM_Optimize(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PlannerInstance inst = sample_planner_instance(4, n, LinkSign::kMixed);
  for (auto _ : state) {
    benchmark::DoNotOptimize(optimize_intervention(inst.params, inst.welfare, inst.budget).welfare_value);
  }
}
BENCHMARK(BM_Optimize)->DenseRange(2, 8, 2)->Unit(benchmark::kMillisecond);

void BM_OptimizeBenchmarkModel(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PlannerInstance inst = sample_benchmark_instance(4, n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(optimize_benchmark(inst.params, inst.welfare, inst.budget).welfare_value);
  }
}
BENCHMARK(BM_OptimizeBenchmarkModel)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_GridOracle(benchmark::State& state) {
  const PlannerInstance inst = sample_planner_instance(5, 2, LinkSign::kMixed);
  const EndogenousPlannerProblem prob(inst.params, inst.welfare);
  const double step = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(grid_search_oracle(prob, inst.budget, SubsidyMode::kFull, step).welfare);
  }
}
BENCHMARK(BM_GridOracle)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_Example1Row(benchmark::State& state) {
  Example1Config cfg;
  cfg.n_min = cfg.n_max = static_cast<int>(state.range(0));
  cfg.replications = 1;
  cfg.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(run_example1(cfg).front().ratio);
}
BENCHMARK(BM_Example1Row)->Arg(2)->Arg(6)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
