// Copyright 2026 The robustpsr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "robustpsr/duals.hpp"
#include "robustpsr/instances.hpp"
#include "robustpsr/lp.hpp"
#include "robustpsr/robust_values.hpp"

namespace {

using namespace robustpsr;

// Dense random LP: minimize c.x s.t. Ax = b, x >= 0, built around a feasible
// interior point so phase one always succeeds.
void BM_LpSolve(benchmark::State& state) {
  int rows = static_cast<int>(state.range(0));
  int cols = 2 * rows;
  Rng rng(7);
  LinearProgram lp;
  lp.num_vars = cols;
  std::vector<double> x0(cols);
  for (int j = 0; j < cols; ++j) x0[j] = rng.uniform() + 0.1;
  lp.c.resize(cols);
  for (int j = 0; j < cols; ++j) lp.c[j] = rng.uniform() - 0.5;
  for (int i = 0; i < rows; ++i) {
    std::vector<double> row(cols);
    double rhs = 0.0;
    for (int j = 0; j < cols; ++j) {
      row[j] = rng.uniform();
      rhs += row[j] * x0[j];
    }
    lp.a_eq.push_back(std::move(row));
    lp.b_eq.push_back(rhs);
  }
  for (auto _ : state) {
    LpSolution solution = simplex_lp_solve(lp);
    benchmark::DoNotOptimize(solution.value);
  }
}
BENCHMARK(BM_LpSolve)->Arg(8)->Arg(16)->Arg(32);

void BM_RobustValueT(benchmark::State& state) {
  Dims dims{static_cast<int>(state.range(0)), 2, 2};
  TabularModel model = random_model(dims, 11);
  Policy policy = random_policy(dims, 12);
  RewardSpec reward = random_reward(dims, 13);
  UncertaintySpec spec{SetKind::kT, Divergence::kTV, 0.1};
  for (auto _ : state) {
    RobustValueReport report = robust_value_t(model, policy, reward, spec);
    benchmark::DoNotOptimize(report.value);
  }
}
BENCHMARK(BM_RobustValueT)->Arg(2)->Arg(3)->Arg(4);

void BM_PTvDual(benchmark::State& state) {
  Dims dims{static_cast<int>(state.range(0)), 2, 2};
  TabularModel model = random_model(dims, 21);
  Policy policy = random_policy(dims, 22);
  RewardSpec reward = random_reward(dims, 23);
  PTvOptions options;
  options.iterations = 2000;
  for (auto _ : state) {
    DualSolution sol = p_tv_dual(model, policy, reward, 0.1, options);
    benchmark::DoNotOptimize(sol.value);
  }
}
BENCHMARK(BM_PTvDual)->Arg(2)->Arg(3);

void BM_PTvPrimal(benchmark::State& state) {
  Dims dims{static_cast<int>(state.range(0)), 2, 2};
  TabularModel model = random_model(dims, 31);
  Policy policy = random_policy(dims, 32);
  RewardSpec reward = random_reward(dims, 33);
  for (auto _ : state) {
    PTvPrimalResult result = p_tv_primal(model, policy, reward, 0.1);
    benchmark::DoNotOptimize(result.value);
  }
}
BENCHMARK(BM_PTvPrimal)->Arg(2)->Arg(3);

}  // namespace

BENCHMARK_MAIN();
