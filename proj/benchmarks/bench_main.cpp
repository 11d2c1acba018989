// Copyright 2026 The tailscope Authors
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

#include <tailscope/estimate.hpp>
#include <tailscope/kernel.hpp>
#include <tailscope/random.hpp>
#include <tailscope/schedule.hpp>
#include <tailscope/sgdsim.hpp>
#include <tailscope/tailindex.hpp>

#include <vector>

namespace tailscope {
namespace {

KernelContext& quadrature_context() {
  static KernelContext ctx(GaussianDataModel{1.0, 10, 10}, [] {
    KernelOptions o;
    o.rho_samples = 20000;
    o.seed = 1;
    return o;
  }());
  return ctx;
}

void BM_StepKernelQuadrature(benchmark::State& state) {
  const StepKernel k(KernelSource::quadrature({1.0, 10, 10}), 0.5);
  double s = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(k.h(s).value);
    s = s == 1.0 ? 3.7 : 1.0;
  }
}
BENCHMARK(BM_StepKernelQuadrature);

void BM_StepKernelMonteCarlo(benchmark::State& state) {
  const StepKernel k(KernelSource::monte_carlo({1.0, 10, 10}, state.range(0), 3), 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(k.h(2.5).value);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_StepKernelMonteCarlo)->Arg(10000)->Arg(100000);

void BM_RootConstant(benchmark::State& state) {
  const ScheduleKernel k = kernel_constant(0.8, quadrature_context());
  for (auto _ : state) benchmark::DoNotOptimize(find_tail_index(k).alpha);
}
BENCHMARK(BM_RootConstant)->Unit(benchmark::kMillisecond);

void BM_RootMarkovLinearSystem(benchmark::State& state) {
  const Schedule s = Schedule::markov_folded({0.8, 0.05, static_cast<int>(state.range(0))}, 0.7);
  const ScheduleKernel k = kernel_markov_linear_system(s, quadrature_context());
  for (auto _ : state) benchmark::DoNotOptimize(find_tail_index(k).alpha);
}
BENCHMARK(BM_RootMarkovLinearSystem)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_SgdStep(benchmark::State& state) {
  const int b = static_cast<int>(state.range(0));
  const int d = static_cast<int>(state.range(1));
  RandomStream rng(5);
  std::vector<double> a(std::size_t(b) * d), y(b), x(d, 0.0);
  for (auto& v : a) v = rng.normal();
  for (auto& v : y) v = rng.normal();
  for (auto _ : state) {
    sgd_step(x, a.data(), y.data(), b, 1e-3);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_SgdStep)->Args({1, 1})->Args({10, 10})->Args({10, 100});

void BM_BlockEstimator(benchmark::State& state) {
  RandomStream rng(9);
  const std::vector<double> xs =
      sample_stable({1.5, 1.0}, static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_alpha_blocks(xs).alpha);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BlockEstimator)->Arg(10000)->Arg(100000);

}  // namespace
}  // namespace tailscope

BENCHMARK_MAIN();
