// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "ermbridge/fixed_point.hpp"
#include "ermbridge/potential.hpp"
#include "ermbridge/rng.hpp"

namespace {

using namespace ermbridge;

PointCloud gauss_cloud(std::size_t n, int d, std::uint64_t seed) {
  SplitMix64 rng(seed);
  PointCloud c(n, d);
  for (double& v : c.coords) v = rng.next_gauss();
  return c;
}

void BM_logsumexp(benchmark::State& state) {
  SplitMix64 rng(1);
  std::vector<double> values(state.range(0));
  for (double& v : values) v = rng.next_uniform(-30.0, 0.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(logsumexp(values));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_logsumexp)->Arg(256)->Arg(2048)->Arg(16384);

void BM_empirical_map_batch(benchmark::State& state) {
  const std::size_t n = state.range(0);
  const PointCloud x = gauss_cloud(n, 2, 2);
  const PointCloud y = gauss_cloud(n, 2, 3);
  std::vector<double> logs(n, 0.0);
  const TablePotential g(y, logs);
  KernelParams k{2, 1.0};
  for (auto _ : state)
    benchmark::DoNotOptimize(
        empirical_fixed_point_map_batch(y, x, y, g, k, ClipBounds::inactive()));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_empirical_map_batch)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_risk_gradient_step(benchmark::State& state) {
  const std::size_t b = state.range(0);
  const PointCloud x = gauss_cloud(b, 2, 4);
  const PointCloud y = gauss_cloud(b, 2, 5);
  MlpPotential p(2, 64, 6);
  KernelParams k{2, 0.25};
  RiskConfig cfg;
  for (auto _ : state)
    benchmark::DoNotOptimize(param_gradient(p, x, y, k, cfg));
  state.SetItemsProcessed(state.iterations() * b * b);
}
BENCHMARK(BM_risk_gradient_step)->Arg(256)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
