// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "ermbridge/rng.hpp"
#include "ermbridge/sampler.hpp"

namespace {

using namespace ermbridge;

DriftContext make_context(std::size_t refs) {
  SplitMix64 rng(7);
  PointCloud targets(refs, 2);
  for (double& v : targets.coords) v = rng.next_gauss();
  DriftContext ctx;
  ctx.targets = std::move(targets);
  ctx.log_phi.assign(refs, 0.0);
  ctx.schedule = SdeSchedule{1.0, 100, 0.5, 0.0, ScheduleKind::Constant};
  return ctx;
}

void BM_drift(benchmark::State& state) {
  const DriftContext ctx = make_context(state.range(0));
  std::vector<double> out(2), scratch(ctx.targets.size());
  const double x[2] = {0.2, -0.4};
  for (auto _ : state) {
    drift(x, 0.37, ctx, out, scratch);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_drift)->Arg(500)->Arg(2000)->Arg(8000);

void BM_trajectory(benchmark::State& state) {
  const DriftContext ctx = make_context(2000);
  const double x0[2] = {0.1, 0.1};
  std::uint64_t stream = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(euler_maruyama(x0, ctx, SplitMix64(4, ++stream)));
  state.SetItemsProcessed(state.iterations() * ctx.schedule.steps *
                          ctx.targets.size());
}
BENCHMARK(BM_trajectory)->Unit(benchmark::kMillisecond);

}  // namespace
