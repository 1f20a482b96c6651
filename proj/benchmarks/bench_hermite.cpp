// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "ermbridge/hermite.hpp"

namespace {

using namespace ermbridge;

void BM_hermite_function_table(benchmark::State& state) {
  const int degree = state.range(0);
  std::vector<double> out(degree + 1);
  double x = -3.0;
  for (auto _ : state) {
    hermite_function_table(degree, x, out);
    benchmark::DoNotOptimize(out.data());
    x = x < 3.0 ? x + 1e-3 : -3.0;
  }
}
BENCHMARK(BM_hermite_function_table)->Arg(12)->Arg(40);

void BM_basis_eval_all(benchmark::State& state) {
  HermiteBasis basis = make_hermite_basis(12, 2, 1.0);
  std::vector<double> out(basis.indexset.count());
  const double y[2] = {0.3, -0.7};
  for (auto _ : state) {
    basis.eval_all(y, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_basis_eval_all);

void BM_gauss_hermite_rule(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(gauss_hermite(state.range(0)));
}
BENCHMARK(BM_gauss_hermite_rule)->Arg(64)->Arg(96);

void BM_project_coefficients(benchmark::State& state) {
  HermiteBasis basis = make_hermite_basis(12, 2, 1.0);
  const auto f = [](std::span<const double> y) {
    return std::exp(-0.5 * (y[0] * y[0] + y[1] * y[1]));
  };
  for (auto _ : state)
    benchmark::DoNotOptimize(project_coefficients(f, basis, 48));
}
BENCHMARK(BM_project_coefficients)->Unit(benchmark::kMillisecond);

}  // namespace
