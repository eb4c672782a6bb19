// Serial reference vs OpenMP kernels. Arg(0) is the serial path, Arg(n) uses
// n workers.
#include <benchmark/benchmark.h>

#include <omp.h>

#include "lossbar/dataset.hpp"
#include "lossbar/landscape.hpp"
#include "lossbar/mlp.hpp"
#include "lossbar/oracle.hpp"
#include "lossbar/pathopt.hpp"
#include "lossbar/trainer.hpp"

using namespace lossbar;

namespace {

Exec exec_for(const benchmark::State& state) {
  return state.range(0) == 0 ? Exec::serial() : Exec{static_cast<int>(state.range(0))};
}

std::shared_ptr<const Dataset> moons() {
  static auto data = std::make_shared<const Dataset>(make_two_moons(2000, 0.1, 3));
  return data;
}

void BM_MlpGradient(benchmark::State& state) {
  MlpSpec spec{{2, 16, 16, 16, 2}, Activation::Relu};
  MlpField field(spec, moons(), {}, exec_for(state));
  ParamVector x(field.dim(), 0.05);
  ParamVector g(field.dim());
  for (auto _ : state) {
    field.gradient(x.span(), g.span());
    benchmark::DoNotOptimize(g[0]);
  }
}

void BM_PathStepReference(benchmark::State& state) {
  MlpField field(MlpSpec{{2, 16, 16, 2}, Activation::Relu}, moons());
  ParamVector a(field.dim(), -0.3), b(field.dim(), 0.4);
  for (auto _ : state) {
    auto path = straight_path(a, b, 19);
    step_reference(path, field, 1e-3, 1e-5);
    benchmark::DoNotOptimize(path.points[1][0]);
  }
}

void BM_PathStep(benchmark::State& state) {
  MlpField field(MlpSpec{{2, 16, 16, 2}, Activation::Relu}, moons());
  ParamVector a(field.dim(), -0.3), b(field.dim(), 0.4);
  for (auto _ : state) {
    auto path = straight_path(a, b, 19);
    step_inplace(path, field, 1e-3, 1e-5, {}, exec_for(state));
    benchmark::DoNotOptimize(path.points[1][0]);
  }
}

void BM_GridSample(benchmark::State& state) {
  const auto field = make_builtin(Builtin::GaussianMixture2d, 7);
  for (auto _ : state) {
    auto grid = oracle::grid_sample(*field, {{-3.5, 3.5}, {-3.5, 3.5}}, {512, 512}, exec_for(state));
    benchmark::DoNotOptimize(grid.values.data());
  }
}

void BM_SampleMinima(benchmark::State& state) {
  const auto field = make_builtin(Builtin::GaussianMixture2d, 7);
  TrainConfig cfg;
  for (auto _ : state) {
    auto m = sample_minima(*field, 16, 1, 1.5, cfg, exec_for(state));
    benchmark::DoNotOptimize(m.data());
  }
}

void workers(benchmark::internal::Benchmark* b) {
  b->Arg(0);
  for (int w = 2; w <= omp_get_max_threads(); w *= 2) b->Arg(w);
}

}  // namespace

BENCHMARK(BM_MlpGradient)->Apply(workers)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_PathStepReference)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_PathStep)->Apply(workers)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GridSample)->Apply(workers)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SampleMinima)->Apply(workers)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
