#include <benchmark/benchmark.h>

#include "sphirf/field_sim.hpp"

using namespace sphirf;

static void BM_AssembleCovariance(benchmark::State& state) {
  const ModelSpec spec = ModelSpec::generating_function(0.8, 0.1);
  const IntrinsicSpec in = IntrinsicSpec::with_defaults(1, 1);
  const auto pts = fibonacci_points(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_covariance(spec, in, pts, 20));
  state.SetLabel(std::to_string(state.range(0) * 20) + " rows");
}
BENCHMARK(BM_AssembleCovariance)->Arg(50)->Arg(150)->Arg(300)->Unit(benchmark::kMillisecond);

static void BM_SimulateIrf(benchmark::State& state) {
  const ModelSpec spec = ModelSpec::generating_function(0.8, 0.1);
  const IntrinsicSpec in = IntrinsicSpec::with_defaults(1, 1);
  GridSpec grid;
  grid.n_locations = static_cast<int>(state.range(0));
  grid.T = 20;
  grid.seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_irf(spec, in, grid));
}
BENCHMARK(BM_SimulateIrf)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
