#include <benchmark/benchmark.h>

#include <random>

#include "sphirf/estimation.hpp"
#include "sphirf/field_sim.hpp"

using namespace sphirf;

static SampledField noise_field(int n, int T) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd v(n, T);
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = normal(rng);
  std::vector<long> times(T);
  for (int t = 0; t < T; ++t) times[t] = t;
  return SampledField(uniform_sphere_points(n, rng), times, v);
}

static void BM_MomEstimate(benchmark::State& state) {
  const SampledField f = noise_field(static_cast<int>(state.range(0)), 24);
  const BinSpec bins = BinSpec::defaults();
  for (auto _ : state) benchmark::DoNotOptimize(mom_estimate(f, bins));
}
BENCHMARK(BM_MomEstimate)->Arg(300)->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);

static void BM_TruncateHarmonics(benchmark::State& state) {
  const SampledField f = noise_field(1000, 24);
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(truncate_harmonics(f, n));
}
BENCHMARK(BM_TruncateHarmonics)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_FitExactTable(benchmark::State& state) {
  const MoMTable table = theoretical_table(ModelSpec::generating_function(0.8, 0.1), 1, 1.0, BinSpec::defaults());
  for (auto _ : state) benchmark::DoNotOptimize(fit(table, 1));
}
BENCHMARK(BM_FitExactTable)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
