#include <benchmark/benchmark.h>

#include "sphirf/kernels.hpp"
#include "sphirf/sphere_math.hpp"

using namespace sphirf;

static void BM_LegendreSequence(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(legendre_p_sequence(L, 0.37));
}
BENCHMARK(BM_LegendreSequence)->Arg(16)->Arg(256)->Arg(2000);

static void BM_Harmonics(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SpherePoint p(1.1, 0.4);
  for (auto _ : state) benchmark::DoNotOptimize(real_spherical_harmonics(n, p));
}
BENCHMARK(BM_Harmonics)->Arg(2)->Arg(9)->Arg(33);

static void BM_IcfCore(benchmark::State& state) {
  const ModelSpec spec(kAllFamilies[state.range(0)], 0.8, 0.1);
  double psi = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(icf_core(spec, 1, psi, 2));
    psi = psi > 3.0 ? 0.0 : psi + 0.013;
  }
  state.SetLabel(std::string(family_name(spec.family())));
}
BENCHMARK(BM_IcfCore)->DenseRange(0, 6);

static void BM_IntegratedBlock(benchmark::State& state) {
  const ModelSpec spec = ModelSpec::generating_function(0.8, 0.1);
  const IntegratedKernel kernel(spec, IntrinsicSpec::with_defaults(1, 1), 20);
  Eigen::MatrixXd out(21, 21);
  double psi = 0.0;
  for (auto _ : state) {
    kernel.block_into(psi, out);
    benchmark::DoNotOptimize(out.data());
    psi = psi > 3.0 ? 0.0 : psi + 0.013;
  }
}
BENCHMARK(BM_IntegratedBlock);

BENCHMARK_MAIN();
