#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "combcast/distfit.hpp"
#include "combcast/scoring.hpp"

using namespace combcast;

static void BM_CrpsSamples(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 1);
  std::vector<double> samples(static_cast<std::size_t>(state.range(0)));
  for (auto& s : samples) s = n(rng);
  for (auto _ : state) benchmark::DoNotOptimize(crps_samples(samples, 0.3));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CrpsSamples)->RangeMultiplier(10)->Range(100, 1000000)->Complexity(benchmark::oNLogN);

static void BM_CrpsFromQuantiles(benchmark::State& state) {
  const auto levels = default_quantile_grid();
  const std::vector<double> values = {80, 88, 93, 100, 107, 112, 120};
  for (auto _ : state) benchmark::DoNotOptimize(crps_from_quantiles(levels, values, 104.0));
}
BENCHMARK(BM_CrpsFromQuantiles);

static void BM_SkewNormalQuantile(benchmark::State& state) {
  const SkewNormalParams p{100.0, 20.0, 4.0};
  double a = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(skewnormal_quantile(p, a));
    a = a > 0.98 ? 0.01 : a + 0.01;
  }
}
BENCHMARK(BM_SkewNormalQuantile);

static void BM_MixtureQuantiles(benchmark::State& state) {
  const auto grid = default_quantile_grid();
  std::vector<ComponentDistribution> components;
  std::vector<double> weights;
  for (int k = 0; k < state.range(0); ++k) {
    std::vector<double> v;
    for (double z : {-1.64, -1.15, -0.67, 0.0, 0.67, 1.15, 1.64}) v.push_back(100 + 10 * k + (8 + k) * z);
    components.push_back(ComponentDistribution(PiecewiseLinearQuantiles(grid, v)));
    weights.push_back(1.0 / static_cast<double>(state.range(0)));
  }
  for (auto _ : state) benchmark::DoNotOptimize(mixture_quantiles(components, weights, grid));
}
BENCHMARK(BM_MixtureQuantiles)->DenseRange(2, 8, 2);
