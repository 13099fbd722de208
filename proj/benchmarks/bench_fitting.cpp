#include <benchmark/benchmark.h>

#include <chrono>
#include <random>
#include <vector>

#include "combcast/distfit.hpp"
#include "combcast/pipeline.hpp"
#include "combcast/regression.hpp"
#include "combcast/synthetic.hpp"

using namespace combcast;

namespace {

const SeriesKey kKey{"London", "hospital_prev"};

Date day(int d) { return Date{std::chrono::year{2021} / std::chrono::January / 1} + std::chrono::days{d}; }

std::map<ModelId, TrainingWindow> qra_windows(int models) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> e(0, 1);
  const auto grid = default_quantile_grid();
  std::map<ModelId, TrainingWindow> out;
  std::vector<double> y;
  for (int t = 0; t < 20; ++t) y.push_back(200 + 5 * t + 10 * e(rng));
  for (int k = 0; k < models; ++k) {
    ModelId id{"m" + std::to_string(k)};
    TrainingWindow w{id, kKey, day(20), 20, {}, std::nullopt};
    for (int t = 0; t < 20; ++t) {
      const double centre = 200 + 5 * t + 15 * e(rng) + 5 * k;
      std::vector<double> v;
      for (double z : {-1.64, -1.15, -0.67, 0.0, 0.67, 1.15, 1.64}) v.push_back(centre + 12 * z);
      w.pairs.push_back(TrainingPair{QuantileForecast(kKey, day(t), grid, v), y[t], day(t)});
    }
    out.emplace(id, std::move(w));
  }
  return out;
}

}  // namespace

static void BM_FitSkewNormal(benchmark::State& state) {
  const QuantileForecast f(kKey, day(0), {0.05, 0.25, 0.5, 0.75, 0.95}, {70, 90, 100, 115, 150});
  for (auto _ : state) benchmark::DoNotOptimize(fit_skewnormal(f));
}
BENCHMARK(BM_FitSkewNormal)->Unit(benchmark::kMillisecond);

static void BM_FitQra(benchmark::State& state) {
  const auto windows = qra_windows(static_cast<int>(state.range(0)));
  const auto grid = default_quantile_grid();
  PsoConfig pso;
  pso.seed = 5;
  for (auto _ : state) benchmark::DoNotOptimize(fit_qra(windows, grid, pso));
}
BENCHMARK(BM_FitQra)->DenseRange(2, 6, 2)->Unit(benchmark::kMillisecond);

static void BM_Combine(benchmark::State& state) {
  const auto data = generate(default_scenario(42));
  const auto& [key, obs] = *data.observations.begin();
  const Date as_of = Date{std::chrono::year{2020} / std::chrono::April / 19};
  const auto method = static_cast<Method>(state.range(0));
  RunConfig config;
  for (auto _ : state) benchmark::DoNotOptimize(combine(method, key, data.deliveries, obs, as_of, config));
  state.SetLabel(std::string(method_name(method)));
}
BENCHMARK(BM_Combine)->DenseRange(0, 6)->Unit(benchmark::kMillisecond);
