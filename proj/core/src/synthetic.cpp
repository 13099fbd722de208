#include "combcast/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "combcast/distfit.hpp"
#include "combcast/normal.hpp"

namespace combcast {

namespace {

std::uint64_t fnv1a(std::string_view text, std::uint64_t hash = 0xcbf29ce484222325ULL) {
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::string_view a, std::string_view b = {}) {
  return splitmix64(seed ^ fnv1a(b, fnv1a(a)));
}

void validate(const SyntheticConfig& config) {
  if (config.horizon < 1) throw std::invalid_argument("synthetic: horizon must be positive");
  if (config.days < config.training_days + config.horizon) {
    throw std::invalid_argument("synthetic: days must be at least training_days + horizon");
  }
  if (config.quantiles.empty()) throw std::invalid_argument("synthetic: empty quantile grid");
  for (std::size_t i = 0; i < config.quantiles.size(); ++i) {
    const double l = config.quantiles[i];
    if (!(l > 0.0 && l < 1.0)) throw std::invalid_argument("synthetic: quantile level outside (0, 1)");
    if (i > 0 && !(l > config.quantiles[i - 1])) throw std::invalid_argument("synthetic: quantile grid not increasing");
  }
  for (const auto& a : config.archetypes) {
    if (a.model.value.empty()) throw std::invalid_argument("synthetic: archetype without model id");
    if (!(a.spread > 0.0)) throw std::invalid_argument("synthetic: spread multiplier must be positive");
    if (a.cadence < 1) throw std::invalid_argument("synthetic: cadence must be positive");
    if (a.start_day < 0) throw std::invalid_argument("synthetic: negative start day");
  }
  for (std::size_t i = 0; i < config.archetypes.size(); ++i) {
    for (std::size_t j = i + 1; j < config.archetypes.size(); ++j) {
      if (config.archetypes[i].model == config.archetypes[j].model) {
        throw std::invalid_argument("synthetic: duplicate model id " + config.archetypes[i].model.value);
      }
    }
  }
}

std::vector<double> latent_curve(const TruthProcess& truth, int days, std::mt19937_64& rng) {
  std::vector<double> mu(static_cast<std::size_t>(days));
  switch (truth.kind) {
    case TruthKind::logistic_wave:
      for (int t = 0; t < days; ++t) {
        const double e = std::exp(-truth.growth_rate * (t - truth.peak_day));
        mu[static_cast<std::size_t>(t)] = truth.base + truth.peak * 4.0 * e / ((1.0 + e) * (1.0 + e));
      }
      break;
    case TruthKind::piecewise_linear: {
      if (truth.knots.empty()) throw std::invalid_argument("synthetic: piecewise-linear truth needs knots");
      auto knots = truth.knots;
      std::sort(knots.begin(), knots.end());
      for (int t = 0; t < days; ++t) {
        double v = knots.front().second;
        if (t >= knots.back().first) {
          v = knots.back().second;
        } else if (t > knots.front().first) {
          const auto hi = std::upper_bound(knots.begin(), knots.end(), t,
                                           [](int day, const auto& k) { return day < k.first; });
          const auto lo = hi - 1;
          const double frac = static_cast<double>(t - lo->first) / static_cast<double>(hi->first - lo->first);
          v = lo->second + frac * (hi->second - lo->second);
        }
        mu[static_cast<std::size_t>(t)] = v;
      }
      break;
    }
    case TruthKind::noisy_random_walk: {
      std::normal_distribution<double> step(truth.drift, truth.step_sd);
      double level = truth.base;
      for (int t = 0; t < days; ++t) {
        mu[static_cast<std::size_t>(t)] = level;
        level = std::max(0.0, level + step(rng));
      }
      break;
    }
  }
  for (double& v : mu) v = std::max(0.0, v);
  return mu;
}

}  // namespace

SyntheticData generate(const SyntheticConfig& config) {
  validate(config);
  SyntheticData data;
  std::map<ModelId, std::map<Date, ForecastDelivery>> by_model;

  for (const auto& series : config.series) {
    const std::string label = series.key.label();
    std::mt19937_64 truth_rng(stream_seed(config.seed, label));
    auto mu = latent_curve(series.truth, config.days, truth_rng);

    std::normal_distribution<double> noise(0.0, series.truth.noise_sd);
    ObservationSeries obs(series.key);
    for (int t = 0; t < config.days; ++t) {
      obs.add(config.start_date + std::chrono::days{t}, std::max(0.0, mu[static_cast<std::size_t>(t)] + noise(truth_rng)));
    }
    data.observations.emplace(series.key, std::move(obs));

    for (const auto& archetype : config.archetypes) {
      // Standardized offsets of each level from the median under the archetype's skew.
      const SkewNormalParams shape{0.0, 1.0, archetype.skew};
      const double z_median = skewnormal_quantile(shape, 0.5);
      std::vector<double> z;
      for (double l : config.quantiles) z.push_back(skewnormal_quantile(shape, l) - z_median);

      std::mt19937_64 rng(stream_seed(config.seed, label, archetype.model.value));
      std::normal_distribution<double> unit(0.0, 1.0);
      auto& deliveries = by_model[archetype.model];
      // Every cadence slot draws its errors, delivered or not, so later
      // deliveries do not depend on start_day or the jump.
      for (int d = 0; d + config.horizon <= config.days; d += archetype.cadence) {
        const bool delivered = d >= archetype.start_day;
        const double jump = archetype.jump && d >= archetype.jump->day ? archetype.jump->magnitude : 0.0;
        const Date issued = config.start_date + std::chrono::days{d};
        for (int h = 1; h <= config.horizon; ++h) {
          const double error = unit(rng) * series.truth.noise_sd * std::sqrt(static_cast<double>(h - 1));
          if (!delivered) continue;
          const int target = d + h - 1;
          const double centre = mu[static_cast<std::size_t>(target)] + error + archetype.bias + jump;
          const double sd = archetype.spread * series.truth.noise_sd * std::sqrt(static_cast<double>(h));
          std::vector<double> values;
          for (double zi : z) values.push_back(std::max(0.0, centre + sd * zi));
          auto it = deliveries.find(issued);
          if (it == deliveries.end()) it = deliveries.emplace(issued, ForecastDelivery(archetype.model, issued)).first;
          it->second.add(QuantileForecast(series.key, issued + std::chrono::days{h - 1}, config.quantiles, std::move(values)));
        }
      }
    }
    data.latent.emplace(series.key, std::move(mu));
  }

  for (auto& [_, deliveries] : by_model) {
    for (auto& [__, d] : deliveries) data.deliveries.push_back(std::move(d));
  }
  return data;
}

SyntheticData generate(const SeriesKey& key, const TruthProcess& truth, std::span<const ForecasterArchetype> archetypes,
                       int days, int horizon, std::span<const double> quantiles, std::uint64_t seed) {
  SyntheticConfig config;
  config.seed = seed;
  config.days = days;
  config.horizon = horizon;
  config.quantiles.assign(quantiles.begin(), quantiles.end());
  config.series = {SyntheticSeries{key, truth}};
  config.archetypes.assign(archetypes.begin(), archetypes.end());
  return generate(config);
}

SyntheticConfig default_scenario(std::uint64_t seed) {
  SyntheticConfig config;
  config.seed = seed;

  TruthProcess wave;
  TruthProcess walk;
  walk.kind = TruthKind::noisy_random_walk;
  walk.base = 300.0;
  walk.step_sd = 8.0;
  walk.drift = 1.0;
  walk.noise_sd = 15.0;
  config.series = {
      SyntheticSeries{SeriesKey{"London", "hospital_prev"}, wave},
      SyntheticSeries{SeriesKey{"Scotland", "icu_prev"}, walk},
  };

  ForecasterArchetype calibrated;
  calibrated.model = ModelId{"calibrated"};
  ForecasterArchetype biased;
  biased.model = ModelId{"biased"};
  biased.bias = 60.0;
  biased.spread = 1.5;
  biased.skew = 2.0;
  ForecasterArchetype jumper;
  jumper.model = ModelId{"jumper"};
  jumper.jump = Jump{77, 300.0};
  ForecasterArchetype late;
  late.model = ModelId{"late"};
  late.start_day = 84;
  config.archetypes = {calibrated, biased, jumper, late};
  return config;
}

}  // namespace combcast
