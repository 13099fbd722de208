#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "combcast/types.hpp"

namespace combcast {

enum class TruthKind { logistic_wave, piecewise_linear, noisy_random_walk };

/// Latent epidemic curve plus Gaussian observation noise, truncated at zero.
struct TruthProcess {
  TruthKind kind = TruthKind::logistic_wave;
  /// Level the curve starts from and decays back to.
  double base = 50.0;
  /// Height of the wave above `base` at `peak_day`.
  double peak = 800.0;
  double peak_day = 60.0;
  double growth_rate = 0.08;
  /// Observation noise sd; also the one-day-ahead predictive sd of a calibrated forecaster.
  double noise_sd = 20.0;
  /// (day, value) knots for piecewise_linear; held flat beyond the ends.
  std::vector<std::pair<int, double>> knots;
  /// Daily step sd and drift for noisy_random_walk, started at `base`.
  double step_sd = 10.0;
  double drift = 0.0;
};

struct Jump {
  int day;
  double magnitude;
};

/// A forecaster that knows the latent curve up to lead-dependent error.
///
/// At lead h its centre is the latent value plus N(0, noise_sd^2 (h - 1))
/// error and `bias`, and its quantiles follow a skew-normal spread of
/// `spread` x noise_sd x sqrt(h) with the same median. With bias 0, spread 1
/// and skew 0 its intervals have nominal coverage of the observations.
struct ForecasterArchetype {
  ModelId model;
  double bias = 0.0;
  double spread = 1.0;
  double skew = 0.0;
  /// Deliveries issued on or after the jump day are offset by its magnitude.
  std::optional<Jump> jump;
  /// Days between deliveries.
  int cadence = 7;
  /// First delivery day; later than 0 models a newly introduced forecaster.
  int start_day = 0;
};

struct SyntheticSeries {
  SeriesKey key;
  TruthProcess truth;
};

struct SyntheticConfig {
  std::uint64_t seed = 1;
  Date start_date = Date{std::chrono::year{2020} / std::chrono::March / 1};
  int days = 120;
  int horizon = 14;
  /// Minimum history the scenario must allow before one forecast window.
  int training_days = 20;
  std::vector<double> quantiles = default_quantile_grid();
  std::vector<SyntheticSeries> series;
  std::vector<ForecasterArchetype> archetypes;
};

struct SyntheticData {
  ObservationSet observations;
  /// Sorted by model, then delivery date.
  std::vector<ForecastDelivery> deliveries;
  /// Noise-free curve per series, one value per day.
  std::map<SeriesKey, std::vector<double>> latent;
};

/// Deterministic for a given config. Throws std::invalid_argument on an
/// inconsistent grid, too few days, or an invalid archetype.
SyntheticData generate(const SyntheticConfig& config);

/// Single-series convenience form.
SyntheticData generate(const SeriesKey& key, const TruthProcess& truth, std::span<const ForecasterArchetype> archetypes,
                       int days, int horizon, std::span<const double> quantiles, std::uint64_t seed);

/// Four archetypes (calibrated, biased, jump, late starter) over two series.
SyntheticConfig default_scenario(std::uint64_t seed);

}  // namespace combcast
