#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "combcast/errors.hpp"
#include "combcast/pso.hpp"
#include "combcast/regression.hpp"
#include "combcast/stacking.hpp"
#include "combcast/types.hpp"

namespace combcast {

enum class Method { stacked_equal, stacked_ti, stacked_tv, stacked_opt, emos, qra, sqra };

/// "stacked-equal", "stacked-ti", "stacked-tv", "stacked-opt", "emos", "qra", "sqra".
std::string_view method_name(Method method);
std::optional<Method> parse_method(std::string_view name);
std::vector<Method> all_methods();

struct RunConfig {
  int train_window = 20;
  int horizon = 14;
  double decay = 0.9;
  std::vector<double> quantiles = default_quantile_grid();
  std::uint64_t seed = 42;
  /// Let stacking use models whose training window is shorter than the others'.
  bool include_incomplete = false;
  MixtureScore opt_score = MixtureScore::crps;
  /// Swarm size and iteration budget for every PSO fit; seed and bounds are set per fit.
  PsoConfig pso;

  StackingConfig stacking() const { return StackingConfig{decay, train_window, horizon}; }
};

struct QraParameters {
  QraCoefficients coefficients;
  /// Empty for plain QRA.
  SqraShift shifts;
};

/// Stacking methods carry one weight vector per lead (a single one when lead-independent).
using MethodParameters = std::variant<std::vector<WeightVector>, EmosCoefficients, QraParameters>;

struct CombinationResult {
  Method method;
  Date as_of;
  std::vector<QuantileForecast> forecasts;
  MethodParameters parameters;
  std::vector<ModelId> models_used;
  /// Seed handed to PSO (0 for methods that do not search).
  std::uint64_t fit_seed = 0;
};

/// PSO seed for one fit, mixed from the run seed, method, series and date so
/// that fits do not share random streams. SQRA uses the QRA stream.
std::uint64_t derive_fit_seed(std::uint64_t seed, Method method, const SeriesKey& key, Date as_of);

/// Combines the deliveries issued on `as_of` for one series.
///
/// Training windows cover the `train_window` days before `as_of`. Throws
/// DataError if no delivery on `as_of` covers the series, and
/// InsufficientDataError if the method has nothing to train on.
CombinationResult combine(Method method, const SeriesKey& key, std::span<const ForecastDelivery> deliveries,
                          const ObservationSeries& observations, Date as_of, const RunConfig& config,
                          Diagnostics* diagnostics = nullptr);

}  // namespace combcast
