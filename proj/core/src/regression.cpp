#include "combcast/regression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "combcast/distfit.hpp"
#include "combcast/normal.hpp"
#include "combcast/scoring.hpp"
#include "combcast/training.hpp"

namespace combcast {

namespace {

struct RegressionData {
  std::vector<ModelId> models;
  std::vector<Date> dates;
  std::vector<double> observed;
};

RegressionData select_training_data(const std::map<ModelId, TrainingWindow>& windows, const char* method) {
  RegressionData data;
  data.models = complete_window_models(windows);
  if (!data.models.empty()) data.dates = common_training_dates(windows, data.models);
  if (data.dates.size() < kMinRegressionDays) {
    throw InsufficientDataError(std::string(method) + " needs at least " + std::to_string(kMinRegressionDays) +
                                " complete training days, found " + std::to_string(data.dates.size()) +
                                "; use stacked-equal for models without training history");
  }
  const auto& reference = windows.at(data.models.front());
  for (const Date d : data.dates) data.observed.push_back(reference.find(d)->observed);
  return data;
}

double median_of(const QuantileForecast& f) {
  if (const auto m = f.median()) return *m;
  const double half[] = {0.5};
  return *complete_quantiles(f, half).median();
}

double mean_abs(std::span<const double> xs) {
  double total = 0.0;
  for (double x : xs) total += std::abs(x);
  return xs.empty() ? 0.0 : total / static_cast<double>(xs.size());
}

double population_sd(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size()));
}

std::vector<double> aligned_quantiles(const QuantileForecast& f, std::span<const double> levels) {
  const QuantileForecast completed = complete_quantiles(f, levels);
  std::vector<double> out;
  out.reserve(levels.size());
  for (double l : levels) out.push_back(*completed.value_at(l));
  return out;
}

std::vector<std::vector<double>> baseline_positions(std::size_t k, std::size_t extra_dims, double extra_value) {
  std::vector<std::vector<double>> out;
  std::vector<double> equal(k, 1.0 / static_cast<double>(k));
  equal.resize(k + extra_dims, extra_value);
  out.push_back(std::move(equal));
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> unit(k, 0.0);
    unit[i] = 1.0;
    unit.resize(k + extra_dims, extra_value);
    out.push_back(std::move(unit));
  }
  return out;
}

}  // namespace

double EmosCoefficients::variance(double spread) const { return std::max(c + d * spread * spread, variance_floor); }

EnsembleStats EnsembleStats::from_medians(std::map<ModelId, double> medians) {
  std::vector<double> values;
  for (const auto& [_, m] : medians) values.push_back(m);
  const double spread = population_sd(values);
  return EnsembleStats{std::move(medians), spread};
}

EmosCoefficients fit_emos(const std::map<ModelId, TrainingWindow>& windows, const PsoConfig& settings,
                          const RegressionBounds& bounds) {
  const RegressionData data = select_training_data(windows, "EMOS");
  const std::size_t k = data.models.size();
  const std::size_t n = data.dates.size();

  std::vector<std::vector<double>> medians(n, std::vector<double>(k));
  std::vector<double> spread(n);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t j = 0; j < k; ++j) medians[t][j] = median_of(windows.at(data.models[j]).find(data.dates[t])->forecast);
    spread[t] = population_sd(medians[t]);
  }

  const double scale = std::max(mean_abs(data.observed), 1.0);
  const double floor = bounds.relative_variance_floor * scale * scale;
  const double obs_sd = population_sd(data.observed);
  const double c_max = std::max(std::pow(bounds.c_sd_multiple * obs_sd, 2.0), floor);

  // x = (b_1..b_K, c, d)
  auto objective = [&](std::span<const double> x) {
    double total = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      double mean = 0.0;
      for (std::size_t j = 0; j < k; ++j) mean += x[j] * medians[t][j];
      const double var = std::max(x[k] + x[k + 1] * spread[t] * spread[t], floor);
      total += crps_gaussian(mean, std::sqrt(var), data.observed[t]);
    }
    return total / static_cast<double>(n);
  };

  PsoConfig config = settings;
  config.bounds.assign(k, Bounds{0.0, bounds.slope_max});
  config.bounds.push_back(Bounds{0.0, c_max});
  config.bounds.push_back(Bounds{0.0, bounds.d_max});
  config.initial_positions = baseline_positions(k, 2, 0.0);
  for (auto& p : config.initial_positions) p[k] = std::min(obs_sd * obs_sd, c_max);
  const PsoResult best = minimize(objective, config);

  EmosCoefficients out;
  for (std::size_t j = 0; j < k; ++j) out.slopes[data.models[j]] = best.best_position[j];
  out.c = best.best_position[k];
  out.d = best.best_position[k + 1];
  out.variance_floor = floor;
  out.training_crps = best.best_value;
  return out;
}

QuantileForecast predict_emos(const EmosCoefficients& coeffs, const EnsembleStats& stats, const SeriesKey& key,
                              Date target_date, std::span<const double> levels) {
  double mean = coeffs.intercept;
  for (const auto& [model, b] : coeffs.slopes) {
    const auto it = stats.medians.find(model);
    if (it == stats.medians.end()) {
      if (b == 0.0) continue;
      throw DataError("EMOS prediction is missing the median of model " + model.value);
    }
    mean += b * it->second;
  }
  const double sd = std::sqrt(coeffs.variance(stats.spread));
  std::vector<double> values;
  values.reserve(levels.size());
  for (double l : levels) values.push_back(mean + sd * normal_quantile(l));
  return QuantileForecast(key, target_date, std::vector<double>(levels.begin(), levels.end()), std::move(values));
}

double qra_objective(std::span<const QraTrainingDay> days, std::span<const double> levels,
                     std::span<const double> slopes) {
  double total = 0.0;
  for (const auto& day : days) {
    for (std::size_t l = 0; l < levels.size(); ++l) {
      double q = 0.0;
      for (std::size_t j = 0; j < slopes.size(); ++j) q += slopes[j] * day.model_quantiles[j][l];
      total += quantile_score(q, levels[l], day.observed);
    }
  }
  return total;
}

QraCoefficients fit_qra(const std::map<ModelId, TrainingWindow>& windows, std::span<const double> levels,
                        const PsoConfig& settings, const RegressionBounds& bounds, Diagnostics* diagnostics) {
  if (levels.empty()) throw std::invalid_argument("fit_qra: no quantile levels");
  const RegressionData data = select_training_data(windows, "QRA");
  const std::size_t k = data.models.size();

  std::vector<QraTrainingDay> days;
  days.reserve(data.dates.size());
  for (std::size_t t = 0; t < data.dates.size(); ++t) {
    QraTrainingDay day{{}, data.observed[t]};
    for (const auto& model : data.models) {
      day.model_quantiles.push_back(aligned_quantiles(windows.at(model).find(data.dates[t])->forecast, levels));
    }
    days.push_back(std::move(day));
  }

  auto objective = [&](std::span<const double> b) { return qra_objective(days, levels, b); };

  PsoConfig config = settings;
  config.bounds.assign(k, Bounds{0.0, bounds.slope_max});
  config.initial_positions = baseline_positions(k, 0, 0.0);
  PsoResult best = minimize(objective, config);

  for (const auto& baseline : baseline_positions(k, 0, 0.0)) {
    const double v = objective(baseline);
    if (v < best.best_value) {
      warn(diagnostics, "QRA fit was beaten by a baseline slope vector; using the baseline");
      best.best_value = v;
      best.best_position = baseline;
    }
  }

  QraCoefficients out;
  for (std::size_t j = 0; j < k; ++j) out.slopes[data.models[j]] = best.best_position[j];
  out.training_objective = best.best_value;
  return out;
}

QuantileForecast predict_qra(const QraCoefficients& coeffs, const std::map<ModelId, QuantileForecast>& forecasts,
                             std::span<const double> levels, Diagnostics* diagnostics) {
  if (levels.empty()) throw std::invalid_argument("predict_qra: no quantile levels");
  std::vector<double> values(levels.size(), 0.0);
  const QuantileForecast* reference = nullptr;
  for (const auto& [model, b] : coeffs.slopes) {
    const auto it = forecasts.find(model);
    if (it == forecasts.end()) {
      if (b == 0.0) continue;
      throw DataError("QRA prediction is missing a forecast from model " + model.value);
    }
    if (reference != nullptr && it->second.target_date() != reference->target_date()) {
      throw std::invalid_argument("predict_qra: covariate forecasts have different target dates");
    }
    reference = &it->second;
    const auto q = aligned_quantiles(it->second, levels);
    for (std::size_t l = 0; l < levels.size(); ++l) values[l] += b * q[l];
  }
  if (reference == nullptr) throw DataError("QRA prediction has no covariate forecasts");
  if (!std::is_sorted(values.begin(), values.end())) {
    std::sort(values.begin(), values.end());
    warn(diagnostics, "QRA quantiles crossed for " + reference->key().label() + " " +
                          format_date(reference->target_date()) + "; re-sorted");
  }
  return QuantileForecast(reference->key(), reference->target_date(), std::vector<double>(levels.begin(), levels.end()),
                          std::move(values));
}

ShiftEstimate compute_sqra_shift(const ForecastDelivery& current, const TrainingWindow& window, const ModelId& model,
                                 Date window_start, Diagnostics* diagnostics) {
  if (current.model() != model || window.model != model) {
    throw std::invalid_argument("compute_sqra_shift: delivery, window and model disagree");
  }
  const QuantileForecast* now = current.find(window.key, window_start);
  if (now == nullptr) {
    throw DataError("current delivery of " + model.value + " has no forecast for " + window.key.label() + " on " +
                    format_date(window_start));
  }
  const double current_median = median_of(*now);
  if (window.anchor && window.anchor->target_date() == window_start) {
    return ShiftEstimate{current_median - median_of(*window.anchor), ShiftSource::anchor};
  }
  if (!window.empty()) {
    const auto& latest = window.pairs.back().forecast;
    warn(diagnostics, "SQRA shift for " + model.value + " " + window.key.label() + " uses the latest training date " +
                          format_date(latest.target_date()) + " instead of " + format_date(window_start));
    return ShiftEstimate{current_median - median_of(latest), ShiftSource::latest_training};
  }
  warn(diagnostics, "SQRA shift for " + model.value + " " + window.key.label() +
                        ": no training predictions overlap the forecast window; shift set to 0");
  return ShiftEstimate{0.0, ShiftSource::none};
}

QuantileForecast predict_sqra(const QraCoefficients& coeffs, const std::map<ModelId, QuantileForecast>& forecasts,
                              const SqraShift& shifts, std::span<const double> levels, Diagnostics* diagnostics) {
  std::map<ModelId, QuantileForecast> moved;
  for (const auto& [model, f] : forecasts) {
    const auto it = shifts.find(model);
    const double offset = it == shifts.end() ? 0.0 : it->second;
    if (!std::isfinite(offset)) throw std::invalid_argument("SQRA shift for " + model.value + " is not finite");
    moved.emplace(model, offset == 0.0 ? f : f.shifted(-offset));
  }
  return predict_qra(coeffs, moved, levels, diagnostics);
}

}  // namespace combcast
