#pragma once

#include <map>
#include <span>
#include <vector>

#include "combcast/distfit.hpp"
#include "combcast/pso.hpp"
#include "combcast/types.hpp"

namespace combcast {

/// Mixture weights over models: non-negative and summing to one.
class WeightVector {
 public:
  WeightVector() = default;

  /// Normalizes `raw` onto the simplex. Throws std::invalid_argument on an
  /// empty map, a negative or non-finite entry, or an all-zero vector.
  static WeightVector normalized(const std::map<ModelId, double>& raw);

  const std::map<ModelId, double>& values() const { return weights_; }
  double at(const ModelId& model) const;
  std::size_t size() const { return weights_.size(); }
  std::vector<ModelId> models() const;

  bool operator==(const WeightVector&) const = default;

 private:
  std::map<ModelId, double> weights_;
};

struct StackingConfig {
  double decay = 0.9;
  int window_days = 20;
  int horizon = 14;
};

enum class WeightTransform { reciprocal, exp_negative };

WeightVector equal_weights(std::span<const ModelId> models);

/// Per-day raw scores S_ik (sum of quantile scores) for the models reporting that day.
using DailyScores = std::map<Date, std::map<ModelId, double>>;

/// Decayed reciprocal-score weights from already computed daily scores.
///
/// Each day's scores are normalized across the models reporting that day,
/// Sbar_ik = S_ik / sum_k S_ik, and model k accumulates
/// r_k = sum_i decay^(T_p - i) / Sbar_ik over its reported days, where i = T_p
/// is the day before `as_of`. The weights are r_k / sum_k r_k, so models
/// reporting on fewer days are penalized. `models` lists every model in the
/// output; models with no reported day get weight zero.
WeightVector decayed_reciprocal_weights(const DailyScores& scores, std::span<const ModelId> models, Date as_of,
                                        const StackingConfig& config);

/// Time-invariant stacking weights from each model's training window.
WeightVector time_invariant_weights(const std::map<ModelId, TrainingWindow>& windows, const StackingConfig& config);

/// Geometric interpolation from `base` at lead 1 to equal weights at lead H:
/// w_k(h) proportional to base_k^g (1/K)^(1-g), g = (H - h) / (H - 1).
WeightVector time_varying_weights(const WeightVector& base, const StackingConfig& config, int lead);

/// w_k = f(S_k) / sum_j f(S_j) with f(s) = 1/s or exp(-s).
WeightVector normalized_score_weights(const std::map<ModelId, double>& scores, WeightTransform transform);

enum class MixtureScore { log, crps };

/// One training day: a component per model (in the order of the `models`
/// argument) and the observed value.
struct MixtureTrainingDay {
  std::vector<ComponentDistribution> components;
  double observed;
};

/// Mean training score of the mixture with the given weights (aligned with the components).
double mixture_training_score(std::span<const MixtureTrainingDay> days, std::span<const double> weights,
                              MixtureScore score);

/// Weights minimizing the mean mixture score over the training days, searched
/// by PSO over the first K-1 weights with the last as remainder.
WeightVector optimize_mixture_weights(std::span<const ModelId> models, std::span<const MixtureTrainingDay> days,
                                      MixtureScore score, const PsoConfig& settings);

/// Mixture forecast for one series from the current deliveries.
///
/// `weights_by_lead` holds either one WeightVector for every lead or one per
/// lead 1..H, where lead = target_date - delivery_date + 1. Target dates are
/// those forecast by every positively weighted model. Throws DataError if a
/// positively weighted model has no current forecast for the series.
std::vector<QuantileForecast> stacked_forecast(const SeriesKey& key, std::span<const ForecastDelivery> current,
                                               std::span<const WeightVector> weights_by_lead,
                                               std::span<const double> targets);

}  // namespace combcast
