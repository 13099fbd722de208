#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "combcast/errors.hpp"
#include "combcast/pso.hpp"
#include "combcast/types.hpp"

namespace combcast {

/// Minimum number of complete training days for a regression fit.
inline constexpr std::size_t kMinRegressionDays = 5;

/// Search box for regression coefficients.
struct RegressionBounds {
  double slope_max = 5.0;
  /// c is searched over [0, (c_sd_multiple * sd(observations))^2].
  double c_sd_multiple = 3.0;
  double d_max = 10.0;
  /// Predictive variance floor relative to the squared mean absolute observation.
  double relative_variance_floor = 1e-6;
};

/// y ~ N(a + sum_k b_k m_k, max(c + d S^2, floor)) with medians m_k and spread S.
struct EmosCoefficients {
  double intercept = 0.0;
  std::map<ModelId, double> slopes;
  double c = 0.0;
  double d = 0.0;
  double variance_floor = 0.0;
  /// Mean training CRPS at the fitted coefficients.
  double training_crps = 0.0;

  double variance(double spread) const;
};

/// Per-date ensemble medians and their (population) standard deviation.
struct EnsembleStats {
  std::map<ModelId, double> medians;
  double spread = 0.0;

  static EnsembleStats from_medians(std::map<ModelId, double> medians);
};

/// Fits EMOS+ by minimizing the mean Gaussian CRPS over the training days.
///
/// Only models whose window covers every training day are used; the intercept
/// is fixed at zero and all other coefficients are non-negative. The bounds and
/// initial positions in `settings` are replaced. Throws InsufficientDataError
/// with fewer than kMinRegressionDays complete days.
EmosCoefficients fit_emos(const std::map<ModelId, TrainingWindow>& windows, const PsoConfig& settings,
                          const RegressionBounds& bounds = {});

QuantileForecast predict_emos(const EmosCoefficients& coeffs, const EnsembleStats& stats, const SeriesKey& key,
                              Date target_date, std::span<const double> levels);

/// Quantile regression averaging: y_q = sum_k b_k q_k, slopes shared across levels.
struct QraCoefficients {
  std::map<ModelId, double> slopes;
  /// Summed training quantile score at the fitted slopes.
  double training_objective = 0.0;
};

/// One training day of aligned covariates: per model, the quantiles at the fit levels.
struct QraTrainingDay {
  std::vector<std::vector<double>> model_quantiles;
  double observed;
};

/// Sum over days and levels of the quantile score of the slope-weighted combination.
double qra_objective(std::span<const QraTrainingDay> days, std::span<const double> levels,
                     std::span<const double> slopes);

/// Fits shared non-negative QRA slopes by PSO. Model quantiles missing any of
/// `levels` are completed with a skew-normal fit. The swarm is seeded with the
/// equal-weight and unit-vector baselines and the result is checked against
/// them. Same model-inclusion rule and errors as fit_emos.
QraCoefficients fit_qra(const std::map<ModelId, TrainingWindow>& windows, std::span<const double> levels,
                        const PsoConfig& settings, const RegressionBounds& bounds = {},
                        Diagnostics* diagnostics = nullptr);

/// Slope-weighted sum of model quantiles per level. Crossing outputs are
/// re-sorted with a warning. Throws DataError if a model with a slope lacks a
/// forecast or a level.
QuantileForecast predict_qra(const QraCoefficients& coeffs, const std::map<ModelId, QuantileForecast>& forecasts,
                             std::span<const double> levels, Diagnostics* diagnostics = nullptr);

enum class ShiftSource {
  /// Training prediction at the forecast window start.
  anchor,
  /// Latest training date, since no training prediction covers the window start.
  latest_training,
  /// No training prediction at all; zero shift.
  none,
};

struct ShiftEstimate {
  double offset = 0.0;
  ShiftSource source = ShiftSource::none;
};

/// Per-model covariate offsets for SQRA.
using SqraShift = std::map<ModelId, double>;

/// Offset between the current median at `window_start` and the training
/// prediction for that date, falling back to the latest training date.
/// Throws DataError if the current delivery has no median at `window_start`.
ShiftEstimate compute_sqra_shift(const ForecastDelivery& current, const TrainingWindow& window, const ModelId& model,
                                 Date window_start, Diagnostics* diagnostics = nullptr);

/// predict_qra on covariates translated by -offset per model.
QuantileForecast predict_sqra(const QraCoefficients& coeffs, const std::map<ModelId, QuantileForecast>& forecasts,
                              const SqraShift& shifts, std::span<const double> levels,
                              Diagnostics* diagnostics = nullptr);

}  // namespace combcast
