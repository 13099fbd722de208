#pragma once

#include <functional>
#include <span>

#include "combcast/types.hpp"

// Proper scoring rules. Every score is negatively oriented: smaller is better.
namespace combcast {

/// Log score; `infinite` is set instead of storing a numeric infinity when
/// the density vanishes at the outcome.
struct ScoreValue {
  double value = 0.0;
  bool infinite = false;
};

ScoreValue log_score(const std::function<double(double)>& density, double outcome);

/// E|Y - w| - 1/2 E|Y - Y'| over the empirical distribution of `samples`.
/// Uses all ordered pairs up to kCrpsPairwiseLimit draws, the sorted-sum
/// identity above. Throws std::invalid_argument on an empty sample.
double crps_samples(std::span<const double> samples, double outcome);
inline constexpr std::size_t kCrpsPairwiseLimit = 2000;

/// Closed-form CRPS of N(mean, sd^2). Throws std::invalid_argument unless sd > 0.
double crps_gaussian(double mean, double sd, double outcome);

/// 2 (1{w < q} - alpha)(q - w). Throws std::invalid_argument unless alpha in (0, 1).
double quantile_score(double quantile, double alpha, double outcome);

/// Central (1 - alpha) x 100% interval [lower, upper].
struct Interval {
  double lower;
  double upper;
  double alpha;
};

double interval_score(const Interval& interval, double outcome);

/// Mean quantile score over the reported levels; approximates the CRPS.
double crps_from_quantiles(std::span<const double> levels, std::span<const double> values, double outcome);
double crps_from_quantiles(const QuantileForecast& forecast, double outcome);

/// Sum (not mean) of quantile scores over the reported levels.
double forecast_quantile_score_sum(std::span<const double> levels, std::span<const double> values, double outcome);
double forecast_quantile_score_sum(const QuantileForecast& forecast, double outcome);

}  // namespace combcast
