#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "combcast/types.hpp"

namespace combcast {

/// Sharpness, bias and calibration of a forecast run with their centred
/// transforms, the distance of (b_hat, c_hat) from the origin, and the mean
/// interval score.
struct EvaluationMetrics {
  double sharpness = 0.0;
  double bias = 0.0;
  double calibration = 0.0;
  double b_hat = 0.0;
  double c_hat = 0.0;
  double distance = 0.0;
  double mean_interval_score = 0.0;
  std::size_t count = 0;
};

/// Levels required by the metrics below; missing ones are filled by complete_quantiles.
std::vector<double> evaluation_levels();

/// Mean width of the 75% central interval (q_0.875 - q_0.125).
double sharpness(std::span<const QuantileForecast> forecasts);

/// Share of forecasts whose median exceeds the observation; ties count 1/2.
double bias(std::span<const QuantileForecast> forecasts, std::span<const double> observed);

/// Share of observations strictly inside the 75% central interval; boundary hits count 1/2.
double calibration(std::span<const QuantileForecast> forecasts, std::span<const double> observed);

/// Mean over dates of the average of the median quantile score and the 50%
/// and 90% interval scores.
double mean_interval_score(std::span<const QuantileForecast> forecasts, std::span<const double> observed);

/// All metrics for one run of forecasts against matched observations.
EvaluationMetrics evaluate_forecasts(std::span<const QuantileForecast> forecasts, std::span<const double> observed);

/// Metrics per method. Every method must forecast the same target dates and
/// every date must be observed; otherwise throws DataError.
std::map<std::string, EvaluationMetrics> evaluate(const std::map<std::string, std::vector<QuantileForecast>>& outputs,
                                                  const ObservationSeries& observations);

struct LeaderboardEntry {
  std::string method;
  EvaluationMetrics metrics;
};

/// Methods for one series, best first.
struct Leaderboard {
  SeriesKey key;
  std::vector<LeaderboardEntry> entries;
};

/// Orders by distance, then sharpness, then method name.
Leaderboard make_leaderboard(const SeriesKey& key, const std::map<std::string, EvaluationMetrics>& metrics);

/// Method with the smallest distance; ties go to the sharper method, then
/// to the lexicographically first name. Throws std::invalid_argument if empty.
std::string select_best(const Leaderboard& board);

/// sqrt(2) - distance: larger is better.
double bar_height(const EvaluationMetrics& metrics);

}  // namespace combcast
