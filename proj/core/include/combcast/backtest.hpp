#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "combcast/evaluation.hpp"
#include "combcast/pipeline.hpp"

namespace combcast {

/// Metrics of one method's combined forecast for one delivery date and series.
struct BacktestRow {
  Date delivery_date;
  SeriesKey key;
  std::string method;
  EvaluationMetrics metrics;
  Date first_target;
  Date last_target;
  /// Latest observation date any training window of the fit used.
  std::optional<Date> last_training_observation;
  std::uint64_t fit_seed = 0;
};

/// A method that could not be run for a delivery date and series.
struct BacktestSkip {
  Date delivery_date;
  SeriesKey key;
  std::string method;
  std::string reason;
};

struct DatedLeaderboard {
  Date delivery_date;
  Leaderboard board;
  std::string best;
};

/// Mean over a value type's rows (all series and delivery dates) for one method.
struct AggregateRow {
  std::string value_type;
  std::string method;
  double mean_distance = 0.0;
  double mean_interval_score = 0.0;
  std::size_t rows = 0;
};

struct BacktestResult {
  /// Sorted by delivery date, series, method.
  std::vector<BacktestRow> rows;
  std::vector<DatedLeaderboard> leaderboards;
  std::vector<AggregateRow> aggregates;
  std::vector<BacktestSkip> skipped;
  std::vector<std::string> warnings;
};

/// Rolling-origin backtest: for every delivery date and series each method
/// is fitted on the trailing window, forecasts the deliveries issued that
/// day, and is scored on the targets that have observations. Methods run
/// independently of each other. Throws DataError if nothing could be evaluated.
BacktestResult run_backtest(std::span<const ForecastDelivery> deliveries, const ObservationSet& observations,
                            std::span<const Method> methods, const RunConfig& config);

/// Per value type and method means of the given rows.
std::vector<AggregateRow> aggregate_rows(std::span<const BacktestRow> rows);

}  // namespace combcast
