#pragma once

#include <chrono>
#include <compare>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace combcast {

/// Calendar day. All quantities in this library are daily; there are no time zones.
using Date = std::chrono::sys_days;

/// Parses an ISO-8601 calendar date (YYYY-MM-DD). Throws std::invalid_argument.
Date parse_date(std::string_view text);
std::string format_date(Date date);

/// Two quantile levels closer than this are treated as the same level.
inline constexpr double kLevelTolerance = 1e-9;

/// Levels needed by the evaluation metrics: 90%, 75% and 50% central intervals plus the median.
std::vector<double> default_quantile_grid();

struct ModelId {
  std::string value;

  auto operator<=>(const ModelId&) const = default;
};

struct SeriesKey {
  std::string region;
  std::string value_type;

  auto operator<=>(const SeriesKey&) const = default;

  /// "region/value_type"
  std::string label() const;
};

/// Admissible regions and value types for series keys.
struct SeriesCatalog {
  std::vector<std::string> regions;
  std::vector<std::string> value_types;

  /// UK nations and NHS England regions, and the four scored value types.
  static SeriesCatalog defaults();

  bool contains(const SeriesKey& key) const;
};

/// One model's predictive quantiles for a single (series, target date).
///
/// Levels are strictly increasing in (0, 1) and values are finite and
/// non-decreasing; the constructor enforces both and throws
/// std::invalid_argument otherwise.
class QuantileForecast {
 public:
  QuantileForecast(SeriesKey key, Date target_date, std::vector<double> levels, std::vector<double> values);

  const SeriesKey& key() const { return key_; }
  Date target_date() const { return target_date_; }
  std::span<const double> levels() const { return levels_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return levels_.size(); }

  bool has_level(double level) const;
  std::optional<double> value_at(double level) const;
  std::optional<double> median() const { return value_at(0.5); }

  /// Copy with every quantile translated by `offset`.
  QuantileForecast shifted(double offset) const;

  bool operator==(const QuantileForecast&) const = default;

 private:
  SeriesKey key_;
  Date target_date_;
  std::vector<double> levels_;
  std::vector<double> values_;
};

struct ForecastKey {
  SeriesKey series;
  Date target_date;

  auto operator<=>(const ForecastKey&) const = default;
};

/// A model's dated batch of forecasts, at most one per (series, target date).
class ForecastDelivery {
 public:
  ForecastDelivery(ModelId model, Date delivery_date);

  const ModelId& model() const { return model_; }
  Date delivery_date() const { return delivery_date_; }

  /// Throws DataError if a forecast for the same (series, target date) exists.
  void add(QuantileForecast forecast);

  const QuantileForecast* find(const SeriesKey& key, Date target_date) const;
  bool covers(const SeriesKey& key) const;

  /// Forecasts for one series, ascending by target date.
  std::vector<QuantileForecast> series(const SeriesKey& key) const;
  std::vector<SeriesKey> series_keys() const;
  const std::map<ForecastKey, QuantileForecast>& forecasts() const { return forecasts_; }

  /// True when the target dates of `key` have no gaps.
  bool has_contiguous_horizon(const SeriesKey& key) const;

  bool operator==(const ForecastDelivery&) const = default;

 private:
  ModelId model_;
  Date delivery_date_;
  std::map<ForecastKey, QuantileForecast> forecasts_;
};

class ObservationSeries {
 public:
  ObservationSeries() = default;
  explicit ObservationSeries(SeriesKey key) : key_(std::move(key)) {}

  const SeriesKey& key() const { return key_; }
  const std::map<Date, double>& points() const { return points_; }
  std::optional<double> at(Date date) const;

  /// Throws DataError on a non-finite value or a conflicting value for an existing date.
  void add(Date date, double value);

  bool operator==(const ObservationSeries&) const = default;

 private:
  SeriesKey key_;
  std::map<Date, double> points_;
};

using ObservationSet = std::map<SeriesKey, ObservationSeries>;

struct TrainingPair {
  QuantileForecast forecast;
  double observed;
  Date delivery_date;
};

/// Past forecasts of one model for one series paired with what was observed.
struct TrainingWindow {
  ModelId model;
  SeriesKey key;
  Date as_of;
  int length_days = 20;
  /// Ascending by target date; every target date lies in [as_of - length_days, as_of).
  std::vector<TrainingPair> pairs;
  /// Most recent prior delivery's forecast for `as_of` itself, if one was issued.
  std::optional<QuantileForecast> anchor;

  bool empty() const { return pairs.empty(); }
  std::size_t size() const { return pairs.size(); }
  std::vector<Date> dates() const;
  const TrainingPair* find(Date target_date) const;
};

}  // namespace combcast
