#include "combcast/types.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "combcast/errors.hpp"

namespace combcast {

namespace {

int parse_digits(std::string_view text, std::string_view whole) {
  int out = 0;
  for (char c : text) {
    if (c < '0' || c > '9') throw std::invalid_argument("invalid date '" + std::string(whole) + "'");
    out = out * 10 + (c - '0');
  }
  return out;
}

}  // namespace

Date parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw std::invalid_argument("invalid date '" + std::string(text) + "', expected YYYY-MM-DD");
  }
  const int y = parse_digits(text.substr(0, 4), text);
  const int m = parse_digits(text.substr(5, 2), text);
  const int d = parse_digits(text.substr(8, 2), text);
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw std::invalid_argument("invalid date '" + std::string(text) + "'");
  return Date{ymd};
}

std::string format_date(Date date) {
  const std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

std::vector<double> default_quantile_grid() { return {0.05, 0.125, 0.25, 0.5, 0.75, 0.875, 0.95}; }

std::string SeriesKey::label() const { return region + "/" + value_type; }

SeriesCatalog SeriesCatalog::defaults() {
  return SeriesCatalog{
      {"England", "Scotland", "Wales", "Northern Ireland", "London", "East of England", "Midlands",
       "North East and Yorkshire", "North West", "South East", "South West"},
      {"death_inc_line", "hospital_inc", "hospital_prev", "icu_prev"},
  };
}

bool SeriesCatalog::contains(const SeriesKey& key) const {
  return std::find(regions.begin(), regions.end(), key.region) != regions.end() &&
         std::find(value_types.begin(), value_types.end(), key.value_type) != value_types.end();
}

QuantileForecast::QuantileForecast(SeriesKey key, Date target_date, std::vector<double> levels,
                                   std::vector<double> values)
    : key_(std::move(key)), target_date_(target_date), levels_(std::move(levels)), values_(std::move(values)) {
  if (levels_.empty()) throw std::invalid_argument("quantile forecast needs at least one level");
  if (levels_.size() != values_.size()) throw std::invalid_argument("quantile levels and values differ in length");
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (!(levels_[i] > 0.0 && levels_[i] < 1.0)) throw std::invalid_argument("quantile level outside (0, 1)");
    if (!std::isfinite(values_[i])) throw std::invalid_argument("non-finite quantile value");
    if (i > 0) {
      if (!(levels_[i] > levels_[i - 1] + kLevelTolerance)) {
        throw std::invalid_argument("quantile levels must be strictly increasing");
      }
      if (values_[i] < values_[i - 1]) throw std::invalid_argument("quantile values must be non-decreasing");
    }
  }
}

bool QuantileForecast::has_level(double level) const { return value_at(level).has_value(); }

std::optional<double> QuantileForecast::value_at(double level) const {
  const auto it = std::lower_bound(levels_.begin(), levels_.end(), level - kLevelTolerance);
  if (it == levels_.end() || std::abs(*it - level) > kLevelTolerance) return std::nullopt;
  return values_[static_cast<std::size_t>(it - levels_.begin())];
}

QuantileForecast QuantileForecast::shifted(double offset) const {
  std::vector<double> moved(values_);
  for (double& v : moved) v += offset;
  return QuantileForecast(key_, target_date_, levels_, std::move(moved));
}

ForecastDelivery::ForecastDelivery(ModelId model, Date delivery_date)
    : model_(std::move(model)), delivery_date_(delivery_date) {}

void ForecastDelivery::add(QuantileForecast forecast) {
  ForecastKey fk{forecast.key(), forecast.target_date()};
  if (forecasts_.contains(fk)) {
    throw DataError("duplicate forecast for " + fk.series.label() + " on " + format_date(fk.target_date) +
                    " in delivery " + model_.value + "@" + format_date(delivery_date_));
  }
  forecasts_.emplace(std::move(fk), std::move(forecast));
}

const QuantileForecast* ForecastDelivery::find(const SeriesKey& key, Date target_date) const {
  const auto it = forecasts_.find(ForecastKey{key, target_date});
  return it == forecasts_.end() ? nullptr : &it->second;
}

bool ForecastDelivery::covers(const SeriesKey& key) const {
  const auto it = forecasts_.lower_bound(ForecastKey{key, Date::min()});
  return it != forecasts_.end() && it->first.series == key;
}

std::vector<QuantileForecast> ForecastDelivery::series(const SeriesKey& key) const {
  std::vector<QuantileForecast> out;
  for (auto it = forecasts_.lower_bound(ForecastKey{key, Date::min()}); it != forecasts_.end() && it->first.series == key;
       ++it) {
    out.push_back(it->second);
  }
  return out;
}

std::vector<SeriesKey> ForecastDelivery::series_keys() const {
  std::vector<SeriesKey> out;
  for (const auto& [fk, _] : forecasts_) {
    if (out.empty() || out.back() != fk.series) out.push_back(fk.series);
  }
  return out;
}

bool ForecastDelivery::has_contiguous_horizon(const SeriesKey& key) const {
  std::optional<Date> prev;
  for (auto it = forecasts_.lower_bound(ForecastKey{key, Date::min()}); it != forecasts_.end() && it->first.series == key;
       ++it) {
    if (prev && it->first.target_date != *prev + std::chrono::days{1}) return false;
    prev = it->first.target_date;
  }
  return true;
}

std::optional<double> ObservationSeries::at(Date date) const {
  const auto it = points_.find(date);
  if (it == points_.end()) return std::nullopt;
  return it->second;
}

void ObservationSeries::add(Date date, double value) {
  if (!std::isfinite(value)) {
    throw DataError("non-finite observation for " + key_.label() + " on " + format_date(date));
  }
  const auto [it, inserted] = points_.emplace(date, value);
  if (!inserted && it->second != value) {
    throw DataError("conflicting observations for " + key_.label() + " on " + format_date(date));
  }
}

std::vector<Date> TrainingWindow::dates() const {
  std::vector<Date> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.forecast.target_date());
  return out;
}

const TrainingPair* TrainingWindow::find(Date target_date) const {
  const auto it = std::lower_bound(pairs.begin(), pairs.end(), target_date,
                                   [](const TrainingPair& p, Date d) { return p.forecast.target_date() < d; });
  if (it == pairs.end() || it->forecast.target_date() != target_date) return nullptr;
  return &*it;
}

}  // namespace combcast
