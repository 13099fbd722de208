#include "combcast/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "combcast/distfit.hpp"
#include "combcast/errors.hpp"
#include "combcast/scoring.hpp"

namespace combcast {

namespace {

double level_value(const QuantileForecast& f, double level) {
  if (const auto v = f.value_at(level)) return *v;
  const auto levels = evaluation_levels();
  if (f.size() < 3) {
    throw DataError("forecast for " + f.key().label() + " " + format_date(f.target_date()) +
                    " lacks level " + std::to_string(level) + " and has too few levels to complete");
  }
  return *complete_quantiles(f, levels).value_at(level);
}

void check_matched(std::span<const QuantileForecast> forecasts, std::span<const double> observed) {
  if (forecasts.empty()) throw DataError("no matched forecast dates to evaluate");
  if (forecasts.size() != observed.size()) throw std::invalid_argument("forecasts and observations differ in length");
}

bool all_present(const QuantileForecast& f, std::span<const double> levels) {
  return std::all_of(levels.begin(), levels.end(), [&](double l) { return f.has_level(l); });
}

// Completes each forecast once so repeated level lookups do not refit.
std::vector<QuantileForecast> with_evaluation_levels(std::span<const QuantileForecast> forecasts) {
  const auto levels = evaluation_levels();
  std::vector<QuantileForecast> out;
  out.reserve(forecasts.size());
  for (const auto& f : forecasts) {
    if (all_present(f, levels)) {
      out.push_back(f);
    } else {
      if (f.size() < 3) level_value(f, levels.front());
      out.push_back(complete_quantiles(f, levels));
    }
  }
  return out;
}

}  // namespace

std::vector<double> evaluation_levels() { return {0.05, 0.125, 0.25, 0.5, 0.75, 0.875, 0.95}; }

double sharpness(std::span<const QuantileForecast> forecasts) {
  if (forecasts.empty()) throw DataError("no forecasts to evaluate");
  double total = 0.0;
  for (const auto& f : forecasts) total += level_value(f, 0.875) - level_value(f, 0.125);
  return total / static_cast<double>(forecasts.size());
}

double bias(std::span<const QuantileForecast> forecasts, std::span<const double> observed) {
  check_matched(forecasts, observed);
  double above = 0.0;
  for (std::size_t i = 0; i < forecasts.size(); ++i) {
    const double median = level_value(forecasts[i], 0.5);
    if (median > observed[i]) {
      above += 1.0;
    } else if (median == observed[i]) {
      above += 0.5;
    }
  }
  return above / static_cast<double>(forecasts.size());
}

double calibration(std::span<const QuantileForecast> forecasts, std::span<const double> observed) {
  check_matched(forecasts, observed);
  double inside = 0.0;
  for (std::size_t i = 0; i < forecasts.size(); ++i) {
    const double lower = level_value(forecasts[i], 0.125);
    const double upper = level_value(forecasts[i], 0.875);
    const double w = observed[i];
    if (w > lower && w < upper) {
      inside += 1.0;
    } else if (w == lower || w == upper) {
      inside += 0.5;
    }
  }
  return inside / static_cast<double>(forecasts.size());
}

double mean_interval_score(std::span<const QuantileForecast> forecasts, std::span<const double> observed) {
  check_matched(forecasts, observed);
  double total = 0.0;
  for (std::size_t i = 0; i < forecasts.size(); ++i) {
    const auto& f = forecasts[i];
    const double w = observed[i];
    const double median_term = quantile_score(level_value(f, 0.5), 0.5, w);
    const double iqr_term = interval_score(Interval{level_value(f, 0.25), level_value(f, 0.75), 0.5}, w);
    const double outer_term = interval_score(Interval{level_value(f, 0.05), level_value(f, 0.95), 0.1}, w);
    total += (median_term + iqr_term + outer_term) / 3.0;
  }
  return total / static_cast<double>(forecasts.size());
}

EvaluationMetrics evaluate_forecasts(std::span<const QuantileForecast> forecasts, std::span<const double> observed) {
  check_matched(forecasts, observed);
  const auto completed = with_evaluation_levels(forecasts);
  EvaluationMetrics m;
  m.sharpness = sharpness(completed);
  m.bias = bias(completed, observed);
  m.calibration = calibration(completed, observed);
  m.b_hat = (0.5 - m.bias) / 0.5;
  m.c_hat = (0.5 - m.calibration) / 0.5;
  m.distance = std::hypot(m.c_hat, m.b_hat);
  m.mean_interval_score = mean_interval_score(completed, observed);
  m.count = forecasts.size();
  return m;
}

std::map<std::string, EvaluationMetrics> evaluate(const std::map<std::string, std::vector<QuantileForecast>>& outputs,
                                                  const ObservationSeries& observations) {
  std::map<std::string, EvaluationMetrics> out;
  std::optional<std::vector<Date>> reference;
  for (const auto& [method, forecasts] : outputs) {
    std::vector<Date> dates;
    std::vector<double> observed;
    for (const auto& f : forecasts) {
      const auto w = observations.at(f.target_date());
      if (!w) {
        throw DataError("method " + method + " forecasts " + format_date(f.target_date()) + " for " +
                        f.key().label() + " which has no observation");
      }
      dates.push_back(f.target_date());
      observed.push_back(*w);
    }
    if (!reference) {
      reference = dates;
    } else if (*reference != dates) {
      throw DataError("method " + method + " does not cover the same target dates as the other methods");
    }
    out.emplace(method, evaluate_forecasts(forecasts, observed));
  }
  return out;
}

Leaderboard make_leaderboard(const SeriesKey& key, const std::map<std::string, EvaluationMetrics>& metrics) {
  Leaderboard board{key, {}};
  for (const auto& [method, m] : metrics) board.entries.push_back(LeaderboardEntry{method, m});
  std::sort(board.entries.begin(), board.entries.end(), [](const LeaderboardEntry& a, const LeaderboardEntry& b) {
    if (a.metrics.distance != b.metrics.distance) return a.metrics.distance < b.metrics.distance;
    if (a.metrics.sharpness != b.metrics.sharpness) return a.metrics.sharpness < b.metrics.sharpness;
    return a.method < b.method;
  });
  return board;
}

std::string select_best(const Leaderboard& board) {
  if (board.entries.empty()) throw std::invalid_argument("select_best: empty leaderboard");
  const LeaderboardEntry* best = &board.entries.front();
  for (const auto& e : board.entries) {
    const auto& m = e.metrics;
    const auto& b = best->metrics;
    if (m.distance < b.distance || (m.distance == b.distance && m.sharpness < b.sharpness) ||
        (m.distance == b.distance && m.sharpness == b.sharpness && e.method < best->method)) {
      best = &e;
    }
  }
  return best->method;
}

double bar_height(const EvaluationMetrics& metrics) { return std::sqrt(2.0) - metrics.distance; }

}  // namespace combcast
