#include "combcast/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "combcast/normal.hpp"

namespace combcast {

ScoreValue log_score(const std::function<double(double)>& density, double outcome) {
  const double p = density(outcome);
  if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("log_score: density must be finite and non-negative");
  if (p == 0.0) return ScoreValue{0.0, true};
  return ScoreValue{-std::log(p), false};
}

double crps_samples(std::span<const double> samples, double outcome) {
  if (samples.empty()) throw std::invalid_argument("crps_samples: empty sample set");
  const auto m = static_cast<double>(samples.size());

  double abs_error = 0.0;
  for (double y : samples) abs_error += std::abs(y - outcome);
  abs_error /= m;

  double pair_sum = 0.0;
  if (samples.size() <= kCrpsPairwiseLimit) {
    for (double a : samples) {
      for (double b : samples) pair_sum += std::abs(a - b);
    }
  } else {
    // sum_{i,j} |x_i - x_j| = 2 sum_i (2i - m - 1) x_(i) over the sorted sample, i = 1..m
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      pair_sum += (2.0 * static_cast<double>(i + 1) - m - 1.0) * sorted[i];
    }
    pair_sum *= 2.0;
  }
  return abs_error - 0.5 * pair_sum / (m * m);
}

double crps_gaussian(double mean, double sd, double outcome) {
  if (!(sd > 0.0)) throw std::invalid_argument("crps_gaussian: sd must be positive");
  const double z = (outcome - mean) / sd;
  return sd * (z * (2.0 * normal_cdf(z) - 1.0) + 2.0 * normal_pdf(z) - 1.0 / std::sqrt(kPi));
}

double quantile_score(double quantile, double alpha, double outcome) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("quantile_score: alpha outside (0, 1)");
  const double indicator = outcome < quantile ? 1.0 : 0.0;
  return 2.0 * (indicator - alpha) * (quantile - outcome);
}

double interval_score(const Interval& interval, double outcome) {
  if (!(interval.alpha > 0.0 && interval.alpha < 1.0)) throw std::invalid_argument("interval_score: alpha outside (0, 1)");
  if (interval.lower > interval.upper) throw std::invalid_argument("interval_score: lower > upper");
  double score = interval.upper - interval.lower;
  if (outcome < interval.lower) score += 2.0 / interval.alpha * (interval.lower - outcome);
  if (outcome > interval.upper) score += 2.0 / interval.alpha * (outcome - interval.upper);
  return score;
}

double forecast_quantile_score_sum(std::span<const double> levels, std::span<const double> values, double outcome) {
  if (levels.empty() || levels.size() != values.size()) {
    throw std::invalid_argument("quantile score needs matching, non-empty levels and values");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) total += quantile_score(values[i], levels[i], outcome);
  return total;
}

double forecast_quantile_score_sum(const QuantileForecast& forecast, double outcome) {
  return forecast_quantile_score_sum(forecast.levels(), forecast.values(), outcome);
}

double crps_from_quantiles(std::span<const double> levels, std::span<const double> values, double outcome) {
  return forecast_quantile_score_sum(levels, values, outcome) / static_cast<double>(levels.size());
}

double crps_from_quantiles(const QuantileForecast& forecast, double outcome) {
  return crps_from_quantiles(forecast.levels(), forecast.values(), outcome);
}

}  // namespace combcast
