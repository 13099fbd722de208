#include "combcast/distfit.hpp"

#include <algorithm>
#include <boost/math/special_functions/owens_t.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "combcast/normal.hpp"

namespace combcast {

namespace {

void check_params(const SkewNormalParams& p) {
  if (!(p.scale > 0.0) || !std::isfinite(p.location) || !std::isfinite(p.scale) || !std::isfinite(p.shape)) {
    throw std::invalid_argument("skew-normal parameters must be finite with positive scale");
  }
}

}  // namespace

double skewnormal_pdf(const SkewNormalParams& params, double x) {
  check_params(params);
  const double z = (x - params.location) / params.scale;
  return 2.0 / params.scale * normal_pdf(z) * normal_cdf(params.shape * z);
}

double skewnormal_cdf(const SkewNormalParams& params, double x) {
  check_params(params);
  const double z = (x - params.location) / params.scale;
  if (z < -40.0) return 0.0;
  if (z > 40.0) return 1.0;
  return std::clamp(normal_cdf(z) - 2.0 * boost::math::owens_t(z, params.shape), 0.0, 1.0);
}

double skewnormal_quantile(const SkewNormalParams& params, double alpha) {
  check_params(params);
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("skewnormal_quantile: alpha outside (0, 1)");

  // Start from the moment-matched normal.
  const double delta = params.shape / std::sqrt(1.0 + params.shape * params.shape);
  const double mean = params.location + params.scale * delta * std::sqrt(2.0 / kPi);
  const double sd = params.scale * std::sqrt(1.0 - 2.0 * delta * delta / kPi);
  double x = mean + sd * normal_quantile(alpha);

  double lo = x - params.scale;
  double hi = x + params.scale;
  for (double step = params.scale; skewnormal_cdf(params, lo) > alpha; step *= 2.0) lo -= step;
  for (double step = params.scale; skewnormal_cdf(params, hi) < alpha; step *= 2.0) hi += step;
  x = std::clamp(x, lo, hi);

  for (int iter = 0; iter < 200; ++iter) {
    const double f = skewnormal_cdf(params, x) - alpha;
    if (std::abs(f) < 1e-12) break;
    if (f > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    if (hi - lo <= 1e-14 * std::max(1.0, std::abs(x))) break;
    const double density = skewnormal_pdf(params, x);
    double next = density > 0.0 ? x - f / density : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  return x;
}

PsoConfig default_skewnormal_fit_settings() {
  PsoConfig settings;
  settings.swarm_size = 40;
  settings.iterations = 150;
  settings.seed = 0x5eed5eedULL;
  return settings;
}

SkewNormalFit fit_skewnormal(const QuantileForecast& forecast, const PsoConfig& settings) {
  if (forecast.size() < 3) {
    throw std::invalid_argument("skew-normal fit needs at least 3 quantile levels; use the piecewise-linear fallback");
  }
  const auto levels = forecast.levels();
  const auto values = forecast.values();

  // Standardize so one set of search bounds fits every problem.
  std::size_t mid = 0;
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (std::abs(levels[i] - 0.5) < std::abs(levels[mid] - 0.5)) mid = i;
  }
  const double center = values[mid];
  const double z_span = normal_quantile(levels.back()) - normal_quantile(levels.front());
  const double unit = (values.back() - values.front()) / z_span;
  if (!(unit > 0.0)) {
    // Every reported quantile coincides: a near point mass.
    const double tiny = 1e-9 * std::max(1.0, std::abs(center));
    return SkewNormalFit{SkewNormalParams{center, tiny, 0.0}, 0.0};
  }

  std::vector<double> targets(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) targets[i] = (values[i] - center) / unit;

  auto loss = [&](std::span<const double> x) {
    const SkewNormalParams p{x[0], x[1], x[2]};
    double total = 0.0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const double r = skewnormal_quantile(p, levels[i]) - targets[i];
      total += r * r;
    }
    return total;
  };

  PsoConfig config = settings;
  config.bounds = {{-10.0, 10.0}, {0.01, 10.0}, {-20.0, 20.0}};
  config.initial_positions = {{0.0, 1.0, 0.0}, {-0.8, 1.3, 3.0}, {0.8, 1.3, -3.0}};
  const PsoResult best = minimize(loss, config);

  const SkewNormalParams fitted{center + unit * best.best_position[0], unit * best.best_position[1],
                                best.best_position[2]};
  const double rms = unit * std::sqrt(best.best_value / static_cast<double>(levels.size()));
  return SkewNormalFit{fitted, rms};
}

QuantileForecast complete_quantiles(const QuantileForecast& forecast, std::span<const double> targets,
                                    const PsoConfig& settings) {
  std::vector<double> missing;
  for (double t : targets) {
    if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("target level outside (0, 1)");
    if (!forecast.has_level(t) &&
        std::none_of(missing.begin(), missing.end(), [t](double m) { return std::abs(m - t) <= kLevelTolerance; })) {
      missing.push_back(t);
    }
  }
  if (missing.empty()) return forecast;

  const SkewNormalFit fit = fit_skewnormal(forecast, settings);
  const auto rep_levels = forecast.levels();
  const auto rep_values = forecast.values();

  std::vector<std::pair<double, double>> merged;
  for (std::size_t i = 0; i < rep_levels.size(); ++i) merged.emplace_back(rep_levels[i], rep_values[i]);
  for (double level : missing) {
    double v = skewnormal_quantile(fit.params, level);
    const auto upper = std::upper_bound(rep_levels.begin(), rep_levels.end(), level);
    if (upper != rep_levels.end()) v = std::min(v, rep_values[static_cast<std::size_t>(upper - rep_levels.begin())]);
    if (upper != rep_levels.begin()) v = std::max(v, rep_values[static_cast<std::size_t>(upper - rep_levels.begin()) - 1]);
    merged.emplace_back(level, v);
  }
  std::sort(merged.begin(), merged.end());

  // Fills between the same pair of reported neighbours may still cross one another.
  std::vector<double> levels;
  std::vector<double> values;
  for (const auto& [l, v] : merged) {
    levels.push_back(l);
    values.push_back(values.empty() ? v : std::max(v, values.back()));
  }
  return QuantileForecast(forecast.key(), forecast.target_date(), std::move(levels), std::move(values));
}

PiecewiseLinearQuantiles::PiecewiseLinearQuantiles(std::vector<double> levels, std::vector<double> values)
    : levels_(std::move(levels)), values_(std::move(values)) {
  if (levels_.empty() || levels_.size() != values_.size()) {
    throw std::invalid_argument("piecewise quantiles need matching, non-empty levels and values");
  }
  const std::size_t n = levels_.size();
  if (n >= 2) {
    // Tail density at the outermost point equals the density of the adjacent linear segment.
    const double low_width = values_[1] - values_[0];
    const double high_width = values_[n - 1] - values_[n - 2];
    lower_tail_scale_ = low_width > 0.0 ? levels_[0] * low_width / (levels_[1] - levels_[0]) : 0.0;
    upper_tail_scale_ = high_width > 0.0 ? (1.0 - levels_[n - 1]) * high_width / (levels_[n - 1] - levels_[n - 2]) : 0.0;
  }
}

PiecewiseLinearQuantiles::PiecewiseLinearQuantiles(const QuantileForecast& forecast)
    : PiecewiseLinearQuantiles(std::vector<double>(forecast.levels().begin(), forecast.levels().end()),
                               std::vector<double>(forecast.values().begin(), forecast.values().end())) {}

double PiecewiseLinearQuantiles::cdf(double x) const {
  const std::size_t n = levels_.size();
  if (x < values_.front()) {
    return lower_tail_scale_ > 0.0 ? levels_.front() * std::exp((x - values_.front()) / lower_tail_scale_) : 0.0;
  }
  if (x >= values_.back()) {
    if (upper_tail_scale_ > 0.0) return 1.0 - (1.0 - levels_.back()) * std::exp(-(x - values_.back()) / upper_tail_scale_);
    return 1.0;
  }
  // values_[i] <= x < values_[i + 1] with a strictly positive segment width.
  const auto it = std::upper_bound(values_.begin(), values_.end(), x);
  const auto i = static_cast<std::size_t>(it - values_.begin()) - 1;
  if (i + 1 >= n) return 1.0;
  const double frac = (x - values_[i]) / (values_[i + 1] - values_[i]);
  return levels_[i] + frac * (levels_[i + 1] - levels_[i]);
}

double PiecewiseLinearQuantiles::pdf(double x) const {
  if (x < values_.front()) {
    return lower_tail_scale_ > 0.0 ? cdf(x) / lower_tail_scale_ : 0.0;
  }
  if (x >= values_.back()) {
    return upper_tail_scale_ > 0.0 ? (1.0 - cdf(x)) / upper_tail_scale_ : 0.0;
  }
  const auto it = std::upper_bound(values_.begin(), values_.end(), x);
  const auto i = static_cast<std::size_t>(it - values_.begin()) - 1;
  return (levels_[i + 1] - levels_[i]) / (values_[i + 1] - values_[i]);
}

double PiecewiseLinearQuantiles::quantile(double alpha) const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("quantile level outside (0, 1)");
  if (alpha <= levels_.front()) {
    return lower_tail_scale_ > 0.0 ? values_.front() + lower_tail_scale_ * std::log(alpha / levels_.front())
                                   : values_.front();
  }
  if (alpha >= levels_.back()) {
    return upper_tail_scale_ > 0.0
               ? values_.back() - upper_tail_scale_ * std::log((1.0 - alpha) / (1.0 - levels_.back()))
               : values_.back();
  }
  const auto it = std::upper_bound(levels_.begin(), levels_.end(), alpha);
  const auto i = static_cast<std::size_t>(it - levels_.begin()) - 1;
  const double frac = (alpha - levels_[i]) / (levels_[i + 1] - levels_[i]);
  return values_[i] + frac * (values_[i + 1] - values_[i]);
}

double ComponentDistribution::cdf(double x) const {
  return std::visit(
      [x](const auto& d) {
        if constexpr (std::is_same_v<std::decay_t<decltype(d)>, SkewNormalParams>) {
          return skewnormal_cdf(d, x);
        } else {
          return d.cdf(x);
        }
      },
      dist_);
}

double ComponentDistribution::pdf(double x) const {
  return std::visit(
      [x](const auto& d) {
        if constexpr (std::is_same_v<std::decay_t<decltype(d)>, SkewNormalParams>) {
          return skewnormal_pdf(d, x);
        } else {
          return d.pdf(x);
        }
      },
      dist_);
}

double ComponentDistribution::quantile(double alpha) const {
  return std::visit(
      [alpha](const auto& d) {
        if constexpr (std::is_same_v<std::decay_t<decltype(d)>, SkewNormalParams>) {
          return skewnormal_quantile(d, alpha);
        } else {
          return d.quantile(alpha);
        }
      },
      dist_);
}

namespace {

std::vector<double> normalized_weights(std::span<const ComponentDistribution> components,
                                       std::span<const double> weights) {
  if (components.empty()) throw std::invalid_argument("mixture needs at least one component");
  if (components.size() != weights.size()) throw std::invalid_argument("mixture weights and components differ in length");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("mixture weights must be finite and non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("mixture weights sum to zero");
  std::vector<double> out(weights.begin(), weights.end());
  for (double& w : out) w /= total;
  return out;
}

}  // namespace

double mixture_cdf(std::span<const ComponentDistribution> components, std::span<const double> weights, double x) {
  double f = 0.0;
  for (std::size_t k = 0; k < components.size(); ++k) {
    if (weights[k] > 0.0) f += weights[k] * components[k].cdf(x);
  }
  return f;
}

std::vector<double> mixture_quantiles(std::span<const ComponentDistribution> components, std::span<const double> weights,
                                      std::span<const double> targets) {
  const auto w = normalized_weights(components, weights);
  std::vector<double> out;
  out.reserve(targets.size());
  for (double alpha : targets) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("target level outside (0, 1)");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t k = 0; k < components.size(); ++k) {
      if (w[k] <= 0.0) continue;
      const double q = components[k].quantile(alpha);
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    // The answer lies in the hull of component quantiles; pad by ten hull widths and grow if needed.
    const double unit = std::max(hi - lo, 1e-9 * std::max(1.0, std::abs(hi)));
    lo -= 10.0 * unit;
    hi += 10.0 * unit;
    for (double step = unit; mixture_cdf(components, w, lo) > alpha; step *= 2.0) lo -= step;
    for (double step = unit; mixture_cdf(components, w, hi) < alpha; step *= 2.0) hi += step;

    double x = hi;
    for (int iter = 0; iter < 300; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double f = mixture_cdf(components, w, mid);
      if (std::abs(f - alpha) < 1e-12) {
        x = mid;
        break;
      }
      if (f < alpha) {
        lo = mid;
      } else {
        hi = mid;
      }
      x = hi;
    }
    if (!out.empty()) x = std::max(x, out.back());
    out.push_back(x);
  }
  return out;
}

}  // namespace combcast
