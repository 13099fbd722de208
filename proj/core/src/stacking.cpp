#include "combcast/stacking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "combcast/errors.hpp"
#include "combcast/scoring.hpp"

namespace combcast {

WeightVector WeightVector::normalized(const std::map<ModelId, double>& raw) {
  if (raw.empty()) throw std::invalid_argument("weight vector needs at least one model");
  double total = 0.0;
  for (const auto& [model, w] : raw) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("weight for " + model.value + " is negative or non-finite");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("weights sum to zero");
  WeightVector out;
  for (const auto& [model, w] : raw) out.weights_.emplace(model, w / total);
  return out;
}

double WeightVector::at(const ModelId& model) const {
  const auto it = weights_.find(model);
  return it == weights_.end() ? 0.0 : it->second;
}

std::vector<ModelId> WeightVector::models() const {
  std::vector<ModelId> out;
  for (const auto& [m, _] : weights_) out.push_back(m);
  return out;
}

WeightVector equal_weights(std::span<const ModelId> models) {
  if (models.empty()) throw std::invalid_argument("equal_weights: empty model list");
  std::map<ModelId, double> raw;
  for (const auto& m : models) raw[m] = 1.0;
  if (raw.size() != models.size()) throw std::invalid_argument("equal_weights: duplicate model id");
  return WeightVector::normalized(raw);
}

WeightVector decayed_reciprocal_weights(const DailyScores& scores, std::span<const ModelId> models, Date as_of,
                                        const StackingConfig& config) {
  if (!(config.decay > 0.0 && config.decay <= 1.0)) throw std::invalid_argument("decay must be in (0, 1]");
  std::map<ModelId, double> raw;
  for (const auto& m : models) raw[m] = 0.0;

  for (const auto& [day, by_model] : scores) {
    const auto age = (as_of - day).count();  // 1 for the most recent training day
    if (age < 1) throw std::invalid_argument("training score dated on or after the forecast window start");
    const double discount = std::pow(config.decay, static_cast<double>(age - 1));

    double total = 0.0;
    for (const auto& [_, s] : by_model) {
      if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("daily scores must be finite and non-negative");
      total += s;
    }
    const double n = static_cast<double>(by_model.size());
    for (const auto& [model, s] : by_model) {
      if (!raw.contains(model)) continue;
      double normalized = 0.0;
      if (total > 0.0) {
        // A perfect score would have an infinite reciprocal; floor it relative to the day's total.
        normalized = std::max(s / total, 1e-12);
      } else {
        normalized = 1.0 / n;  // every reporting model was perfect
      }
      raw[model] += discount / normalized;
    }
  }
  const bool any = std::any_of(raw.begin(), raw.end(), [](const auto& kv) { return kv.second > 0.0; });
  if (!any) throw InsufficientDataError("no model has any scored training day");
  return WeightVector::normalized(raw);
}

WeightVector time_invariant_weights(const std::map<ModelId, TrainingWindow>& windows, const StackingConfig& config) {
  if (windows.empty()) throw std::invalid_argument("time_invariant_weights: no models");
  DailyScores scores;
  std::vector<ModelId> models;
  std::optional<Date> as_of;
  for (const auto& [model, window] : windows) {
    models.push_back(model);
    if (as_of && *as_of != window.as_of) throw std::invalid_argument("training windows end on different dates");
    as_of = window.as_of;
    for (const auto& pair : window.pairs) {
      scores[pair.forecast.target_date()][model] = forecast_quantile_score_sum(pair.forecast, pair.observed);
    }
  }
  return decayed_reciprocal_weights(scores, models, *as_of, config);
}

WeightVector time_varying_weights(const WeightVector& base, const StackingConfig& config, int lead) {
  if (config.horizon < 1 || lead < 1 || lead > config.horizon) {
    throw std::invalid_argument("lead must lie in [1, horizon]");
  }
  if (lead == 1) return base;
  const double gamma = static_cast<double>(config.horizon - lead) / static_cast<double>(config.horizon - 1);
  const double uniform = 1.0 / static_cast<double>(base.size());
  std::map<ModelId, double> raw;
  for (const auto& [model, w] : base.values()) {
    if (gamma == 0.0) {
      raw[model] = uniform;
    } else {
      raw[model] = w == 0.0 ? 0.0 : std::pow(w, gamma) * std::pow(uniform, 1.0 - gamma);
    }
  }
  return WeightVector::normalized(raw);
}

WeightVector normalized_score_weights(const std::map<ModelId, double>& scores, WeightTransform transform) {
  if (scores.empty()) throw std::invalid_argument("normalized_score_weights: no scores");
  for (const auto& [model, s] : scores) {
    if (!std::isfinite(s)) throw std::invalid_argument("score for " + model.value + " is not finite");
  }
  std::map<ModelId, double> raw;
  if (transform == WeightTransform::exp_negative) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [_, s] : scores) best = std::min(best, s);
    for (const auto& [model, s] : scores) raw[model] = std::exp(-(s - best));
    return WeightVector::normalized(raw);
  }
  bool any_zero = false;
  for (const auto& [model, s] : scores) {
    if (s < 0.0) throw std::invalid_argument("reciprocal weights need non-negative scores");
    any_zero = any_zero || s == 0.0;
  }
  for (const auto& [model, s] : scores) raw[model] = any_zero ? (s == 0.0 ? 1.0 : 0.0) : 1.0 / s;
  return WeightVector::normalized(raw);
}

namespace {

constexpr std::size_t kCrpsGrid = 400;

// Quantiles of a component on a midpoint grid of (0, 1); sorted by construction.
std::vector<double> quantile_grid(const ComponentDistribution& c) {
  std::vector<double> q(kCrpsGrid);
  for (std::size_t m = 0; m < kCrpsGrid; ++m) {
    q[m] = c.quantile((static_cast<double>(m) + 0.5) / static_cast<double>(kCrpsGrid));
  }
  for (std::size_t m = 1; m < kCrpsGrid; ++m) q[m] = std::max(q[m], q[m - 1]);
  return q;
}

// Mean of |a_i - b_j| over all pairs of two sorted arrays.
double mean_abs_difference(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> prefix(b.size() + 1, 0.0);
  for (std::size_t j = 0; j < b.size(); ++j) prefix[j + 1] = prefix[j] + b[j];
  double total = 0.0;
  for (double x : a) {
    const auto below = static_cast<std::size_t>(std::lower_bound(b.begin(), b.end(), x) - b.begin());
    const double n_below = static_cast<double>(below);
    const double n_above = static_cast<double>(b.size() - below);
    total += x * n_below - prefix[below] + (prefix[b.size()] - prefix[below]) - x * n_above;
  }
  return total / static_cast<double>(a.size() * b.size());
}

// CRPS(sum_k w_k F_k, y) = sum_k w_k E|X_k - y| - 1/2 sum_jk w_j w_k E|X_j - X_k|, so each day
// reduces to a vector and a matrix that are fixed during the weight search.
struct CrpsTerms {
  std::vector<double> abs_error;
  std::vector<std::vector<double>> spread;
};

CrpsTerms crps_terms(const MixtureTrainingDay& day) {
  const std::size_t k = day.components.size();
  std::vector<std::vector<double>> grids;
  grids.reserve(k);
  for (const auto& c : day.components) grids.push_back(quantile_grid(c));
  CrpsTerms terms{std::vector<double>(k), std::vector<std::vector<double>>(k, std::vector<double>(k))};
  for (std::size_t i = 0; i < k; ++i) {
    double e = 0.0;
    for (double q : grids[i]) e += std::abs(q - day.observed);
    terms.abs_error[i] = e / static_cast<double>(kCrpsGrid);
    for (std::size_t j = i; j < k; ++j) {
      terms.spread[i][j] = terms.spread[j][i] = mean_abs_difference(grids[i], grids[j]);
    }
  }
  return terms;
}

double crps_from_terms(const CrpsTerms& t, std::span<const double> w) {
  double first = 0.0;
  double second = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    first += w[i] * t.abs_error[i];
    for (std::size_t j = 0; j < w.size(); ++j) second += w[i] * w[j] * t.spread[i][j];
  }
  return first - 0.5 * second;
}

double log_from_densities(std::span<const double> densities, std::span<const double> w) {
  double p = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) p += w[i] * densities[i];
  return p > 0.0 ? -std::log(p) : std::numeric_limits<double>::infinity();
}

void check_days(std::span<const MixtureTrainingDay> days, std::size_t k) {
  if (days.empty()) throw InsufficientDataError("mixture weight optimization needs at least one training day");
  for (const auto& d : days) {
    if (d.components.size() != k) throw std::invalid_argument("training day has the wrong number of components");
  }
}

}  // namespace

double mixture_training_score(std::span<const MixtureTrainingDay> days, std::span<const double> weights,
                              MixtureScore score) {
  check_days(days, weights.size());
  double total = 0.0;
  for (const auto& day : days) {
    if (score == MixtureScore::crps) {
      total += crps_from_terms(crps_terms(day), weights);
    } else {
      std::vector<double> densities;
      for (const auto& c : day.components) densities.push_back(c.pdf(day.observed));
      total += log_from_densities(densities, weights);
    }
  }
  return total / static_cast<double>(days.size());
}

WeightVector optimize_mixture_weights(std::span<const ModelId> models, std::span<const MixtureTrainingDay> days,
                                      MixtureScore score, const PsoConfig& settings) {
  const std::size_t k = models.size();
  if (k == 0) throw std::invalid_argument("optimize_mixture_weights: no models");
  check_days(days, k);
  if (k == 1) return equal_weights(models);

  std::vector<CrpsTerms> crps;
  std::vector<std::vector<double>> densities;
  for (const auto& day : days) {
    if (score == MixtureScore::crps) {
      crps.push_back(crps_terms(day));
    } else {
      std::vector<double> d;
      for (const auto& c : day.components) d.push_back(c.pdf(day.observed));
      densities.push_back(std::move(d));
    }
  }

  // Free coordinates are the first K-1 weights; points with sum > 1 are
  // projected onto the simplex face and charged for the excess.
  auto to_weights = [k](std::span<const double> x, double* excess) {
    std::vector<double> w(k);
    const double sum = std::accumulate(x.begin(), x.end(), 0.0);
    const double scale = sum > 1.0 ? 1.0 / sum : 1.0;
    for (std::size_t i = 0; i + 1 < k; ++i) w[i] = x[i] * scale;
    w[k - 1] = std::max(0.0, 1.0 - sum * scale);
    *excess = std::max(0.0, sum - 1.0);
    return w;
  };
  auto objective = [&](std::span<const double> x) {
    double excess = 0.0;
    const auto w = to_weights(x, &excess);
    double total = 0.0;
    for (std::size_t i = 0; i < days.size(); ++i) {
      total += score == MixtureScore::crps ? crps_from_terms(crps[i], w) : log_from_densities(densities[i], w);
    }
    const double mean = total / static_cast<double>(days.size());
    return mean + excess * (1.0 + std::abs(mean));
  };

  PsoConfig config = settings;
  config.bounds.assign(k - 1, Bounds{0.0, 1.0});
  config.initial_positions.clear();
  config.initial_positions.emplace_back(k - 1, 1.0 / static_cast<double>(k));
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> corner(k - 1, 0.0);
    if (i + 1 < k) corner[i] = 1.0;
    config.initial_positions.push_back(std::move(corner));
  }
  const PsoResult best = minimize(objective, config);

  double excess = 0.0;
  const auto w = to_weights(best.best_position, &excess);
  std::map<ModelId, double> raw;
  for (std::size_t i = 0; i < k; ++i) raw[models[i]] = w[i];
  if (raw.size() != k) throw std::invalid_argument("optimize_mixture_weights: duplicate model id");
  return WeightVector::normalized(raw);
}

std::vector<QuantileForecast> stacked_forecast(const SeriesKey& key, std::span<const ForecastDelivery> current,
                                               std::span<const WeightVector> weights_by_lead,
                                               std::span<const double> targets) {
  if (weights_by_lead.empty()) throw std::invalid_argument("stacked_forecast: no weights");
  const auto& models = weights_by_lead.front().values();

  // Positively weighted models (under any lead) and their latest current delivery.
  std::map<ModelId, const ForecastDelivery*> source;
  for (const auto& wv : weights_by_lead) {
    for (const auto& [model, w] : wv.values()) {
      if (w <= 0.0 || source.contains(model)) continue;
      const ForecastDelivery* found = nullptr;
      for (const auto& d : current) {
        if (d.model() == model && d.covers(key) && (found == nullptr || d.delivery_date() > found->delivery_date())) {
          found = &d;
        }
      }
      if (found == nullptr) {
        throw DataError("no current forecast for " + key.label() + " from positively weighted model " + model.value);
      }
      source[model] = found;
    }
  }
  if (source.empty()) throw std::invalid_argument("stacked_forecast: all weights are zero");

  std::optional<std::set<Date>> dates;
  Date issued = source.begin()->second->delivery_date();
  for (const auto& [model, d] : source) {
    issued = std::max(issued, d->delivery_date());
    std::set<Date> mine;
    for (const auto& f : d->series(key)) mine.insert(f.target_date());
    if (!dates) {
      dates = std::move(mine);
    } else {
      std::set<Date> kept;
      std::set_intersection(dates->begin(), dates->end(), mine.begin(), mine.end(), std::inserter(kept, kept.end()));
      dates = std::move(kept);
    }
  }

  std::vector<QuantileForecast> out;
  for (const Date target : *dates) {
    const auto lead = static_cast<std::size_t>(std::max<std::int64_t>(1, (target - issued).count() + 1));
    const WeightVector& wv = weights_by_lead[std::min(lead, weights_by_lead.size()) - 1];
    std::vector<ComponentDistribution> components;
    std::vector<double> weights;
    for (const auto& [model, _] : models) {
      const double w = wv.at(model);
      if (w <= 0.0) continue;
      components.push_back(ComponentDistribution::from_forecast(*source.at(model)->find(key, target)));
      weights.push_back(w);
    }
    auto values = mixture_quantiles(components, weights, targets);
    out.emplace_back(key, target, std::vector<double>(targets.begin(), targets.end()), std::move(values));
  }
  return out;
}

}  // namespace combcast
