#include "combcast/pipeline.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <stdexcept>
#include <string>

#include "combcast/distfit.hpp"
#include "combcast/training.hpp"

namespace combcast {

namespace {

constexpr std::array<std::pair<Method, std::string_view>, 7> kMethodNames{{
    {Method::stacked_equal, "stacked-equal"},
    {Method::stacked_ti, "stacked-ti"},
    {Method::stacked_tv, "stacked-tv"},
    {Method::stacked_opt, "stacked-opt"},
    {Method::emos, "emos"},
    {Method::qra, "qra"},
    {Method::sqra, "sqra"},
}};

std::uint64_t fnv1a(std::string_view text, std::uint64_t hash) {
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Inputs {
  std::vector<ForecastDelivery> current;
  std::map<ModelId, TrainingWindow> windows;
};

Inputs gather(const SeriesKey& key, std::span<const ForecastDelivery> deliveries, const ObservationSeries& observations,
              Date as_of, const RunConfig& config) {
  if (config.train_window < 1) throw std::invalid_argument("training window must be at least one day");
  if (config.horizon < 1) throw std::invalid_argument("horizon must be at least one day");
  Inputs in;
  for (const auto& d : deliveries) {
    if (d.delivery_date() == as_of && d.covers(key)) in.current.push_back(d);
  }
  if (in.current.empty()) {
    throw DataError("no delivery issued on " + format_date(as_of) + " covers " + key.label());
  }
  for (const auto& d : in.current) {
    in.windows.emplace(d.model(),
                       build_training_window(deliveries, observations, d.model(), key, as_of, config.train_window));
  }
  return in;
}

[[noreturn]] void no_training(Method method, const SeriesKey& key, Date as_of) {
  throw InsufficientDataError(std::string(method_name(method)) + " has no training days for " + key.label() +
                              " before " + format_date(as_of) +
                              "; use stacked-equal for models without training history");
}

// Windows that stacking may weight: complete ones only unless incomplete windows are allowed.
std::map<ModelId, TrainingWindow> stacking_windows(Method method, const SeriesKey& key, Date as_of,
                                                   const std::map<ModelId, TrainingWindow>& windows,
                                                   const RunConfig& config, Diagnostics* diagnostics) {
  const bool any = std::any_of(windows.begin(), windows.end(), [](const auto& w) { return !w.second.empty(); });
  if (!any) no_training(method, key, as_of);
  if (config.include_incomplete) return windows;
  std::map<ModelId, TrainingWindow> out;
  for (const auto& model : complete_window_models(windows)) out.emplace(model, windows.at(model));
  for (const auto& [model, _] : windows) {
    if (!out.contains(model)) {
      warn(diagnostics, model.value + " has an incomplete training window for " + key.label() + " and is left out");
    }
  }
  return out;
}

std::vector<ModelId> keys_of(const std::map<ModelId, TrainingWindow>& windows) {
  std::vector<ModelId> out;
  for (const auto& [model, _] : windows) out.push_back(model);
  return out;
}

std::vector<ModelId> positive_models(const WeightVector& w) {
  std::vector<ModelId> out;
  for (const auto& [model, v] : w.values()) {
    if (v > 0.0) out.push_back(model);
  }
  return out;
}

const ForecastDelivery& delivery_of(const Inputs& in, const ModelId& model) {
  for (const auto& d : in.current) {
    if (d.model() == model) return d;
  }
  throw DataError("no current delivery from model " + model.value);
}

// Target dates forecast by every listed model, ascending.
std::vector<Date> shared_targets(const Inputs& in, const SeriesKey& key, std::span<const ModelId> models) {
  std::optional<std::set<Date>> dates;
  for (const auto& model : models) {
    std::set<Date> mine;
    for (const auto& f : delivery_of(in, model).series(key)) mine.insert(f.target_date());
    if (!dates) {
      dates = std::move(mine);
    } else {
      std::set<Date> kept;
      std::set_intersection(dates->begin(), dates->end(), mine.begin(), mine.end(), std::inserter(kept, kept.end()));
      dates = std::move(kept);
    }
  }
  return dates ? std::vector<Date>(dates->begin(), dates->end()) : std::vector<Date>{};
}

double median_of(const QuantileForecast& f) {
  if (const auto m = f.median()) return *m;
  const double half[] = {0.5};
  return *complete_quantiles(f, half).median();
}

}  // namespace

std::string_view method_name(Method method) {
  for (const auto& [m, name] : kMethodNames) {
    if (m == method) return name;
  }
  throw std::invalid_argument("unknown method");
}

std::optional<Method> parse_method(std::string_view name) {
  for (const auto& [m, n] : kMethodNames) {
    if (n == name) return m;
  }
  return std::nullopt;
}

std::vector<Method> all_methods() {
  std::vector<Method> out;
  for (const auto& [m, _] : kMethodNames) out.push_back(m);
  return out;
}

std::uint64_t derive_fit_seed(std::uint64_t seed, Method method, const SeriesKey& key, Date as_of) {
  const Method stream = method == Method::sqra ? Method::qra : method;
  std::uint64_t h = fnv1a(method_name(stream), 0xcbf29ce484222325ULL);
  h = fnv1a(key.region, fnv1a("|", h));
  h = fnv1a(key.value_type, fnv1a("|", h));
  h = fnv1a(format_date(as_of), fnv1a("|", h));
  return splitmix64(seed ^ h);
}

CombinationResult combine(Method method, const SeriesKey& key, std::span<const ForecastDelivery> deliveries,
                          const ObservationSeries& observations, Date as_of, const RunConfig& config,
                          Diagnostics* diagnostics) {
  const Inputs in = gather(key, deliveries, observations, as_of, config);
  CombinationResult result{method, as_of, {}, {}, {}, 0};
  const StackingConfig stacking = config.stacking();
  PsoConfig pso = config.pso;

  switch (method) {
    case Method::stacked_equal:
    case Method::stacked_ti:
    case Method::stacked_tv:
    case Method::stacked_opt: {
      std::vector<WeightVector> weights;
      if (method == Method::stacked_equal) {
        weights.push_back(equal_weights(keys_of(in.windows)));
      } else {
        const auto windows = stacking_windows(method, key, as_of, in.windows, config, diagnostics);
        if (method == Method::stacked_opt) {
          const auto models = keys_of(windows);
          std::vector<MixtureTrainingDay> days;
          for (const Date d : common_training_dates(windows, models)) {
            MixtureTrainingDay day{{}, windows.at(models.front()).find(d)->observed};
            for (const auto& model : models) {
              day.components.push_back(ComponentDistribution::from_forecast(windows.at(model).find(d)->forecast));
            }
            days.push_back(std::move(day));
          }
          if (days.empty()) no_training(method, key, as_of);
          result.fit_seed = pso.seed = derive_fit_seed(config.seed, method, key, as_of);
          weights.push_back(optimize_mixture_weights(models, days, config.opt_score, pso));
        } else {
          const WeightVector base = time_invariant_weights(windows, stacking);
          if (method == Method::stacked_ti) {
            weights.push_back(base);
          } else {
            for (int lead = 1; lead <= config.horizon; ++lead) weights.push_back(time_varying_weights(base, stacking, lead));
          }
        }
      }
      result.forecasts = stacked_forecast(key, in.current, weights, config.quantiles);
      result.models_used = positive_models(weights.front());
      result.parameters = std::move(weights);
      break;
    }
    case Method::emos: {
      result.fit_seed = pso.seed = derive_fit_seed(config.seed, method, key, as_of);
      EmosCoefficients coeffs = fit_emos(in.windows, pso);
      for (const auto& [model, _] : coeffs.slopes) result.models_used.push_back(model);
      for (const Date target : shared_targets(in, key, result.models_used)) {
        std::map<ModelId, double> medians;
        for (const auto& model : result.models_used) medians[model] = median_of(*delivery_of(in, model).find(key, target));
        result.forecasts.push_back(
            predict_emos(coeffs, EnsembleStats::from_medians(std::move(medians)), key, target, config.quantiles));
      }
      result.parameters = std::move(coeffs);
      break;
    }
    case Method::qra:
    case Method::sqra: {
      result.fit_seed = pso.seed = derive_fit_seed(config.seed, method, key, as_of);
      QraParameters params{fit_qra(in.windows, config.quantiles, pso, {}, diagnostics), {}};
      for (const auto& [model, _] : params.coefficients.slopes) result.models_used.push_back(model);
      const auto targets = shared_targets(in, key, result.models_used);
      if (method == Method::sqra && !targets.empty()) {
        for (const auto& model : result.models_used) {
          params.shifts[model] =
              compute_sqra_shift(delivery_of(in, model), in.windows.at(model), model, targets.front(), diagnostics).offset;
        }
      }
      for (const Date target : targets) {
        std::map<ModelId, QuantileForecast> covariates;
        for (const auto& model : result.models_used) covariates.emplace(model, *delivery_of(in, model).find(key, target));
        result.forecasts.push_back(method == Method::qra
                                       ? predict_qra(params.coefficients, covariates, config.quantiles, diagnostics)
                                       : predict_sqra(params.coefficients, covariates, params.shifts, config.quantiles,
                                                      diagnostics));
      }
      result.parameters = std::move(params);
      break;
    }
  }
  return result;
}

}  // namespace combcast
