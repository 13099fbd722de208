#include "combcast/training.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace combcast {

namespace {

// Latest delivery of `model` issued before `as_of` and no later than `target` that forecasts (key, target).
const QuantileForecast* latest_prior_forecast(std::span<const ForecastDelivery> deliveries, const ModelId& model,
                                              const SeriesKey& key, Date target, Date as_of, Date* issued) {
  const QuantileForecast* best = nullptr;
  for (const auto& d : deliveries) {
    if (d.model() != model || d.delivery_date() >= as_of || d.delivery_date() > target) continue;
    if (best != nullptr && d.delivery_date() <= *issued) continue;
    if (const auto* f = d.find(key, target)) {
      best = f;
      *issued = d.delivery_date();
    }
  }
  return best;
}

}  // namespace

TrainingWindow build_training_window(std::span<const ForecastDelivery> deliveries, const ObservationSeries& observations,
                                     const ModelId& model, const SeriesKey& key, Date as_of, int length_days) {
  if (length_days <= 0) throw std::invalid_argument("training window length must be positive");
  TrainingWindow window{model, key, as_of, length_days, {}, std::nullopt};
  for (int back = length_days; back >= 1; --back) {
    const Date day = as_of - std::chrono::days{back};
    const auto observed = observations.at(day);
    if (!observed) continue;
    Date issued{};
    if (const auto* f = latest_prior_forecast(deliveries, model, key, day, as_of, &issued)) {
      window.pairs.push_back(TrainingPair{*f, *observed, issued});
    }
  }
  Date issued{};
  if (const auto* f = latest_prior_forecast(deliveries, model, key, as_of, as_of, &issued)) window.anchor = *f;
  return window;
}

std::vector<ModelId> complete_window_models(const std::map<ModelId, TrainingWindow>& windows) {
  std::set<Date> covered;
  for (const auto& [_, w] : windows) {
    for (const auto& p : w.pairs) covered.insert(p.forecast.target_date());
  }
  std::vector<ModelId> out;
  if (covered.empty()) return out;
  for (const auto& [model, w] : windows) {
    if (w.size() == covered.size()) out.push_back(model);
  }
  return out;
}

std::vector<Date> common_training_dates(const std::map<ModelId, TrainingWindow>& windows,
                                        std::span<const ModelId> models) {
  std::vector<Date> common;
  bool first = true;
  for (const auto& model : models) {
    const auto it = windows.find(model);
    if (it == windows.end()) return {};
    auto dates = it->second.dates();
    if (first) {
      common = std::move(dates);
      first = false;
    } else {
      std::vector<Date> kept;
      std::set_intersection(common.begin(), common.end(), dates.begin(), dates.end(), std::back_inserter(kept));
      common = std::move(kept);
    }
  }
  return common;
}

}  // namespace combcast
