#pragma once

#include <map>
#include <span>
#include <vector>

#include "combcast/types.hpp"

namespace combcast {

/// Pairs a model's past forecasts with observations over the `length_days`
/// days before `as_of`.
///
/// For each day the forecast comes from the latest delivery of `model` that
/// was issued before `as_of` and on or before that day. Days without such a
/// forecast or without an observation are omitted, so late-starting models
/// get a short window. The window's anchor is the same recency rule applied
/// to `as_of` itself, regardless of observations.
TrainingWindow build_training_window(std::span<const ForecastDelivery> deliveries, const ObservationSeries& observations,
                                     const ModelId& model, const SeriesKey& key, Date as_of, int length_days);

/// Models whose window covers every training day covered by any model in `windows`.
std::vector<ModelId> complete_window_models(const std::map<ModelId, TrainingWindow>& windows);

/// Target dates present in every listed model's window, ascending.
std::vector<Date> common_training_dates(const std::map<ModelId, TrainingWindow>& windows,
                                        std::span<const ModelId> models);

}  // namespace combcast
