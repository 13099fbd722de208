#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "combcast/types.hpp"

namespace combcast {

inline constexpr std::string_view kForecastCsvHeader = "model,delivery_date,region,value_type,target_date,quantile,value";
inline constexpr std::string_view kObservationCsvHeader = "region,value_type,date,value";

template <class T>
struct Parsed {
  T value;
  std::vector<std::string> warnings;
};

struct CsvOptions {
  /// When set, rows whose series key is not in the catalog are rejected.
  std::optional<SeriesCatalog> catalog;
};

/// Reads the long-format forecast CSV. Rows are grouped into deliveries
/// (sorted by model, then delivery date) and quantiles sorted per forecast.
/// Non-monotone quantile values are repaired by sorting and reported as a
/// warning. Throws DataError naming the offending line.
Parsed<std::vector<ForecastDelivery>> parse_forecast_csv(std::istream& in, const CsvOptions& options = {});
Parsed<std::vector<ForecastDelivery>> parse_forecast_csv(std::string_view text, const CsvOptions& options = {});

Parsed<ObservationSet> parse_observation_csv(std::istream& in, const CsvOptions& options = {});
Parsed<ObservationSet> parse_observation_csv(std::string_view text, const CsvOptions& options = {});

/// Serializes a combined forecast in the forecast CSV schema, with `method`
/// in the model column.
std::string emit_combined_csv(std::span<const QuantileForecast> forecasts, std::string_view method, Date delivery_date);

std::string emit_forecast_csv(std::span<const ForecastDelivery> deliveries);
std::string emit_observation_csv(const ObservationSet& observations);

/// Shortest decimal representation that parses back to the same double.
std::string format_number(double value);

}  // namespace combcast
