#include "combcast/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>
#include <tuple>

#include "combcast/errors.hpp"

namespace combcast {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

DataError line_error(std::size_t line, const std::string& what) {
  return DataError("line " + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(trim(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw line_error(line_no, "unterminated quoted field");
  fields.emplace_back(trim(field));
  return fields;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

double parse_number(const std::string& text, std::size_t line_no, const char* column) {
  double out = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (text.empty() || ec != std::errc{} || ptr != last) {
    throw line_error(line_no, std::string("invalid ") + column + " '" + text + "'");
  }
  if (!std::isfinite(out)) throw line_error(line_no, std::string("non-finite ") + column);
  return out;
}

Date parse_date_field(const std::string& text, std::size_t line_no, const char* column) {
  try {
    return parse_date(text);
  } catch (const std::invalid_argument& e) {
    throw line_error(line_no, std::string(column) + ": " + e.what());
  }
}

// Reads all non-blank lines after verifying the header; returns (line number, fields).
std::vector<std::pair<std::size_t, std::vector<std::string>>> read_rows(std::istream& in, std::string_view header,
                                                                        std::size_t columns) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    view = trim(view);
    if (view.empty()) continue;
    if (!seen_header) {
      if (view != header) throw line_error(line_no, "expected header '" + std::string(header) + "'");
      seen_header = true;
      continue;
    }
    auto fields = split_csv_line(view, line_no);
    if (fields.size() != columns) {
      throw line_error(line_no, "expected " + std::to_string(columns) + " fields, found " + std::to_string(fields.size()));
    }
    rows.emplace_back(line_no, std::move(fields));
  }
  return rows;
}

void check_catalog(const CsvOptions& options, const SeriesKey& key, std::size_t line_no) {
  if (key.region.empty() || key.value_type.empty()) throw line_error(line_no, "empty region or value_type");
  if (options.catalog && !options.catalog->contains(key)) {
    throw line_error(line_no, "series '" + key.label() + "' not in the configured region/value-type set");
  }
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

Parsed<std::vector<ForecastDelivery>> parse_forecast_csv(std::istream& in, const CsvOptions& options) {
  struct Cell {
    double value;
    std::size_t line;
  };
  using DeliveryKey = std::pair<ModelId, Date>;
  std::map<DeliveryKey, std::map<ForecastKey, std::map<double, Cell>>> grouped;

  for (auto& [line_no, f] : read_rows(in, kForecastCsvHeader, 7)) {
    if (f[0].empty()) throw line_error(line_no, "empty model id");
    const Date delivery = parse_date_field(f[1], line_no, "delivery_date");
    SeriesKey key{f[2], f[3]};
    check_catalog(options, key, line_no);
    const Date target = parse_date_field(f[4], line_no, "target_date");
    const double level = parse_number(f[5], line_no, "quantile");
    if (!(level > 0.0 && level < 1.0)) throw line_error(line_no, "quantile " + f[5] + " outside (0, 1)");
    const double value = parse_number(f[6], line_no, "value");

    auto& cells = grouped[{ModelId{f[0]}, delivery}][ForecastKey{std::move(key), target}];
    auto near = cells.lower_bound(level - kLevelTolerance);
    if (near != cells.end() && std::abs(near->first - level) <= kLevelTolerance) {
      if (near->second.value != value) {
        throw line_error(line_no, "duplicate quantile " + f[5] + " for " + f[0] + "@" + f[1] + " " + f[2] + "/" + f[3] +
                                      " " + f[4] + " conflicts with line " + std::to_string(near->second.line));
      }
      continue;
    }
    cells.emplace(level, Cell{value, line_no});
  }

  Parsed<std::vector<ForecastDelivery>> out;
  for (auto& [dkey, forecasts] : grouped) {
    ForecastDelivery delivery(dkey.first, dkey.second);
    for (auto& [fkey, cells] : forecasts) {
      std::vector<double> levels;
      std::vector<double> values;
      for (const auto& [level, cell] : cells) {
        levels.push_back(level);
        values.push_back(cell.value);
      }
      if (!std::is_sorted(values.begin(), values.end())) {
        std::sort(values.begin(), values.end());
        out.warnings.push_back("non-monotone quantiles re-sorted for " + dkey.first.value + "@" +
                               format_date(dkey.second) + " " + fkey.series.label() + " " +
                               format_date(fkey.target_date));
      }
      delivery.add(QuantileForecast(fkey.series, fkey.target_date, std::move(levels), std::move(values)));
    }
    for (const auto& key : delivery.series_keys()) {
      if (!delivery.has_contiguous_horizon(key)) {
        out.warnings.push_back("non-contiguous forecast horizon for " + dkey.first.value + "@" +
                               format_date(dkey.second) + " " + key.label());
      }
    }
    out.value.push_back(std::move(delivery));
  }
  return out;
}

Parsed<std::vector<ForecastDelivery>> parse_forecast_csv(std::string_view text, const CsvOptions& options) {
  std::istringstream in{std::string(text)};
  return parse_forecast_csv(in, options);
}

Parsed<ObservationSet> parse_observation_csv(std::istream& in, const CsvOptions& options) {
  Parsed<ObservationSet> out;
  for (auto& [line_no, f] : read_rows(in, kObservationCsvHeader, 4)) {
    SeriesKey key{f[0], f[1]};
    check_catalog(options, key, line_no);
    const Date date = parse_date_field(f[2], line_no, "date");
    const double value = parse_number(f[3], line_no, "value");
    auto it = out.value.find(key);
    if (it == out.value.end()) it = out.value.emplace(key, ObservationSeries(key)).first;
    if (const auto existing = it->second.at(date); existing && *existing != value) {
      throw line_error(line_no, "conflicting observation for " + key.label() + " on " + f[2]);
    }
    it->second.add(date, value);
  }
  return out;
}

Parsed<ObservationSet> parse_observation_csv(std::string_view text, const CsvOptions& options) {
  std::istringstream in{std::string(text)};
  return parse_observation_csv(in, options);
}

namespace {

void append_forecast_rows(std::string& out, std::string_view model, Date delivery, const QuantileForecast& f) {
  const std::string prefix = csv_field(model) + "," + format_date(delivery) + "," + csv_field(f.key().region) + "," +
                             csv_field(f.key().value_type) + "," + format_date(f.target_date()) + ",";
  for (std::size_t i = 0; i < f.size(); ++i) {
    out += prefix;
    out += format_number(f.levels()[i]);
    out += ',';
    out += format_number(f.values()[i]);
    out += '\n';
  }
}

}  // namespace

std::string emit_combined_csv(std::span<const QuantileForecast> forecasts, std::string_view method, Date delivery_date) {
  std::string out(kForecastCsvHeader);
  out += '\n';
  for (const auto& f : forecasts) append_forecast_rows(out, method, delivery_date, f);
  return out;
}

std::string emit_forecast_csv(std::span<const ForecastDelivery> deliveries) {
  std::string out(kForecastCsvHeader);
  out += '\n';
  for (const auto& d : deliveries) {
    for (const auto& [_, f] : d.forecasts()) append_forecast_rows(out, d.model().value, d.delivery_date(), f);
  }
  return out;
}

std::string emit_observation_csv(const ObservationSet& observations) {
  std::string out(kObservationCsvHeader);
  out += '\n';
  for (const auto& [key, series] : observations) {
    const std::string prefix = csv_field(key.region) + "," + csv_field(key.value_type) + ",";
    for (const auto& [date, value] : series.points()) {
      out += prefix + format_date(date) + "," + format_number(value) + "\n";
    }
  }
  return out;
}

}  // namespace combcast
