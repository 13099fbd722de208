#include "combcast/backtest.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "combcast/training.hpp"

namespace combcast {

BacktestResult run_backtest(std::span<const ForecastDelivery> deliveries, const ObservationSet& observations,
                            std::span<const Method> methods, const RunConfig& config) {
  if (methods.empty()) throw std::invalid_argument("run_backtest: no methods");
  std::map<Date, std::set<SeriesKey>> schedule;
  for (const auto& d : deliveries) {
    for (const auto& key : d.series_keys()) schedule[d.delivery_date()].insert(key);
  }

  BacktestResult out;
  for (const auto& [as_of, keys] : schedule) {
    for (const auto& key : keys) {
      const auto obs = observations.find(key);
      if (obs == observations.end()) {
        out.warnings.push_back("no observations for " + key.label() + "; skipped");
        continue;
      }
      std::map<std::string, EvaluationMetrics> metrics;
      for (const Method method : methods) {
        const std::string name(method_name(method));
        Diagnostics diag;
        CombinationResult result;
        try {
          result = combine(method, key, deliveries, obs->second, as_of, config, &diag);
        } catch (const DataError& e) {
          out.skipped.push_back(BacktestSkip{as_of, key, name, e.what()});
          continue;
        }
        for (auto& w : diag.warnings) out.warnings.push_back(format_date(as_of) + " " + name + ": " + w);

        std::vector<QuantileForecast> scored;
        std::vector<double> observed;
        for (const auto& f : result.forecasts) {
          if (f.target_date() < as_of) {
            throw std::logic_error("combined forecast for " + format_date(f.target_date()) + " precedes its delivery " +
                                   format_date(as_of));
          }
          if (const auto w = obs->second.at(f.target_date())) {
            scored.push_back(f);
            observed.push_back(*w);
          }
        }
        if (scored.empty()) {
          out.skipped.push_back(BacktestSkip{as_of, key, name, "no observed targets"});
          continue;
        }

        BacktestRow row{as_of, key, name, evaluate_forecasts(scored, observed), scored.front().target_date(),
                        scored.back().target_date(), std::nullopt, result.fit_seed};
        for (const auto& model : result.models_used) {
          const auto window = build_training_window(deliveries, obs->second, model, key, as_of, config.train_window);
          if (!window.empty()) {
            const Date last = window.pairs.back().forecast.target_date();
            if (!row.last_training_observation || last > *row.last_training_observation) {
              row.last_training_observation = last;
            }
          }
        }
        metrics.emplace(name, row.metrics);
        out.rows.push_back(std::move(row));
      }
      if (!metrics.empty()) {
        Leaderboard board = make_leaderboard(key, metrics);
        std::string best = select_best(board);
        out.leaderboards.push_back(DatedLeaderboard{as_of, std::move(board), std::move(best)});
      }
    }
  }
  if (out.rows.empty()) throw DataError("backtest found no delivery date with training data and observed targets");

  std::stable_sort(out.rows.begin(), out.rows.end(), [](const BacktestRow& a, const BacktestRow& b) {
    return std::tie(a.delivery_date, a.key, a.method) < std::tie(b.delivery_date, b.key, b.method);
  });
  out.aggregates = aggregate_rows(out.rows);
  return out;
}

std::vector<AggregateRow> aggregate_rows(std::span<const BacktestRow> rows) {
  std::map<std::pair<std::string, std::string>, AggregateRow> acc;
  for (const auto& r : rows) {
    auto& a = acc[{r.key.value_type, r.method}];
    a.value_type = r.key.value_type;
    a.method = r.method;
    a.mean_distance += r.metrics.distance;
    a.mean_interval_score += r.metrics.mean_interval_score;
    ++a.rows;
  }
  std::vector<AggregateRow> out;
  for (auto& [_, a] : acc) {
    a.mean_distance /= static_cast<double>(a.rows);
    a.mean_interval_score /= static_cast<double>(a.rows);
    out.push_back(a);
  }
  return out;
}

}  // namespace combcast
