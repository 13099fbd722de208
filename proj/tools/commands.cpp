#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"

#include "combcast/backtest.hpp"
#include "combcast/csv_io.hpp"
#include "combcast/evaluation.hpp"
#include "combcast/pipeline.hpp"
#include "combcast/scoring.hpp"
#include "combcast/synthetic.hpp"

namespace combcast::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  RunConfig run;
  std::string quantiles;
  std::string opt_score = "crps";
  bool any_series = false;
};

struct Inputs {
  std::vector<ForecastDelivery> deliveries;
  ObservationSet observations;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw DataError("cannot write " + path);
  f << text;
  if (!f) throw DataError("failed writing " + path);
}

std::vector<double> parse_levels(const std::string& text) {
  std::vector<double> levels;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      levels.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--quantiles: cannot parse '" + item + "'");
    }
  }
  if (levels.empty()) throw UsageError("--quantiles: empty list");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] > 0.0 && levels[i] < 1.0)) throw UsageError("--quantiles: levels must lie in (0, 1)");
    if (i > 0 && !(levels[i] > levels[i - 1])) throw UsageError("--quantiles: levels must be strictly increasing");
  }
  return levels;
}

void add_run_flags(CLI::App& cmd, CommonOptions& o) {
  cmd.add_option("--train-window", o.run.train_window, "Training window length in days")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd.add_option("--horizon", o.run.horizon, "Forecast horizon in days")->capture_default_str()->check(CLI::PositiveNumber);
  cmd.add_option("--lambda", o.run.decay, "Stacking decay factor")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--quantiles", o.quantiles, "Comma-separated output quantile levels");
  cmd.add_option("--seed", o.run.seed, "Run seed")->capture_default_str();
  cmd.add_flag("--include-incomplete", o.run.include_incomplete, "Let stacking weight models with short training windows");
  cmd.add_option("--opt-score", o.opt_score, "Score optimized by stacked-opt")
      ->check(CLI::IsMember({"crps", "log"}))
      ->capture_default_str();
  cmd.add_option("--swarm", o.run.pso.swarm_size, "PSO swarm size")->capture_default_str()->check(CLI::PositiveNumber);
  cmd.add_option("--iterations", o.run.pso.iterations, "PSO iterations")->capture_default_str()->check(CLI::NonNegativeNumber);
}

void finish_run_flags(CommonOptions& o) {
  if (!o.quantiles.empty()) o.run.quantiles = parse_levels(o.quantiles);
  o.run.opt_score = o.opt_score == "log" ? MixtureScore::log : MixtureScore::crps;
}

Inputs load_inputs(const std::string& forecasts, const std::string& observations, bool any_series, std::ostream& err) {
  CsvOptions options;
  if (!any_series) options.catalog = SeriesCatalog::defaults();
  Inputs in;
  try {
    auto parsed = parse_forecast_csv(read_file(forecasts), options);
    for (const auto& w : parsed.warnings) err << forecasts << ": warning: " << w << "\n";
    in.deliveries = std::move(parsed.value);
  } catch (const DataError& e) {
    throw DataError(forecasts + ": " + e.what());
  }
  try {
    auto parsed = parse_observation_csv(read_file(observations), options);
    for (const auto& w : parsed.warnings) err << observations << ": warning: " << w << "\n";
    in.observations = std::move(parsed.value);
  } catch (const DataError& e) {
    throw DataError(observations + ": " + e.what());
  }
  return in;
}

json config_json(const RunConfig& c) {
  return json{{"train_window", c.train_window},
              {"horizon", c.horizon},
              {"lambda", c.decay},
              {"quantiles", c.quantiles},
              {"include_incomplete", c.include_incomplete},
              {"opt_score", c.opt_score == MixtureScore::log ? "log" : "crps"},
              {"swarm_size", c.pso.swarm_size},
              {"iterations", c.pso.iterations}};
}

json weights_json(const WeightVector& w) {
  json out = json::object();
  for (const auto& [model, v] : w.values()) out[model.value] = v;
  return out;
}

json slopes_json(const std::map<ModelId, double>& slopes) {
  json out = json::object();
  for (const auto& [model, v] : slopes) out[model.value] = v;
  return out;
}

json parameters_json(const MethodParameters& params) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, std::vector<WeightVector>>) {
          if (p.size() == 1) return json{{"weights", weights_json(p.front())}};
          json leads = json::array();
          for (const auto& w : p) leads.push_back(weights_json(w));
          return json{{"weights_by_lead", leads}};
        } else if constexpr (std::is_same_v<T, EmosCoefficients>) {
          return json{{"intercept", p.intercept},         {"slopes", slopes_json(p.slopes)},
                      {"c", p.c},                         {"d", p.d},
                      {"variance_floor", p.variance_floor}, {"training_crps", p.training_crps}};
        } else {
          json out{{"slopes", slopes_json(p.coefficients.slopes)},
                   {"training_objective", p.coefficients.training_objective}};
          if (!p.shifts.empty()) out["shifts"] = slopes_json(p.shifts);
          return out;
        }
      },
      params);
}

std::vector<std::string> model_names(std::span<const ModelId> models) {
  std::vector<std::string> out;
  for (const auto& m : models) out.push_back(m.value);
  return out;
}

// score ---------------------------------------------------------------------

struct ScoreArgs {
  std::string forecasts, observations, output;
  bool any_series = false;
};

int cmd_score(const ScoreArgs& a, std::ostream& out, std::ostream& err) {
  const Inputs in = load_inputs(a.forecasts, a.observations, a.any_series, err);
  std::string text = "model,delivery_date,region,value_type,target_date,quantile_score_sum,interval_score,crps\n";
  std::size_t rows = 0;
  for (const auto& d : in.deliveries) {
    for (const auto& [fkey, f] : d.forecasts()) {
      const auto series = in.observations.find(fkey.series);
      if (series == in.observations.end()) continue;
      const auto w = series->second.at(fkey.target_date);
      if (!w) continue;
      std::string interval;
      try {
        const QuantileForecast one[] = {f};
        const double obs[] = {*w};
        interval = format_number(mean_interval_score(one, obs));
      } catch (const DataError& e) {
        err << "warning: " << e.what() << "; interval score left empty\n";
      }
      text += d.model().value + "," + format_date(d.delivery_date()) + "," + fkey.series.region + "," +
              fkey.series.value_type + "," + format_date(fkey.target_date) + "," +
              format_number(forecast_quantile_score_sum(f, *w)) + "," + interval + "," +
              format_number(crps_from_quantiles(f, *w)) + "\n";
      ++rows;
    }
  }
  write_output(a.output, text, out);
  if (!a.output.empty() && a.output != "-") err << "scored " << rows << " forecasts\n";
  return kExitOk;
}

// combine -------------------------------------------------------------------

struct CombineArgs {
  std::string forecasts, observations, method, output, params, as_of, series;
  CommonOptions common;
};

int cmd_combine(CombineArgs& a, std::ostream& out, std::ostream& err) {
  finish_run_flags(a.common);
  const auto method = parse_method(a.method);
  if (!method) {
    throw UsageError("unknown method '" + a.method +
                     "'; expected one of stacked-equal, stacked-ti, stacked-tv, stacked-opt, emos, qra, sqra");
  }
  std::optional<SeriesKey> only;
  if (!a.series.empty()) {
    const auto slash = a.series.find('/');
    if (slash == std::string::npos) throw UsageError("--series must look like region/value_type");
    only = SeriesKey{a.series.substr(0, slash), a.series.substr(slash + 1)};
  }
  std::optional<Date> as_of;
  if (!a.as_of.empty()) {
    try {
      as_of = parse_date(a.as_of);
    } catch (const std::invalid_argument&) {
      throw UsageError("--as-of must be YYYY-MM-DD");
    }
  }

  const Inputs in = load_inputs(a.forecasts, a.observations, a.common.any_series, err);
  if (in.deliveries.empty()) throw DataError("no forecasts in " + a.forecasts);
  if (!as_of) {
    as_of = in.deliveries.front().delivery_date();
    for (const auto& d : in.deliveries) as_of = std::max(*as_of, d.delivery_date());
  }
  std::set<SeriesKey> keys;
  for (const auto& d : in.deliveries) {
    if (d.delivery_date() != *as_of) continue;
    for (const auto& k : d.series_keys()) {
      if (!only || k == *only) keys.insert(k);
    }
  }
  if (keys.empty()) throw DataError("no delivery on " + format_date(*as_of) + " matches the requested series");

  std::vector<QuantileForecast> combined;
  json fits = json::array();
  for (const auto& key : keys) {
    const auto obs = in.observations.find(key);
    const ObservationSeries empty(key);
    Diagnostics diag;
    const CombinationResult r =
        combine(*method, key, in.deliveries, obs == in.observations.end() ? empty : obs->second, *as_of, a.common.run, &diag);
    for (const auto& w : diag.warnings) err << "warning: " << key.label() << ": " << w << "\n";
    combined.insert(combined.end(), r.forecasts.begin(), r.forecasts.end());
    json fit{{"series", key.label()},
             {"as_of", format_date(*as_of)},
             {"fit_seed", r.fit_seed},
             {"models", model_names(r.models_used)}};
    fit.update(parameters_json(r.parameters));
    fits.push_back(std::move(fit));
  }

  write_output(a.output, emit_combined_csv(combined, a.method, *as_of), out);
  if (!a.params.empty()) {
    const json sidecar{{"method", a.method},
                       {"seed", a.common.run.seed},
                       {"config", config_json(a.common.run)},
                       {"parameters", fits}};
    write_output(a.params, sidecar.dump(2) + "\n", out);
  }
  return kExitOk;
}

// backtest ------------------------------------------------------------------

struct BacktestArgs {
  std::string forecasts, observations, methods, out_dir;
  CommonOptions common;
};

std::string metrics_csv(const BacktestResult& r) {
  std::string text =
      "series_key,method,sharpness,bias,calibration,b_hat,c_hat,distance,mean_interval_score,delivery_date,count\n";
  for (const auto& row : r.rows) {
    const auto& m = row.metrics;
    text += row.key.label() + "," + row.method + "," + format_number(m.sharpness) + "," + format_number(m.bias) + "," +
            format_number(m.calibration) + "," + format_number(m.b_hat) + "," + format_number(m.c_hat) + "," +
            format_number(m.distance) + "," + format_number(m.mean_interval_score) + "," +
            format_date(row.delivery_date) + "," + std::to_string(m.count) + "\n";
  }
  return text;
}

std::string aggregates_csv(const BacktestResult& r) {
  std::string text = "value_type,method,mean_distance,mean_interval_score,rows\n";
  for (const auto& a : r.aggregates) {
    text += a.value_type + "," + a.method + "," + format_number(a.mean_distance) + "," +
            format_number(a.mean_interval_score) + "," + std::to_string(a.rows) + "\n";
  }
  return text;
}

json leaderboard_json(const BacktestResult& r, const RunConfig& config, std::span<const Method> methods) {
  json boards = json::array();
  for (const auto& lb : r.leaderboards) {
    json entries = json::array();
    for (const auto& e : lb.board.entries) {
      entries.push_back(json{{"method", e.method},
                             {"distance", e.metrics.distance},
                             {"bar_height", bar_height(e.metrics)},
                             {"sharpness", e.metrics.sharpness},
                             {"bias", e.metrics.bias},
                             {"calibration", e.metrics.calibration},
                             {"b_hat", e.metrics.b_hat},
                             {"c_hat", e.metrics.c_hat},
                             {"mean_interval_score", e.metrics.mean_interval_score}});
    }
    boards.push_back(json{{"delivery_date", format_date(lb.delivery_date)},
                          {"series", lb.board.key.label()},
                          {"best", lb.best},
                          {"entries", entries}});
  }
  json aggregates = json::array();
  for (const auto& a : r.aggregates) {
    aggregates.push_back(json{{"value_type", a.value_type},
                              {"method", a.method},
                              {"mean_distance", a.mean_distance},
                              {"mean_interval_score", a.mean_interval_score},
                              {"rows", a.rows}});
  }
  json skipped = json::array();
  for (const auto& s : r.skipped) {
    skipped.push_back(json{{"delivery_date", format_date(s.delivery_date)},
                           {"series", s.key.label()},
                           {"method", s.method},
                           {"reason", s.reason}});
  }
  std::vector<std::string> names;
  for (const Method m : methods) names.emplace_back(method_name(m));
  return json{{"seed", config.seed},       {"config", config_json(config)}, {"methods", names},
              {"leaderboards", boards},    {"aggregates", aggregates},      {"skipped", skipped}};
}

int cmd_backtest(BacktestArgs& a, std::ostream& out, std::ostream& err) {
  finish_run_flags(a.common);
  std::vector<Method> methods;
  if (a.methods.empty() || a.methods == "all") {
    methods = all_methods();
  } else {
    std::stringstream ss(a.methods);
    std::string name;
    while (std::getline(ss, name, ',')) {
      const auto m = parse_method(name);
      if (!m) throw UsageError("unknown method '" + name + "' in --methods");
      if (std::find(methods.begin(), methods.end(), *m) == methods.end()) methods.push_back(*m);
    }
    if (methods.empty()) throw UsageError("--methods is empty");
  }
  const Inputs in = load_inputs(a.forecasts, a.observations, a.common.any_series, err);
  const BacktestResult r = run_backtest(in.deliveries, in.observations, methods, a.common.run);
  for (const auto& w : r.warnings) err << "warning: " << w << "\n";

  const fs::path dir(a.out_dir);
  write_output((dir / "backtest.csv").string(), metrics_csv(r), out);
  write_output((dir / "aggregates.csv").string(), aggregates_csv(r), out);
  write_output((dir / "leaderboard.json").string(), leaderboard_json(r, a.common.run, methods).dump(2) + "\n", out);

  out << "evaluated " << r.rows.size() << " method runs over " << r.leaderboards.size()
      << " (delivery, series) pairs; skipped " << r.skipped.size() << "\n";
  for (const auto& agg : r.aggregates) {
    out << agg.value_type << " " << agg.method << " mean distance " << format_number(agg.mean_distance)
        << " mean interval score " << format_number(agg.mean_interval_score) << "\n";
  }
  return kExitOk;
}

// synth ---------------------------------------------------------------------

struct SynthArgs {
  std::string config, out_dir;
  std::uint64_t seed = 42;
};

TruthKind truth_kind(const std::string& name) {
  if (name == "logistic-wave") return TruthKind::logistic_wave;
  if (name == "piecewise-linear") return TruthKind::piecewise_linear;
  if (name == "noisy-random-walk") return TruthKind::noisy_random_walk;
  throw DataError("unknown truth kind '" + name + "'");
}

SyntheticConfig synth_config(const json& j) {
  SyntheticConfig c;
  c.seed = j.value("seed", c.seed);
  if (j.contains("start_date")) c.start_date = parse_date(j.at("start_date").get<std::string>());
  c.days = j.value("days", c.days);
  c.horizon = j.value("horizon", c.horizon);
  c.training_days = j.value("training_days", c.training_days);
  if (j.contains("quantiles")) c.quantiles = j.at("quantiles").get<std::vector<double>>();
  for (const auto& s : j.at("series")) {
    SyntheticSeries series{SeriesKey{s.at("region").get<std::string>(), s.at("value_type").get<std::string>()}, {}};
    if (s.contains("truth")) {
      const auto& t = s.at("truth");
      auto& tp = series.truth;
      tp.kind = truth_kind(t.value("kind", std::string("logistic-wave")));
      tp.base = t.value("base", tp.base);
      tp.peak = t.value("peak", tp.peak);
      tp.peak_day = t.value("peak_day", tp.peak_day);
      tp.growth_rate = t.value("growth_rate", tp.growth_rate);
      tp.noise_sd = t.value("noise_sd", tp.noise_sd);
      tp.step_sd = t.value("step_sd", tp.step_sd);
      tp.drift = t.value("drift", tp.drift);
      if (t.contains("knots")) tp.knots = t.at("knots").get<std::vector<std::pair<int, double>>>();
    }
    c.series.push_back(std::move(series));
  }
  for (const auto& a : j.at("archetypes")) {
    ForecasterArchetype arch;
    arch.model = ModelId{a.at("model").get<std::string>()};
    arch.bias = a.value("bias", arch.bias);
    arch.spread = a.value("spread", arch.spread);
    arch.skew = a.value("skew", arch.skew);
    arch.cadence = a.value("cadence", arch.cadence);
    arch.start_day = a.value("start_day", arch.start_day);
    if (a.contains("jump") && !a.at("jump").is_null()) {
      arch.jump = Jump{a.at("jump").at("day").get<int>(), a.at("jump").at("magnitude").get<double>()};
    }
    c.archetypes.push_back(std::move(arch));
  }
  return c;
}

int cmd_synth(const SynthArgs& a, bool seed_given, std::ostream& out, std::ostream& err) {
  SyntheticConfig config = default_scenario(a.seed);
  if (!a.config.empty()) {
    try {
      config = synth_config(json::parse(read_file(a.config)));
    } catch (const json::exception& e) {
      throw DataError(a.config + ": invalid synthetic config: " + e.what());
    } catch (const std::invalid_argument& e) {
      throw DataError(a.config + ": invalid synthetic config: " + e.what());
    }
    if (seed_given) config.seed = a.seed;
  }
  SyntheticData data;
  try {
    data = generate(config);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("invalid synthetic config: ") + e.what());
  }
  const fs::path dir(a.out_dir);
  write_output((dir / "forecasts.csv").string(), emit_forecast_csv(data.deliveries), out);
  write_output((dir / "observations.csv").string(), emit_observation_csv(data.observations), out);
  err << "wrote " << data.deliveries.size() << " deliveries for " << config.archetypes.size() << " models and "
      << config.series.size() << " series to " << a.out_dir << "\n";
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Combine, score and backtest quantile forecast ensembles"};
  app.require_subcommand(1);

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Score forecasts against observations");
  score_cmd->add_option("--forecasts", score.forecasts, "Forecast CSV")->required();
  score_cmd->add_option("--observations", score.observations, "Observation CSV")->required();
  score_cmd->add_option("-o,--output", score.output, "Report CSV (stdout if omitted)");
  score_cmd->add_flag("--any-series", score.any_series, "Accept regions and value types outside the default catalog");

  CombineArgs comb;
  auto* combine_cmd = app.add_subcommand("combine", "Combine the latest deliveries with one method");
  combine_cmd->add_option("--forecasts", comb.forecasts, "Forecast CSV")->required();
  combine_cmd->add_option("--observations", comb.observations, "Observation CSV")->required();
  combine_cmd->add_option("--method", comb.method, "Combination method")->required();
  combine_cmd->add_option("-o,--output", comb.output, "Combined forecast CSV (stdout if omitted)");
  combine_cmd->add_option("--params", comb.params, "JSON sidecar with fitted parameters");
  combine_cmd->add_option("--as-of", comb.as_of, "Delivery date to combine (default: latest)");
  combine_cmd->add_option("--series", comb.series, "Only this region/value_type");
  combine_cmd->add_flag("--any-series", comb.common.any_series, "Accept regions and value types outside the default catalog");
  add_run_flags(*combine_cmd, comb.common);

  BacktestArgs bt;
  auto* backtest_cmd = app.add_subcommand("backtest", "Rolling-origin backtest over every delivery date");
  backtest_cmd->add_option("--forecasts", bt.forecasts, "Forecast CSV")->required();
  backtest_cmd->add_option("--observations", bt.observations, "Observation CSV")->required();
  backtest_cmd->add_option("--methods", bt.methods, "Comma-separated methods (default: all)");
  backtest_cmd->add_option("--out-dir", bt.out_dir, "Directory for backtest.csv, aggregates.csv, leaderboard.json")
      ->required();
  backtest_cmd->add_flag("--any-series", bt.common.any_series, "Accept regions and value types outside the default catalog");
  add_run_flags(*backtest_cmd, bt.common);

  SynthArgs syn;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic ensemble");
  synth_cmd->add_option("--config", syn.config, "JSON scenario (default: built-in four-model scenario)");
  auto* seed_opt = synth_cmd->add_option("--seed", syn.seed, "Seed (overrides the config)")->capture_default_str();
  synth_cmd->add_option("--out-dir", syn.out_dir, "Directory for forecasts.csv and observations.csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (score_cmd->parsed()) return cmd_score(score, out, err);
    if (combine_cmd->parsed()) return cmd_combine(comb, out, err);
    if (backtest_cmd->parsed()) return cmd_backtest(bt, out, err);
    if (synth_cmd->parsed()) return cmd_synth(syn, seed_opt->count() > 0, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitUsage;
}

}  // namespace combcast::cli
