#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "combcast/csv_io.hpp"
#include "combcast/errors.hpp"
#include "combcast/training.hpp"
#include "test_support.hpp"

using namespace combcast;
using combcast::testing::day;
using combcast::testing::london;

namespace {

const std::string kHeader = std::string(kForecastCsvHeader) + "\n";

}  // namespace

TEST(Dates, ParseAndFormat) {
  EXPECT_EQ(format_date(parse_date("2020-03-01")), "2020-03-01");
  EXPECT_EQ(parse_date("2020-03-01") + std::chrono::days{1}, parse_date("2020-03-02"));
  EXPECT_THROW(parse_date("2020-3-1"), std::invalid_argument);
  EXPECT_THROW(parse_date("2020-02-30"), std::invalid_argument);
}

TEST(QuantileForecastType, RejectsInvalidContent) {
  EXPECT_THROW(QuantileForecast(london(), day(0), {0.5, 0.25}, {1, 2}), std::invalid_argument);
  EXPECT_THROW(QuantileForecast(london(), day(0), {0.25, 0.5}, {2, 1}), std::invalid_argument);
  EXPECT_THROW(QuantileForecast(london(), day(0), {0.0, 0.5}, {1, 2}), std::invalid_argument);
  EXPECT_THROW(QuantileForecast(london(), day(0), {0.5}, {1, 2}), std::invalid_argument);
  EXPECT_THROW(QuantileForecast(london(), day(0), {0.5}, {std::nan("")}), std::invalid_argument);
  const QuantileForecast f(london(), day(0), {0.25, 0.5}, {1, 2});
  EXPECT_EQ(f.median(), 2.0);
  EXPECT_FALSE(f.value_at(0.75));
  EXPECT_EQ(f.shifted(3.0).values()[0], 4.0);
}

TEST(ForecastCsv, EmptyBodyGivesNoDeliveries) {
  const auto parsed = parse_forecast_csv(kHeader);
  EXPECT_TRUE(parsed.value.empty());
  EXPECT_TRUE(parsed.warnings.empty());
}

TEST(ForecastCsv, GroupsRowsIntoOneForecast) {
  const auto parsed = parse_forecast_csv(kHeader +
                                         "m1,2021-01-01,London,hospital_prev,2021-01-02,0.5,7\n"
                                         "m1,2021-01-01,London,hospital_prev,2021-01-02,0.25,5\n"
                                         "m1,2021-01-01,London,hospital_prev,2021-01-02,0.75,9\n");
  ASSERT_EQ(parsed.value.size(), 1u);
  const auto& d = parsed.value.front();
  EXPECT_EQ(d.model().value, "m1");
  ASSERT_EQ(d.forecasts().size(), 1u);
  const auto* f = d.find(london(), parse_date("2021-01-02"));
  ASSERT_NE(f, nullptr);
  EXPECT_EQ(std::vector<double>(f->levels().begin(), f->levels().end()), (std::vector<double>{0.25, 0.5, 0.75}));
  EXPECT_EQ(std::vector<double>(f->values().begin(), f->values().end()), (std::vector<double>{5, 7, 9}));
  EXPECT_TRUE(parsed.warnings.empty());
}

TEST(ForecastCsv, NonMonotoneValuesAreSortedWithWarning) {
  const auto parsed = parse_forecast_csv(kHeader +
                                         "m1,2021-01-01,London,hospital_prev,2021-01-02,0.25,9\n"
                                         "m1,2021-01-01,London,hospital_prev,2021-01-02,0.5,7\n"
                                         "m1,2021-01-01,London,hospital_prev,2021-01-02,0.75,5\n");
  const auto* f = parsed.value.front().find(london(), parse_date("2021-01-02"));
  std::vector<double> values(f->values().begin(), f->values().end());
  std::vector<double> expected = {9, 7, 5};
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(values, expected);
  EXPECT_EQ(parsed.warnings.size(), 1u);
}

TEST(ForecastCsv, ErrorsNameTheLine) {
  try {
    parse_forecast_csv(kHeader + "m1,2021-01-01,London,hospital_prev,2021-01-02,0.5,7\n"
                                 "m1,2021-01-01,London,hospital_prev,2021-01-02,1.5,7\n");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_forecast_csv(kHeader + "m1,2021-01-01,London,hospital_prev,2021-01-02,0.5,7\n"
                                            "m1,2021-01-01,London,hospital_prev,2021-01-02,0.5,8\n"),
               DataError);
  EXPECT_THROW(parse_forecast_csv(kHeader + "m1,2021-01-01,London,hospital_prev,2021-01-02,0.5\n"), DataError);
  EXPECT_THROW(parse_forecast_csv(kHeader + "m1,01/01/2021,London,hospital_prev,2021-01-02,0.5,7\n"), DataError);
  EXPECT_THROW(parse_forecast_csv("model,quantile\n"), DataError);
}

TEST(ForecastCsv, CatalogRejectsUnknownSeries) {
  CsvOptions options;
  options.catalog = SeriesCatalog::defaults();
  EXPECT_THROW(parse_forecast_csv(kHeader + "m1,2021-01-01,Atlantis,hospital_prev,2021-01-02,0.5,7\n", options),
               DataError);
  EXPECT_NO_THROW(parse_forecast_csv(kHeader + "m1,2021-01-01,Atlantis,hospital_prev,2021-01-02,0.5,7\n"));
  EXPECT_EQ(SeriesCatalog::defaults().regions.size(), 11u);
  EXPECT_EQ(SeriesCatalog::defaults().value_types.size(), 4u);
}

TEST(ObservationCsv, Examples) {
  const std::string header = std::string(kObservationCsvHeader) + "\n";
  EXPECT_TRUE(parse_observation_csv(header).value.empty());

  const auto two = parse_observation_csv(header + "London,hospital_prev,2021-01-01,3\nLondon,hospital_prev,2021-01-02,4\n");
  ASSERT_EQ(two.value.size(), 1u);
  EXPECT_EQ(two.value.at(london()).points().size(), 2u);

  try {
    parse_observation_csv(header + "London,hospital_prev,2021-01-01,3\nLondon,hospital_prev,2021-01-01,5\n");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("London/hospital_prev"), std::string::npos) << msg;
    EXPECT_NE(msg.find("2021-01-01"), std::string::npos) << msg;
  }
  // An identical duplicate is harmless.
  EXPECT_NO_THROW(parse_observation_csv(header + "London,hospital_prev,2021-01-01,3\nLondon,hospital_prev,2021-01-01,3\n"));
}

TEST(CombinedCsv, EmitShapes) {
  EXPECT_EQ(emit_combined_csv({}, "qra", day(0)), std::string(kForecastCsvHeader) + "\n");
  const QuantileForecast f(london(), day(1), {0.25, 0.5}, {1.5, 2});
  const std::string csv = emit_combined_csv(std::span(&f, 1), "qra", day(0));
  EXPECT_EQ(csv, std::string(kForecastCsvHeader) +
                     "\nqra,2021-01-01,London,hospital_prev,2021-01-02,0.25,1.5\n"
                     "qra,2021-01-01,London,hospital_prev,2021-01-02,0.5,2\n");
}

TEST(CombinedCsv, ParseEmitParseRoundTrips) {
  const std::string text = kHeader +
                           "b,2021-01-02,\"North East and Yorkshire\",icu_prev,2021-01-03,0.1,0.30000000000000004\n"
                           "b,2021-01-02,\"North East and Yorkshire\",icu_prev,2021-01-03,0.9,12345.678\n"
                           "a,2021-01-01,London,hospital_prev,2021-01-01,0.5,1e-7\n"
                           "a,2021-01-01,London,hospital_prev,2021-01-02,0.5,3\n";
  const auto first = parse_forecast_csv(text);
  const auto second = parse_forecast_csv(emit_forecast_csv(first.value));
  EXPECT_EQ(first.value, second.value);
  EXPECT_EQ(emit_forecast_csv(first.value), emit_forecast_csv(second.value));

  ObservationSet obs;
  ObservationSeries s(london());
  s.add(day(0), 0.1 + 0.2);
  s.add(day(1), 1e300);
  obs.emplace(london(), s);
  EXPECT_EQ(parse_observation_csv(emit_observation_csv(obs)).value, obs);
}

namespace {

// Direct restatement of the recency rule, used as the oracle below.
std::optional<int> oracle_delivery(const std::vector<int>& delivery_days, int horizon, int as_of, int target) {
  std::optional<int> best;
  for (int d : delivery_days) {
    if (d < as_of && d <= target && target < d + horizon && (!best || d > *best)) best = d;
  }
  return best;
}

}  // namespace

TEST(TrainingWindow, RecencyRuleMatchesExhaustiveOracle) {
  constexpr int kDays = 7;
  constexpr int kHorizon = 3;
  constexpr int kAsOf = 6;
  constexpr int kLength = 4;
  ObservationSeries obs(london());
  for (int t = 0; t < 10; ++t) {
    if (t != 3) obs.add(day(t), 1000.0 + t);
  }
  for (unsigned mask = 0; mask < (1u << kDays); ++mask) {
    std::vector<int> days;
    std::vector<ForecastDelivery> deliveries;
    for (int d = 0; d < kDays; ++d) {
      if (!(mask & (1u << d))) continue;
      days.push_back(d);
      ForecastDelivery delivery(ModelId{"m"}, day(d));
      for (int h = 0; h < kHorizon; ++h) {
        delivery.add(QuantileForecast(london(), day(d + h), {0.5}, {100.0 * d + (d + h)}));
      }
      deliveries.push_back(std::move(delivery));
    }
    const auto window = build_training_window(deliveries, obs, ModelId{"m"}, london(), day(kAsOf), kLength);
    std::vector<std::pair<int, int>> expected;
    for (int t = kAsOf - kLength; t < kAsOf; ++t) {
      if (!obs.at(day(t))) continue;
      if (const auto d = oracle_delivery(days, kHorizon, kAsOf, t)) expected.emplace_back(t, *d);
    }
    ASSERT_EQ(window.size(), expected.size()) << "mask " << mask;
    for (std::size_t i = 0; i < expected.size(); ++i) {
      const auto& pair = window.pairs[i];
      EXPECT_EQ(pair.forecast.target_date(), day(expected[i].first));
      EXPECT_EQ(pair.delivery_date, day(expected[i].second));
      EXPECT_EQ(*pair.forecast.median(), 100.0 * expected[i].second + expected[i].first);
      EXPECT_EQ(pair.observed, 1000.0 + expected[i].first);
    }
    const auto anchor = oracle_delivery(days, kHorizon, kAsOf, kAsOf);
    ASSERT_EQ(window.anchor.has_value(), anchor.has_value()) << "mask " << mask;
    if (anchor) {
      EXPECT_EQ(*window.anchor->median(), 100.0 * *anchor + kAsOf);
    }
  }
}

TEST(TrainingWindow, EmptyAndFullWindows) {
  ObservationSeries obs(london());
  for (int t = 0; t < 40; ++t) obs.add(day(t), t);
  EXPECT_TRUE(build_training_window({}, obs, ModelId{"m"}, london(), day(30), 20).empty());

  std::vector<ForecastDelivery> deliveries;
  for (int d = 0; d < 30; d += 7) {
    ForecastDelivery delivery(ModelId{"m"}, day(d));
    for (int h = 0; h < 14; ++h) delivery.add(QuantileForecast(london(), day(d + h), {0.5}, {1.0}));
    deliveries.push_back(std::move(delivery));
  }
  const auto window = build_training_window(deliveries, obs, ModelId{"m"}, london(), day(30), 20);
  ASSERT_EQ(window.size(), 20u);
  for (std::size_t i = 0; i < window.size(); ++i) EXPECT_EQ(window.pairs[i].forecast.target_date(), day(10 + int(i)));
}

TEST(TrainingWindow, CompleteWindowModels) {
  std::map<ModelId, TrainingWindow> windows;
  auto make = [](std::string id, int first, int last) {
    TrainingWindow w{ModelId{id}, london(), day(10), 10, {}, std::nullopt};
    for (int t = first; t <= last; ++t) {
      w.pairs.push_back(TrainingPair{QuantileForecast(london(), day(t), {0.5}, {1.0}), 1.0, day(first)});
    }
    return w;
  };
  windows.emplace(ModelId{"full"}, make("full", 0, 9));
  windows.emplace(ModelId{"late"}, make("late", 5, 9));
  windows.emplace(ModelId{"full2"}, make("full2", 0, 9));
  const auto complete = complete_window_models(windows);
  EXPECT_EQ(complete, (std::vector<ModelId>{ModelId{"full"}, ModelId{"full2"}}));
  const std::vector<ModelId> all = {ModelId{"full"}, ModelId{"late"}};
  EXPECT_EQ(common_training_dates(windows, all).size(), 5u);
}
