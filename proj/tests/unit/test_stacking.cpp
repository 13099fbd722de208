#include <gtest/gtest.h>

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numeric>
#include <random>

#include "combcast/errors.hpp"
#include "combcast/scoring.hpp"
#include "combcast/stacking.hpp"
#include "test_support.hpp"

using namespace combcast;
using combcast::testing::day;
using combcast::testing::london;

namespace {

const ModelId A{"A"};
const ModelId B{"B"};
const ModelId C{"C"};

void expect_simplex(const WeightVector& w) {
  double sum = 0.0;
  for (const auto& [_, v] : w.values()) {
    EXPECT_GE(v, 0.0);
    sum += v;
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

// Window whose forecasts are point masses at `values[i]` on day(i), observed at `observed[i]`.
TrainingWindow point_window(const ModelId& model, Date as_of, const std::vector<std::optional<double>>& values,
                            const std::vector<double>& observed) {
  TrainingWindow w{model, london(), as_of, static_cast<int>(values.size()), {}, std::nullopt};
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values[i]) continue;
    w.pairs.push_back(TrainingPair{QuantileForecast(london(), day(int(i)), {0.5}, {*values[i]}), observed[i], day(0)});
  }
  return w;
}

}  // namespace

TEST(WeightVector, Normalization) {
  const auto w = WeightVector::normalized({{A, 2.0}, {B, 6.0}});
  EXPECT_DOUBLE_EQ(w.at(A), 0.25);
  EXPECT_DOUBLE_EQ(w.at(B), 0.75);
  EXPECT_EQ(w.at(C), 0.0);
  EXPECT_THROW(WeightVector::normalized({}), std::invalid_argument);
  EXPECT_THROW(WeightVector::normalized({{A, -1.0}, {B, 2.0}}), std::invalid_argument);
  EXPECT_THROW(WeightVector::normalized({{A, 0.0}}), std::invalid_argument);
}

TEST(EqualWeights, Examples) {
  const std::vector<ModelId> four = {A, B, C, ModelId{"D"}};
  for (const auto& m : four) EXPECT_EQ(equal_weights(four).at(m), 0.25);
  const std::vector<ModelId> one = {A};
  EXPECT_EQ(equal_weights(one).at(A), 1.0);
  const std::vector<ModelId> three = {A, B, C};
  expect_simplex(equal_weights(three));
  EXPECT_NEAR(equal_weights(three).at(B), 1.0 / 3.0, 1e-15);
  EXPECT_THROW(equal_weights(std::vector<ModelId>{}), std::invalid_argument);
}

TEST(TimeInvariantWeights, HandComputedTwoDayExample) {
  // Normalized scores 0.25 / 0.75 on both days: raw scores 1 and 3.
  DailyScores scores;
  scores[day(0)] = {{A, 1.0}, {B, 3.0}};
  scores[day(1)] = {{A, 1.0}, {B, 3.0}};
  const std::vector<ModelId> models = {A, B};
  const StackingConfig config{0.9, 2, 14};
  const auto w = decayed_reciprocal_weights(scores, models, day(2), config);
  const double r_a = 0.9 * 4.0 + 1.0 * 4.0;
  const double r_b = 0.9 * (4.0 / 3.0) + (4.0 / 3.0);
  EXPECT_NEAR(w.at(A), r_a / (r_a + r_b), 1e-9);
  EXPECT_NEAR(w.at(A), 0.75, 1e-9);

  // The same through training windows of point forecasts.
  std::map<ModelId, TrainingWindow> windows;
  windows.emplace(A, point_window(A, day(2), {11.0, 11.0}, {10.0, 10.0}));
  windows.emplace(B, point_window(B, day(2), {13.0, 7.0}, {10.0, 10.0}));
  EXPECT_NEAR(time_invariant_weights(windows, config).at(A), 0.75, 1e-9);
}

TEST(TimeInvariantWeights, SymmetryAndSingleModel) {
  std::map<ModelId, TrainingWindow> windows;
  windows.emplace(A, point_window(A, day(3), {1.0, 2.0, 4.0}, {1.5, 2.5, 3.0}));
  EXPECT_EQ(time_invariant_weights(windows, {}).at(A), 1.0);
  windows.emplace(B, point_window(B, day(3), {1.0, 2.0, 4.0}, {1.5, 2.5, 3.0}));
  const auto w = time_invariant_weights(windows, {});
  EXPECT_EQ(w.at(A), 0.5);
  EXPECT_EQ(w.at(B), 0.5);
}

TEST(TimeInvariantWeights, RandomizedWindowsStayOnSimplex) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> score(0.01, 50.0);
  std::uniform_int_distribution<int> k_dist(1, 6);
  std::bernoulli_distribution reports(0.8);
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = k_dist(rng);
    std::vector<ModelId> models;
    for (int i = 0; i < k; ++i) models.push_back(ModelId{"m" + std::to_string(i)});
    DailyScores scores;
    DailyScores rescaled;
    for (int t = 0; t < 20; ++t) {
      const double factor = score(rng);
      for (const auto& m : models) {
        if (!reports(rng)) continue;
        const double s = score(rng);
        scores[day(t)][m] = s;
        rescaled[day(t)][m] = s * factor;
      }
    }
    if (scores.empty()) continue;
    const auto w = decayed_reciprocal_weights(scores, models, day(20), {});
    expect_simplex(w);
    const auto w2 = decayed_reciprocal_weights(rescaled, models, day(20), {});
    for (const auto& m : models) EXPECT_NEAR(w.at(m), w2.at(m), 1e-12);
  }
}

TEST(TimeInvariantWeights, ShorterWindowIsPenalized) {
  std::map<ModelId, TrainingWindow> windows;
  const std::vector<double> obs(10, 5.0);
  std::vector<std::optional<double>> full(10, 6.0);
  std::vector<std::optional<double>> late(10, 6.0);
  for (int i = 0; i < 6; ++i) late[i] = std::nullopt;
  windows.emplace(A, point_window(A, day(10), full, obs));
  windows.emplace(B, point_window(B, day(10), late, obs));
  const auto w = time_invariant_weights(windows, {0.9, 10, 14});
  EXPECT_GT(w.at(B), 0.0);
  EXPECT_LT(w.at(B), w.at(A));
}

TEST(TimeInvariantWeights, AllEmptyThrows) {
  std::map<ModelId, TrainingWindow> windows;
  windows.emplace(A, TrainingWindow{A, london(), day(5), 20, {}, std::nullopt});
  EXPECT_THROW(time_invariant_weights(windows, {}), InsufficientDataError);
}

TEST(TimeVaryingWeights, EndpointsAndInterpolation) {
  const auto base = WeightVector::normalized({{A, 0.8}, {B, 0.2}});
  const StackingConfig config{0.9, 20, 14};
  EXPECT_EQ(time_varying_weights(base, config, 1), base);
  const auto end = time_varying_weights(base, config, 14);
  EXPECT_EQ(end.at(A), 0.5);
  EXPECT_EQ(end.at(B), 0.5);

  double prev = 0.8;
  for (int h = 2; h < 14; ++h) {
    const auto w = time_varying_weights(base, config, h);
    expect_simplex(w);
    EXPECT_LT(w.at(A), prev);
    EXPECT_GT(w.at(A), 0.5);
    EXPECT_GT(w.at(A), w.at(B));
    prev = w.at(A);
  }
  const auto w8 = time_varying_weights(base, config, 8);
  const double g = 6.0 / 13.0;
  const double ra = std::pow(0.8, g) * std::pow(0.5, 1 - g);
  const double rb = std::pow(0.2, g) * std::pow(0.5, 1 - g);
  EXPECT_NEAR(w8.at(A), ra / (ra + rb), 1e-14);

  const auto with_zero = WeightVector::normalized({{A, 1.0}, {B, 0.0}, {C, 1.0}});
  EXPECT_EQ(time_varying_weights(with_zero, config, 13).at(B), 0.0);
  EXPECT_NEAR(time_varying_weights(with_zero, config, 14).at(B), 1.0 / 3.0, 1e-15);
  EXPECT_THROW(time_varying_weights(base, config, 0), std::invalid_argument);
  EXPECT_THROW(time_varying_weights(base, config, 15), std::invalid_argument);
}

TEST(NormalizedScoreWeights, Examples) {
  for (auto t : {WeightTransform::reciprocal, WeightTransform::exp_negative}) {
    const auto w = normalized_score_weights({{A, 2.0}, {B, 2.0}}, t);
    EXPECT_EQ(w.at(A), 0.5);
    const auto v = normalized_score_weights({{A, 3.0}, {B, 1.0}, {C, 2.0}}, t);
    EXPECT_GT(v.at(B), v.at(C));
    EXPECT_GT(v.at(C), v.at(A));
  }
  const auto e = normalized_score_weights({{A, 0.0}, {B, std::log(3.0)}}, WeightTransform::exp_negative);
  EXPECT_NEAR(e.at(A), 0.75, 1e-15);
  EXPECT_NEAR(e.at(B), 0.25, 1e-15);
  const auto r = normalized_score_weights({{A, 1.0}, {B, 3.0}}, WeightTransform::reciprocal);
  EXPECT_NEAR(r.at(A), 0.75, 1e-15);
  const auto z = normalized_score_weights({{A, 0.0}, {B, 0.0}, {C, 1.0}}, WeightTransform::reciprocal);
  EXPECT_EQ(z.at(A), 0.5);
  EXPECT_EQ(z.at(C), 0.0);
}

namespace {

std::vector<MixtureTrainingDay> gaussian_days(const std::vector<SkewNormalParams>& comps, std::size_t n,
                                              const std::function<double(std::mt19937_64&)>& draw) {
  std::mt19937_64 rng(17);
  std::vector<MixtureTrainingDay> days;
  for (std::size_t i = 0; i < n; ++i) {
    MixtureTrainingDay d{{}, draw(rng)};
    for (const auto& c : comps) d.components.emplace_back(c);
    days.push_back(std::move(d));
  }
  return days;
}

double numeric_mixture_crps(const MixtureTrainingDay& day, std::span<const double> w) {
  // Trapezoid rule on a fine grid for the integral of (F(x) - 1{x >= w})^2.
  double total = 0.0;
  const double lo = -30.0;
  const double hi = 30.0;
  const int n = 60000;
  const double h = (hi - lo) / n;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + i * h;
    const double f = mixture_cdf(day.components, w, x) - (x >= day.observed ? 1.0 : 0.0);
    total += (i == 0 || i == n ? 0.5 : 1.0) * f * f;
  }
  return total * h;
}

}  // namespace

TEST(MixtureScore, CrpsMatchesNumericalIntegral) {
  const auto days = gaussian_days({{0, 1, 0}, {3, 2, 1}}, 3, [](std::mt19937_64& r) {
    return std::normal_distribution<double>(1.0, 2.0)(r);
  });
  const std::vector<double> w = {0.35, 0.65};
  double numeric = 0.0;
  for (const auto& d : days) numeric += numeric_mixture_crps(d, w);
  numeric /= static_cast<double>(days.size());
  EXPECT_NEAR(mixture_training_score(days, w, MixtureScore::crps), numeric, 2e-3 * numeric);

  // Log score of a Gaussian mixture against its closed form.
  const boost::math::normal n0(0, 1);
  double log_oracle = 0.0;
  for (const auto& d : days) {
    log_oracle -= std::log(0.35 * boost::math::pdf(n0, d.observed) + 0.65 * skewnormal_pdf({3, 2, 1}, d.observed));
  }
  EXPECT_NEAR(mixture_training_score(days, w, MixtureScore::log), log_oracle / 3.0, 1e-9);
}

TEST(OptimizeMixtureWeights, DuplicateModelsScoreLikeOne) {
  auto days = gaussian_days({{0, 1, 0}, {0, 1, 0}}, 40, [](std::mt19937_64& r) {
    return std::normal_distribution<double>(0.5, 1.0)(r);
  });
  PsoConfig pso;
  pso.seed = 3;
  const std::vector<ModelId> models = {A, B};
  const auto w = optimize_mixture_weights(models, days, MixtureScore::crps, pso);
  const std::vector<double> weights = {w.at(A), w.at(B)};
  const std::vector<double> single = {1.0, 0.0};
  EXPECT_NEAR(mixture_training_score(days, weights, MixtureScore::crps),
              mixture_training_score(days, single, MixtureScore::crps), 1e-9);
}

TEST(OptimizeMixtureWeights, FavoursTruthMatchingModel) {
  const auto days = gaussian_days({{0, 1, 0}, {3, 1, 0}}, 100, [](std::mt19937_64& r) {
    return std::normal_distribution<double>(0.0, 1.0)(r);
  });
  const std::vector<double> truth = {1.0, 0.0};
  const std::vector<double> biased = {0.0, 1.0};
  EXPECT_LT(mixture_training_score(days, truth, MixtureScore::crps),
            mixture_training_score(days, biased, MixtureScore::crps));
  PsoConfig pso;
  pso.seed = 5;
  const std::vector<ModelId> models = {A, B};
  for (auto score : {MixtureScore::crps, MixtureScore::log}) {
    EXPECT_GT(optimize_mixture_weights(models, days, score, pso).at(A), 0.9);
  }
}

TEST(OptimizeMixtureWeights, MatchesGridSearchForTwoModels) {
  const auto days = gaussian_days({{0, 1, 0}, {2, 1.5, 0}}, 80, [](std::mt19937_64& r) {
    return std::bernoulli_distribution(0.3)(r) ? std::normal_distribution<double>(0, 1)(r)
                                               : std::normal_distribution<double>(2, 1.5)(r);
  });
  for (auto score : {MixtureScore::crps, MixtureScore::log}) {
    double best_w = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 100; ++i) {
      const std::vector<double> w = {i / 100.0, 1.0 - i / 100.0};
      const double s = mixture_training_score(days, w, score);
      if (s < best) {
        best = s;
        best_w = w[0];
      }
    }
    PsoConfig pso;
    pso.seed = 11;
    const std::vector<ModelId> models = {A, B};
    EXPECT_NEAR(optimize_mixture_weights(models, days, score, pso).at(A), best_w, 0.02);
  }
}

namespace {

ForecastDelivery delivery(const ModelId& m, int issued, const std::vector<QuantileForecast>& fs) {
  ForecastDelivery d(m, day(issued));
  for (const auto& f : fs) d.add(f);
  return d;
}

}  // namespace

TEST(StackedForecast, SingleModelReproducesQuantiles) {
  const auto f1 = combcast::testing::gaussian_like(day(0), 100, 10);
  const auto f2 = combcast::testing::gaussian_like(day(1), 120, 12);
  const std::vector<ForecastDelivery> current = {delivery(A, 0, {f1, f2})};
  const std::vector<WeightVector> w = {WeightVector::normalized({{A, 1.0}})};
  const auto grid = default_quantile_grid();
  const auto out = stacked_forecast(london(), current, w, grid);
  ASSERT_EQ(out.size(), 2u);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(out[0].values()[i], f1.values()[i], 1e-6);
    EXPECT_NEAR(out[1].values()[i], f2.values()[i], 1e-6);
  }
}

TEST(StackedForecast, IdenticalModelsAndBalancePoint) {
  const auto f = combcast::testing::gaussian_like(day(0), 50, 5);
  const std::vector<ForecastDelivery> same = {delivery(A, 0, {f}), delivery(B, 0, {f})};
  const std::vector<WeightVector> w = {WeightVector::normalized({{A, 0.2}, {B, 0.8}})};
  const auto grid = default_quantile_grid();
  const auto out = stacked_forecast(london(), same, w, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(out[0].values()[i], f.values()[i], 1e-6);

  const auto low = combcast::testing::gaussian_like(day(0), 0, 1);
  const auto high = combcast::testing::gaussian_like(day(0), 100, 1);
  const std::vector<ForecastDelivery> apart = {delivery(A, 0, {low}), delivery(B, 0, {high})};
  const std::vector<WeightVector> half = {equal_weights(std::vector<ModelId>{A, B})};
  const auto mixed = stacked_forecast(london(), apart, half, grid);
  const double median = *mixed[0].median();
  // Balance point: both CDFs sum to one half.
  const auto ca = ComponentDistribution::from_forecast(low);
  const auto cb = ComponentDistribution::from_forecast(high);
  EXPECT_NEAR(0.5 * ca.cdf(median) + 0.5 * cb.cdf(median), 0.5, 1e-6);
  EXPECT_GT(median, *low.value_at(0.95));
  EXPECT_LT(median, *high.value_at(0.05));
  EXPECT_TRUE(std::is_sorted(mixed[0].values().begin(), mixed[0].values().end()));
}

TEST(StackedForecast, LeadDependentWeightsAndMissingModel) {
  const auto a0 = combcast::testing::gaussian_like(day(0), 0, 1);
  const auto a1 = combcast::testing::gaussian_like(day(1), 0, 1);
  const auto b0 = combcast::testing::gaussian_like(day(0), 10, 1);
  const auto b1 = combcast::testing::gaussian_like(day(1), 10, 1);
  const std::vector<ForecastDelivery> current = {delivery(A, 0, {a0, a1}), delivery(B, 0, {b0, b1})};
  const std::vector<WeightVector> by_lead = {WeightVector::normalized({{A, 1.0}, {B, 0.0}}),
                                             WeightVector::normalized({{A, 0.0}, {B, 1.0}})};
  const std::vector<double> half = {0.5};
  const auto out = stacked_forecast(london(), current, by_lead, half);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_NEAR(*out[0].median(), 0.0, 1e-6);
  EXPECT_NEAR(*out[1].median(), 10.0, 1e-6);

  const std::vector<ForecastDelivery> only_a = {delivery(A, 0, {a0})};
  const std::vector<WeightVector> both = {equal_weights(std::vector<ModelId>{A, B})};
  EXPECT_THROW(stacked_forecast(london(), only_a, both, half), DataError);
}
