#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "combcast/csv_io.hpp"
#include "commands.hpp"

namespace fs = std::filesystem;
using namespace combcast;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "combcast");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::size_t lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("combcast_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

const char* kObservations =
    "region,value_type,date,value\n"
    "London,hospital_prev,2021-01-01,10\n"
    "London,hospital_prev,2021-01-02,12\n"
    "London,hospital_prev,2021-01-03,11\n";

}  // namespace

TEST_F(Cli, ScoreEmptyForecastsGivesEmptyReport) {
  write(path("f.csv"), std::string(kForecastCsvHeader) + "\n");
  write(path("o.csv"), kObservations);
  const auto r = run({"score", "--forecasts", path("f.csv"), "--observations", path("o.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(r.out), 1u);
  EXPECT_EQ(r.out.rfind("model,delivery_date,region,value_type,target_date,quantile_score_sum,interval_score,crps", 0), 0u);
}

TEST_F(Cli, ScorePerfectForecasterAndRowCount) {
  std::string f(kForecastCsvHeader);
  f += "\n";
  const std::vector<std::pair<std::string, double>> truth = {{"2021-01-01", 10}, {"2021-01-02", 12}, {"2021-01-03", 11}};
  for (const auto& [date, v] : truth) {
    for (const char* q : {"0.05", "0.25", "0.5", "0.75", "0.95"}) {
      f += "perfect,2021-01-01,London,hospital_prev," + date + "," + q + "," + std::to_string(v) + "\n";
    }
  }
  // A target without an observation is not scored.
  f += "perfect,2021-01-01,London,hospital_prev,2021-01-09,0.5,3\n";
  write(path("f.csv"), f);
  write(path("o.csv"), kObservations);
  const auto r = run({"score", "--forecasts", path("f.csv"), "--observations", path("o.csv"), "-o", path("r.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = slurp(path("r.csv"));
  EXPECT_EQ(lines(report), 1u + truth.size());
  std::istringstream in(report);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    EXPECT_NE(line.find(",0,0,0"), std::string::npos) << line;
  }
}

TEST_F(Cli, ExitCodes) {
  write(path("o.csv"), kObservations);
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"score", "--forecasts", path("missing.csv"), "--observations", path("o.csv")}).code,
            cli::kExitDataError);
  write(path("bad.csv"), std::string(kForecastCsvHeader) + "\nA,2021-01-01,London,hospital_prev,2021-01-02,1.5,3\n");
  const auto bad = run({"score", "--forecasts", path("bad.csv"), "--observations", path("o.csv")});
  EXPECT_EQ(bad.code, cli::kExitDataError);
  EXPECT_NE(bad.err.find("line 2"), std::string::npos) << bad.err;
  EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
}

TEST_F(Cli, SynthIsDeterministicAndHasEveryModel) {
  ASSERT_EQ(run({"synth", "--seed", "7", "--out-dir", path("a")}).code, 0);
  ASSERT_EQ(run({"synth", "--seed", "7", "--out-dir", path("b")}).code, 0);
  ASSERT_EQ(run({"synth", "--seed", "8", "--out-dir", path("c")}).code, 0);
  EXPECT_EQ(slurp(path("a/forecasts.csv")), slurp(path("b/forecasts.csv")));
  EXPECT_EQ(slurp(path("a/observations.csv")), slurp(path("b/observations.csv")));
  EXPECT_NE(slurp(path("a/observations.csv")), slurp(path("c/observations.csv")));

  const auto parsed = parse_forecast_csv(slurp(path("a/forecasts.csv")));
  std::set<std::string> models;
  for (const auto& d : parsed.value) models.insert(d.model().value);
  EXPECT_EQ(models.size(), 4u);
}

TEST_F(Cli, SynthConfigFileAndLateStarter) {
  const nlohmann::json config = {
      {"seed", 3},
      {"start_date", "2021-03-01"},
      {"days", 60},
      {"horizon", 7},
      {"training_days", 14},
      {"series", {{{"region", "Wales"}, {"value_type", "death_inc_line"}, {"truth", {{"kind", "logistic-wave"}}}}}},
      {"archetypes",
       {{{"model", "one"}},
        {{"model", "two"}, {"bias", 5.0}},
        {{"model", "three"}, {"spread", 2.0}},
        {{"model", "late"}, {"start_day", 28}}}}};
  write(path("scenario.json"), config.dump());
  const auto r = run({"synth", "--config", path("scenario.json"), "--out-dir", path("s")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto parsed = parse_forecast_csv(slurp(path("s/forecasts.csv")));
  std::set<std::string> models;
  for (const auto& d : parsed.value) {
    models.insert(d.model().value);
    if (d.model().value == "late") {
      EXPECT_GE(d.delivery_date(), parse_date("2021-03-29"));
    }
  }
  EXPECT_EQ(models, (std::set<std::string>{"one", "two", "three", "late"}));

  write(path("broken.json"), R"({"archetypes": [{"model": "x", "spread": -1}]})");
  EXPECT_EQ(run({"synth", "--config", path("broken.json"), "--out-dir", path("t")}).code, cli::kExitDataError);
}

TEST_F(Cli, CombineWritesForecastsAndSidecar) {
  ASSERT_EQ(run({"synth", "--seed", "2", "--out-dir", dir_.string()}).code, 0);
  const std::string f = path("forecasts.csv");
  const std::string o = path("observations.csv");
  const auto qra = run({"combine", "--forecasts", f, "--observations", o, "--method", "qra", "--as-of", "2020-04-19",
                        "-o", path("qra.csv"), "--params", path("qra.json")});
  ASSERT_EQ(qra.code, 0) << qra.err;
  const auto sidecar = nlohmann::json::parse(slurp(path("qra.json")));
  EXPECT_EQ(sidecar.at("method"), "qra");
  EXPECT_TRUE(sidecar.contains("seed"));
  EXPECT_TRUE(sidecar.contains("config"));
  EXPECT_FALSE(sidecar.at("parameters").empty());
  EXPECT_GT(lines(slurp(path("qra.csv"))), 1u);

  const auto again = run({"combine", "--forecasts", f, "--observations", o, "--method", "qra", "--as-of", "2020-04-19",
                          "-o", path("qra2.csv")});
  ASSERT_EQ(again.code, 0);
  EXPECT_EQ(slurp(path("qra.csv")), slurp(path("qra2.csv")));

  EXPECT_EQ(run({"combine", "--forecasts", f, "--observations", o, "--method", "median"}).code, cli::kExitUsage);
  const auto early = run({"combine", "--forecasts", f, "--observations", o, "--method", "emos", "--as-of", "2020-03-01"});
  EXPECT_EQ(early.code, cli::kExitDataError);
  EXPECT_NE(early.err.find("stacked-equal"), std::string::npos) << early.err;
}

TEST_F(Cli, BacktestWritesReports) {
  ASSERT_EQ(run({"synth", "--seed", "4", "--out-dir", dir_.string()}).code, 0);
  const auto r = run({"backtest", "--forecasts", path("forecasts.csv"), "--observations", path("observations.csv"),
                      "--methods", "stacked-equal,qra,sqra", "--swarm", "20", "--iterations", "40", "--out-dir",
                      path("bt")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(path("bt/backtest.csv"));
  EXPECT_EQ(csv.rfind("series_key,method,sharpness,bias,calibration,b_hat,c_hat,distance,mean_interval_score", 0), 0u);
  const auto board = nlohmann::json::parse(slurp(path("bt/leaderboard.json")));
  EXPECT_EQ(board.at("methods").size(), 3u);
  EXPECT_FALSE(board.at("leaderboards").empty());
  EXPECT_TRUE(fs::exists(path("bt/aggregates.csv")));

  EXPECT_EQ(run({"backtest", "--forecasts", path("forecasts.csv"), "--observations", path("observations.csv"),
                 "--methods", "qra,nope", "--out-dir", path("bt2")})
                .code,
            cli::kExitUsage);
}
