#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "bcns/scenarios.hpp"

using namespace bcns;
namespace fs = std::filesystem;

TEST(Config, DefaultsAreValidForEveryScenario) {
  for (const auto& name : scenario_names()) {
    ExperimentConfig c = scenario_defaults(name);
    EXPECT_EQ(c.scenario, name);
    EXPECT_NO_THROW(validate(c)) << name;
    EXPECT_GT(c.tol("runtime"), 0.0) << name;
  }
  EXPECT_THROW(scenario_defaults("no-such-scenario"), ConfigError);
}

TEST(Config, OverridesAndRoundTrip) {
  const json j = json::parse(R"({"scenario": "weighted-bounds", "grid": {"dim": 3, "points": 32},
    "params": {"mu": 2.0, "lambda": 0.5, "pressure": {"law": "affine", "coeff": 3.0}},
    "data": {"amplitude": 0.02, "seed": 9}, "dt": 0.01, "tolerances": {"consistency": 1e-5},
    "options": {"residuals": 0}})");
  ExperimentConfig c = parse_config(j, "weighted-bounds");
  EXPECT_EQ(c.grid.dim, 3);
  EXPECT_EQ(c.grid.points, 32);
  EXPECT_DOUBLE_EQ(c.mu, 2.0);
  EXPECT_EQ(c.pressure, "affine");
  EXPECT_DOUBLE_EQ(c.data.amplitude, 0.02);
  EXPECT_EQ(c.data.seed, 9u);
  EXPECT_DOUBLE_EQ(c.tol("consistency"), 1e-5);
  EXPECT_DOUBLE_EQ(c.tol("heat_residual"), 1e-3);  // untouched default
  EXPECT_DOUBLE_EQ(c.opt("residuals"), 0.0);
  ExperimentConfig back = parse_config(to_json(c), "weighted-bounds");
  EXPECT_EQ(to_json(back).dump(), to_json(c).dump());
}

TEST(Config, RejectsUnknownKeysAtEveryLevel) {
  const std::vector<std::string> bad{
      R"({"grid": {"dim": 2, "size": 64}})",
      R"({"params": {"mu": 1, "nu": 1}})",
      R"({"params": {"pressure": {"law": "gamma", "kappa": 2}}})",
      R"({"data": {"kind": "band", "width": 3}})",
      R"({"horizon": 1, "final_time": 2})",
      R"({"tolerances": {"made_up": 1.0}})",
      R"({"options": {"made_up": 1.0}})",
  };
  for (const auto& s : bad) EXPECT_THROW(parse_config(json::parse(s), "weighted-bounds"), ConfigError) << s;
}

TEST(Config, RejectsInvalidValues) {
  const std::vector<std::string> bad{
      R"({"scenario": "lp-verify"})",
      R"({"grid": {"dim": 4}})",
      R"({"grid": {"points": 48}})",
      R"({"grid": {"points": 4}})",
      R"({"grid": {"dim": "two"}})",
      R"({"params": {"mu": -1}})",
      R"({"params": {"mu": 1, "lambda": -3}})",
      R"({"params": {"pressure": {"law": "polytropic"}}})",
      R"({"data": {"kind": "noise"}})",
      R"({"data": {"sigma": 0}})",
      R"({"dt": 0})",
      R"({"horizon": -1})",
      R"({"sample_every": 0})",
      R"({"tolerances": {"consistency": -1}})",
  };
  for (const auto& s : bad) EXPECT_THROW(parse_config(json::parse(s), "weighted-bounds"), ConfigError) << s;
}

TEST(Config, LoadConfigErrors) {
  const fs::path dir = fs::temp_directory_path() / "bcns_test_config";
  fs::create_directories(dir);
  EXPECT_THROW(load_config((dir / "missing.json").string(), "lp-verify"), ConfigError);
  std::ofstream(dir / "broken.json") << "{ not json";
  EXPECT_THROW(load_config((dir / "broken.json").string(), "lp-verify"), ConfigError);
  std::ofstream(dir / "ok.json") << R"({"scenario": "lp-verify", "grid": {"points": 32}})";
  EXPECT_EQ(load_config((dir / "ok.json").string(), "lp-verify").grid.points, 32);
}

TEST(Config, ShippedConfigsParse) {
  int n = 0;
  for (const auto& e : fs::directory_iterator(BCNS_CONFIG_DIR)) {
    if (e.path().extension() != ".json") continue;
    std::ifstream in(e.path());
    const json j = json::parse(in);
    EXPECT_NO_THROW(parse_config(j, j.at("scenario").get<std::string>())) << e.path();
    ++n;
  }
  EXPECT_GE(n, 7);
}

TEST(Run, InvalidConfigGivesExitTwoAndNoArtifacts) {
  ExperimentConfig c = scenario_defaults("lp-verify");
  c.grid.points = 12;
  const fs::path dir = fs::temp_directory_path() / "bcns_test_run_bad";
  fs::remove_all(dir);
  RunOutcome r = run(c, dir);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_FALSE(fs::exists(dir));
}

TEST(Run, VacuumAmplitudeIsAConfigError) {
  ExperimentConfig c = scenario_defaults("weighted-bounds");
  c.data.amplitude = 0.9;
  EXPECT_EQ(run(c, fs::temp_directory_path() / "bcns_test_run_vacuum").exit_code, 2);
}

TEST(Run, FailingCheckGivesExitOneAndNamesIt) {
  ExperimentConfig c = scenario_defaults("lp-verify");
  c.grid.points = 32;
  c.tolerances["runtime"] = 1e-9;  // nothing finishes in a nanosecond
  const fs::path dir = fs::temp_directory_path() / "bcns_test_run_fail";
  fs::remove_all(dir);
  RunOutcome r = run(c, dir);
  EXPECT_EQ(r.exit_code, 1);
  std::ifstream in(dir / "summary.json");
  const json s = json::parse(in);
  EXPECT_FALSE(s.at("passed").get<bool>());
  EXPECT_EQ(s.at("failing"), json::array({"runtime_seconds"}));
  EXPECT_TRUE(fs::exists(dir / "results.csv"));
  EXPECT_TRUE(fs::exists(dir / "unity_error.svg"));
  EXPECT_TRUE(fs::exists(dir / "checkpoints" / "manifest.json"));
}
