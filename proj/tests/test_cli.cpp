#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int cli(const std::string& args) {
  const std::string cmd = std::string(BCNS_CLI) + " " + args + " > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

fs::path scratch() {
  const fs::path d = fs::temp_directory_path() / "bcns_test_cli";
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(Cli, ExitCodes) {
  const fs::path d = scratch();
  const std::string cfgs = BCNS_CONFIG_DIR;
  fs::remove_all(d / "ok");
  EXPECT_EQ(cli("lp-verify --config " + cfgs + "/lp-verify.json --out " + (d / "ok").string()), 0);
  EXPECT_TRUE(fs::exists(d / "ok" / "summary.json"));
  EXPECT_EQ(cli("not-a-scenario --config " + cfgs + "/lp-verify.json"), 2);
  EXPECT_EQ(cli("lp-verify"), 2);
  EXPECT_EQ(cli("lp-verify --config " + (d / "missing.json").string()), 2);
  // a config for another scenario
  EXPECT_EQ(cli("operator-verify --config " + cfgs + "/lp-verify.json --out " + (d / "x").string()), 2);
  std::ofstream(d / "unknown.json") << R"({"scenario": "lp-verify", "grid": {"dim": 2, "cells": 64}})";
  EXPECT_EQ(cli("lp-verify --config " + (d / "unknown.json").string()), 2);
  std::ofstream(d / "slow.json") << R"({"scenario": "lp-verify", "grid": {"points": 32}, "tolerances": {"runtime": 1e-9}})";
  fs::remove_all(d / "slow");
  EXPECT_EQ(cli("lp-verify --config " + (d / "slow.json").string() + " --out " + (d / "slow").string()), 1);
  EXPECT_TRUE(fs::exists(d / "slow" / "summary.json"));
}

TEST(Cli, SeedOverrideChangesData) {
  const fs::path d = scratch();
  const std::string cfg = std::string(BCNS_CONFIG_DIR) + "/lp-verify.json";
  ASSERT_EQ(cli("lp-verify --config " + cfg + " --seed 3 --workers 1 --out " + (d / "s3").string()), 0);
  ASSERT_EQ(cli("lp-verify --config " + cfg + " --seed 4 --out " + (d / "s4").string()), 0);
  std::ifstream a(d / "s3" / "results.csv"), b(d / "s4" / "results.csv");
  std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
  EXPECT_NE(sa, sb);
}

TEST(Cli, FitReport) {
  const fs::path d = scratch();
  std::ofstream(d / "p.csv") << "t,y\n1,1\n2,0.25\n4,0.0625\n8,0.015625\n";
  EXPECT_EQ(cli("fit-report " + (d / "p.csv").string() + " --window 1 8 --json " + (d / "fit.json").string()), 0);
  std::ifstream in(d / "fit.json");
  std::string s((std::istreambuf_iterator<char>(in)), {});
  EXPECT_NE(s.find("\"exponent\""), std::string::npos);
  EXPECT_EQ(cli("fit-report " + (d / "p.csv").string() + " --columns nope"), 2);
}
