#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "bcns/report.hpp"

using namespace bcns;
namespace fs = std::filesystem;

namespace {
fs::path tmp(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "bcns_test_report";
  fs::create_directories(d);
  return d / name;
}
}  // namespace

TEST(Report, NumberFormattingIsFixed) {
  EXPECT_EQ(format_number(3.0), "3");
  EXPECT_EQ(format_number(-64.0), "-64");
  EXPECT_EQ(format_number(0.1), "1.000000000000e-01");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_EQ(format_number(-kInfinity), "-inf");
}

TEST(Report, CsvRoundTrip) {
  Table t({"t", "x", "y"});
  t.add({0.0, 1.5, -2.0});
  t.add({0.5, 1.0 / 3.0, 1e-20});
  EXPECT_THROW(t.add({1.0}), InvalidArgument);
  write_csv(tmp("rt.csv"), t);
  Table back = read_csv(tmp("rt.csv"));
  ASSERT_EQ(back.columns, t.columns);
  ASSERT_EQ(back.rows.size(), 2u);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(back.rows[r][c], t.rows[r][c], 1e-12 * std::abs(t.rows[r][c]));
  std::ofstream(tmp("ragged.csv")) << "t,x\n1,2\n3\n";
  EXPECT_THROW(read_csv(tmp("ragged.csv")), InvalidArgument);
  std::ofstream(tmp("text.csv")) << "t,x\n1,abc\n";
  EXPECT_THROW(read_csv(tmp("text.csv")), InvalidArgument);
}

TEST(Report, FitRecoversExactPowerLaw) {
  Table t({"t", "decay", "flat"});
  for (int i = 1; i <= 200; ++i) {
    const double s = 0.5 * i;
    t.add({s, 7.0 * std::pow(1.0 + s * s, -0.75), 2.0});
  }
  auto rows = fit_report(t, 10.0, 100.0);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].series, "decay");
  EXPECT_NEAR(rows[0].fit.slope, -1.5, 1e-12);
  EXPECT_NEAR(rows[0].fit.r2, 1.0, 1e-12);
  EXPECT_EQ(rows[0].fit.points, 181u);
  EXPECT_NEAR(rows[1].fit.slope, 0.0, 1e-12);
  const json j = to_json(rows, 10.0, 100.0);
  EXPECT_EQ(j["series"][0]["name"], "decay");
  EXPECT_NE(fit_table(rows).find("decay"), std::string::npos);
  auto only = fit_report(t, 10.0, 100.0, {"flat"});
  ASSERT_EQ(only.size(), 1u);
  EXPECT_EQ(only[0].series, "flat");
}

TEST(Report, FitRejectsBadInput) {
  Table t({"t", "x"});
  t.add({1.0, 1.0});
  t.add({2.0, 0.5});
  EXPECT_THROW(fit_report(t, 0.0, 10.0, {"nope"}), InvalidArgument);
  Table u({"time", "x"});
  u.add({1.0, 1.0});
  EXPECT_THROW(fit_report(u, 0.0, 10.0), InvalidArgument);
  EXPECT_THROW(fit_report(tmp("absent.csv"), 0.0, 10.0), InvalidArgument);
}

TEST(Report, ChecksAndSvg) {
  EXPECT_TRUE(check_le("a", 1.0, 1.0).passed);
  EXPECT_FALSE(check_le("a", std::nan(""), 1.0).passed);
  EXPECT_TRUE(check_ge("b", 2.0, 1.0).passed);
  EXPECT_FALSE(check_in("c", 2.0, -1.0, 1.0).passed);
  EXPECT_EQ(to_json(check_in("c", 0.0, -1.0, 1.0))["upper"], 1.0);
  Table t({"t", "y"});
  for (int i = 1; i < 10; ++i) t.add({double(i), std::pow(10.0, -i)});
  write_svg(tmp("y.svg"), t, 1);
  std::ifstream in(tmp("y.svg"));
  std::string svg((std::istreambuf_iterator<char>(in)), {});
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
  EXPECT_NE(svg.find("(log10)"), std::string::npos);
}
