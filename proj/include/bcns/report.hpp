#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bcns/config.hpp"
#include "bcns/field_io.hpp"
#include "bcns/linear_pde.hpp"

namespace bcns {

/// Column-major numeric table; the first column is the abscissa.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  explicit Table(std::vector<std::string> cols = {}) : columns(std::move(cols)) {}
  void add(std::vector<double> row) {
    require(row.size() == columns.size(), "row width does not match the table");
    rows.push_back(std::move(row));
  }
  std::vector<double> column(std::size_t c) const {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r[c]);
    return v;
  }
  std::size_t index(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw InvalidArgument("missing column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
  }
};

// fixed formatting so reruns are byte-identical
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == std::rint(v) && std::abs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0f", v);
    return buf;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

inline void write_csv(const std::filesystem::path& path, const Table& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << t.columns[c];
  out << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t c = 0; c < r.size(); ++c) out << (c ? "," : "") << format_number(r[c]);
    out << "\n";
  }
}

inline Table read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument(path.string() + " is empty");
  std::stringstream hs(line);
  for (std::string c; std::getline(hs, c, ',');) t.columns.push_back(c);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) {
      try {
        row.push_back(std::stod(c));
      } catch (const std::exception&) {
        throw InvalidArgument("non-numeric cell '" + c + "' in " + path.string());
      }
    }
    if (row.size() != t.columns.size()) throw InvalidArgument("ragged row in " + path.string());
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// One polyline per file: y column against the first column. Log y when the
/// series is positive and spans more than two decades.
inline void write_svg(const std::filesystem::path& path, const Table& t, std::size_t col) {
  const double W = 640, H = 400, m = 60;
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : t.rows)
    if (std::isfinite(r[0]) && std::isfinite(r[col])) pts.push_back({r[0], r[col]});
  double ylo = kInfinity, yhi = -kInfinity, xlo = kInfinity, xhi = -kInfinity;
  for (auto [x, y] : pts) {
    xlo = std::min(xlo, x);
    xhi = std::max(xhi, x);
    ylo = std::min(ylo, y);
    yhi = std::max(yhi, y);
  }
  const bool logy = !pts.empty() && ylo > 0.0 && yhi / ylo > 100.0;
  auto fy = [&](double y) { return logy ? std::log10(y) : y; };
  double a = pts.empty() ? 0.0 : fy(ylo), b = pts.empty() ? 1.0 : fy(yhi);
  if (b - a <= 0.0) {
    a -= 0.5;
    b += 0.5;
  }
  if (!(xhi > xlo)) {
    xlo -= 0.5;
    xhi += 0.5;
  }
  auto px = [&](double x) { return m + (x - xlo) / (xhi - xlo) * (W - 2 * m); };
  auto py = [&](double y) { return H - m - (fy(y) - a) / (b - a) * (H - 2 * m); };
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << m << "\" y=\"24\" font-family=\"monospace\" font-size=\"14\">" << t.columns[col]
      << (logy ? " (log10)" : "") << " vs " << t.columns[0] << "</text>\n";
  out << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << W - 2 * m << "\" height=\"" << H - 2 * m
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  auto label = [&](double x, double y, const std::string& s, const char* anchor) {
    out << "<text x=\"" << x << "\" y=\"" << y << "\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"" << anchor
        << "\">" << s << "</text>\n";
  };
  label(m, H - m + 16, format_number(xlo), "start");
  label(W - m, H - m + 16, format_number(xhi), "end");
  label(m - 4, H - m, format_number(logy ? std::pow(10.0, a) : a), "end");
  label(m - 4, m + 10, format_number(logy ? std::pow(10.0, b) : b), "end");
  out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
  for (auto [x, y] : pts) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(x), py(y));
    out << buf;
  }
  out << "\"/>\n</svg>\n";
}

// --- checks and summaries --------------------------------------------------------

struct Check {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  std::string relation;  // "<=", ">=", "in" (value within [limit, upper])
  double upper = 0.0;
  bool passed = false;
  std::string note;
};

inline Check check_le(std::string name, double v, double limit, std::string note = {}) {
  return {std::move(name), v, limit, "<=", 0.0, std::isfinite(v) && v <= limit, std::move(note)};
}
inline Check check_ge(std::string name, double v, double limit, std::string note = {}) {
  return {std::move(name), v, limit, ">=", 0.0, std::isfinite(v) && v >= limit, std::move(note)};
}
inline Check check_in(std::string name, double v, double lo, double hi, std::string note = {}) {
  return {std::move(name), v, lo, "in", hi, std::isfinite(v) && v >= lo && v <= hi, std::move(note)};
}

inline json to_json(const Check& c) {
  json j{{"name", c.name}, {"value", std::isfinite(c.value) ? json(c.value) : json(format_number(c.value))},
         {"relation", c.relation}, {"limit", c.limit}};
  if (c.relation == "in") j["upper"] = c.upper;
  j["passed"] = c.passed;
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

struct Checkpoint {
  double t = 0.0;
  std::string label;
  FluidState state;
};

struct ScenarioOutput {
  Table table;
  std::vector<Check> checks;
  std::vector<Checkpoint> checkpoints;
  json extra = json::object();
  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }
};

inline void write_checkpoints(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                              const std::vector<Checkpoint>& cps) {
  std::filesystem::create_directories(dir);
  json man;
  json times = json::array(), files = json::array();
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const auto& cp = cps[i];
    times.push_back(cp.t);
    auto put = [&](const std::string& what, const RealField& f) {
      const std::string name = "cp" + std::to_string(i) + "_" + what + ".bin";
      write_field((dir / name).string(), f);
      files.push_back({{"index", i}, {"t", cp.t}, {"label", cp.label}, {"field", what}, {"file", name}});
    };
    put("a", cp.state.a);
    put("u", cp.state.u);
    for (const auto& w : cp.state.weighted) {
      put("A" + std::to_string(w.axis), w.A);
      put("U" + std::to_string(w.axis), w.U);
    }
  }
  const json cj = to_json(cfg);
  man["times"] = times;
  man["params"] = cj["params"];
  man["grid"] = cj["grid"];
  man["files"] = files;
  std::ofstream(dir / "manifest.json", std::ios::binary) << man.dump(2) << "\n";
}

/// Writes results.csv, one SVG per series, summary.json and checkpoints/.
inline void write_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg, const ScenarioOutput& out,
                          double runtime) {
  std::filesystem::create_directories(dir);
  write_csv(dir / "results.csv", out.table);
  for (std::size_t c = 1; c < out.table.columns.size(); ++c) write_svg(dir / (out.table.columns[c] + ".svg"), out.table, c);
  json s;
  s["scenario"] = cfg.scenario;
  s["passed"] = out.passed();
  json failing = json::array(), checks = json::array();
  for (const auto& c : out.checks) {
    checks.push_back(to_json(c));
    if (!c.passed) failing.push_back(c.name);
  }
  s["failing"] = failing;
  s["checks"] = checks;
  s["runtime_seconds"] = runtime;
  if (!out.extra.empty()) s["details"] = out.extra;
  s["config"] = to_json(cfg);
  std::ofstream(dir / "summary.json", std::ios::binary) << s.dump(2) << "\n";
  write_checkpoints(dir / "checkpoints", cfg, out.checkpoints);
}

// --- decay fits over a results table ----------------------------------------------

struct FitRow {
  std::string series;
  DecayFit fit;
};

/// Fits every column (or the listed ones) against <t> over [t1, t2].
inline std::vector<FitRow> fit_report(const Table& t, double t1, double t2, const std::vector<std::string>& only = {}) {
  if (t.columns.empty() || t.columns[0] != "t") throw InvalidArgument("fit_report needs a leading 't' column");
  const auto time = t.column(0);
  std::vector<FitRow> rows;
  std::vector<std::string> names = only;
  if (names.empty()) names.assign(t.columns.begin() + 1, t.columns.end());
  for (const auto& n : names) rows.push_back({n, measure_decay(time, t.column(t.index(n)), t1, t2)});
  return rows;
}

inline std::vector<FitRow> fit_report(const std::filesystem::path& csv, double t1, double t2,
                                      const std::vector<std::string>& only = {}) {
  return fit_report(read_csv(csv), t1, t2, only);
}

inline json to_json(const std::vector<FitRow>& rows, double t1, double t2) {
  json j{{"window", {t1, t2}}, {"series", json::array()}};
  for (const auto& r : rows)
    j["series"].push_back({{"name", r.series},
                           {"exponent", r.fit.slope},
                           {"r2", r.fit.r2},
                           {"ci", {r.fit.ci_low, r.fit.ci_high}},
                           {"points", r.fit.points}});
  return j;
}

inline std::string fit_table(const std::vector<FitRow>& rows) {
  std::string s;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-28s %10s %8s %20s %6s\n", "series", "exponent", "R^2", "95% CI", "n");
  s += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-28s %10.4f %8.5f   [%7.4f, %7.4f] %6zu\n", r.series.c_str(), r.fit.slope, r.fit.r2,
                  r.fit.ci_low, r.fit.ci_high, r.fit.points);
    s += buf;
  }
  return s;
}

}  // namespace bcns
