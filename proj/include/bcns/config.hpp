#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bcns/cns.hpp"

namespace bcns {

using json = nlohmann::ordered_json;

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"lp-verify",   "operator-verify", "linear-estimates", "linear-decay",
                                              "local-existence", "global-bounds", "weighted-bounds"};
  return names;
}

struct GridConfig {
  int dim = 2;
  int points = 64;
  double half_length_pi = 8.0;  // box [-L, L)^d with L = half_length_pi * pi
  GridSpec spec() const { return make_grid(dim, points, half_length_pi * pi); }
};

struct DataConfig {
  // band: A G(x/sigma) cos(kappa x_k), k = 0 for a and k = c for u_c
  // gaussian: A G(x/sigma), centres shifted per component
  // hermite: Gaussian-derivative data (mean free)
  // random: random band field on [xi_lo, xi_hi] with |xi|^slope amplitudes
  std::string kind = "band";
  double amplitude = 1e-2;
  double sigma = 8.0;
  double kappa = 0.8;
  double xi_lo = 0.25;
  double xi_hi = 2.0;
  double slope = 0.0;
  std::uint64_t seed = 1;
};

struct ExperimentConfig {
  std::string scenario;
  GridConfig grid;
  double mu = 1.0;
  double lambda = -1.0;
  std::string pressure = "gamma";
  double gamma = 1.4;
  double pressure_coeff = 1.0;
  DataConfig data;
  double horizon = 1.0;
  double dt = 1e-2;
  int sample_every = 1;
  int j0 = 0;
  double p = 2.0;
  double epsilon = 0.1;
  std::map<std::string, double> tolerances;
  std::map<std::string, double> options;  // scenario knobs (counts, switches as 0/1)
  std::string output = "out";

  CNSParams params() const {
    return {mu, lambda, pressure == "affine" ? PressureLaw::affine(pressure_coeff)
                                             : PressureLaw::gamma_law(gamma, pressure_coeff)};
  }
  double tol(const std::string& k) const { return tolerances.at(k); }
  double opt(const std::string& k) const { return options.at(k); }
};

/// Defaults per scenario; the tolerance and option keys set here are the only ones a config may override.
inline ExperimentConfig scenario_defaults(const std::string& name) {
  ExperimentConfig c;
  c.scenario = name;
  auto& T = c.tolerances;
  auto& O = c.options;
  if (name == "lp-verify") {
    c.grid = {2, 64, 8.0};
    c.data = {"random", 1.0, 1.0, 0.0, 0.0, 0.0, -0.5, 21};
    T = {{"unity", 1e-10}, {"orthogonality", 1e-12}, {"bony", 1e-10}, {"projections", 1e-12}, {"runtime", 60.0}};
  } else if (name == "operator-verify") {
    c.grid = {2, 64, 8.0};
    c.data = {"random", 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 500};
    T = {{"across_j", 3.0}, {"across_grids", 1.2}, {"runtime", 300.0}};
    O = {{"samples", 100}};
  } else if (name == "linear-estimates") {
    c.grid = {2, 64, 2.0};
    c.data = {"random", 1.0, 1.0, 0.0, 0.0, 2.5, 0.0, 11};
    c.horizon = 1.0;
    c.dt = 1e-2;
    T = {{"rk4", 1e-8}, {"semigroup", 1e-12}, {"across_resolutions", 1.2}, {"runtime", 600.0}};
    O = {{"problems", 20}};
  } else if (name == "linear-decay") {
    c.grid = {3, 64, 32.0};
    c.data = {"gaussian", 1e-2, 1.0, 0.0, 0.0, 0.0, 0.0, 1};
    c.horizon = 100.0;
    c.dt = 0.5;
    c.sample_every = 2;
    T = {{"exponent", -1.5}, {"linear_band", 0.15}, {"nonlinear_band", 0.25}, {"r2", 0.99}, {"runtime", 900.0}};
    O = {{"fit_from", 10.0}, {"fit_to", 100.0}, {"nonlinear", 1}};
  } else if (name == "local-existence") {
    c.grid = {2, 256, 8.0};
    c.data = {"hermite", 5e-2, 2.5, 0.0, 0.0, 0.0, 0.0, 1};
    c.horizon = 0.2;
    c.dt = 2e-3;
    T = {{"contraction", 0.9}, {"terminal", 1e-6}, {"limit", 1e-4}, {"runtime", 600.0}};
    O = {{"max_iterations", 30}};
  } else if (name == "global-bounds") {
    c.grid = {3, 64, 32.0};
    c.data = {"band", 1e-2, 8.0, 0.8, 0.0, 0.0, 0.0, 1};
    c.horizon = 50.0;
    c.dt = 0.5;
    T = {{"growth", 0.01}, {"amplitude_agreement", 0.3}, {"runtime", 1200.0}};
  } else if (name == "weighted-bounds") {
    c.grid = {2, 64, 6.0};
    c.data = {"hermite", 5e-2, 2.5, 0.0, 0.0, 0.0, 0.0, 1};
    c.horizon = 1.0;
    c.dt = 1e-3;
    c.sample_every = 10;
    T = {{"consistency", 1e-4}, {"heat_residual", 1e-3}, {"runtime", 600.0}};
    O = {{"residuals", 1}};
  } else {
    throw ConfigError("unknown scenario '" + name + "'");
  }
  return c;
}

namespace detail {

inline void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad type for '" + std::string(key) + "' in " + where);
  }
}

inline void read_table(const json& j, const char* key, std::map<std::string, double>& out, const std::string& where) {
  if (!j.contains(key)) return;
  const json& t = j.at(key);
  if (!t.is_object()) throw ConfigError(std::string(key) + " must be an object");
  for (const auto& [k, v] : t.items()) {
    if (!out.count(k)) throw ConfigError("unknown key '" + k + "' in " + where + "." + key);
    if (!v.is_number()) throw ConfigError(where + "." + key + "." + k + " must be a number");
    out[k] = v.get<double>();
  }
}

}  // namespace detail

inline void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (c.grid.dim != 2 && c.grid.dim != 3) fail("grid.dim must be 2 or 3");
  if (c.grid.points < 8 || (c.grid.points & (c.grid.points - 1)) != 0) fail("grid.points must be a power of two >= 8");
  if (!(c.grid.half_length_pi > 0.0)) fail("grid.half_length_pi must be positive");
  if (c.pressure != "gamma" && c.pressure != "affine") fail("params.pressure.law must be 'gamma' or 'affine'");
  try {
    c.params().validate();
  } catch (const std::exception& e) {
    fail(std::string("params: ") + e.what());
  }
  static const std::set<std::string> kinds{"band", "gaussian", "hermite", "random", "zero"};
  if (!kinds.count(c.data.kind)) fail("data.kind must be one of band, gaussian, hermite, random, zero");
  if (!(c.data.amplitude >= 0.0)) fail("data.amplitude must be non-negative");
  if (!(c.data.sigma > 0.0)) fail("data.sigma must be positive");
  if (!(c.horizon > 0.0)) fail("horizon must be positive");
  if (!(c.dt > 0.0)) fail("dt must be positive");
  if (c.sample_every < 1) fail("sample_every must be >= 1");
  if (!(c.p >= 1.0)) fail("p must be >= 1");
  if (!(c.epsilon > 0.0)) fail("epsilon must be positive");
  for (const auto& [k, v] : c.tolerances)
    if (k != "exponent" && !(v > 0.0)) fail("tolerance '" + k + "' must be positive");
  if (c.output.empty()) fail("output must be a non-empty path");
}

/// Parses a config for `scenario`; keys not in the schema are rejected.
inline ExperimentConfig parse_config(const json& j, const std::string& scenario) {
  using detail::read;
  ExperimentConfig c = scenario_defaults(scenario);
  detail::reject_unknown(j, {"scenario", "grid", "params", "data", "horizon", "dt", "sample_every", "j0", "p", "epsilon",
                             "tolerances", "options", "output"},
                         "config");
  if (j.contains("scenario")) {
    std::string s;
    read(j, "scenario", s, "config");
    if (s != scenario) throw ConfigError("config is for scenario '" + s + "', not '" + scenario + "'");
  }
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    detail::reject_unknown(g, {"dim", "points", "half_length_pi"}, "grid");
    read(g, "dim", c.grid.dim, "grid");
    read(g, "points", c.grid.points, "grid");
    read(g, "half_length_pi", c.grid.half_length_pi, "grid");
  }
  if (j.contains("params")) {
    const json& p = j.at("params");
    detail::reject_unknown(p, {"mu", "lambda", "pressure"}, "params");
    read(p, "mu", c.mu, "params");
    read(p, "lambda", c.lambda, "params");
    if (p.contains("pressure")) {
      const json& q = p.at("pressure");
      detail::reject_unknown(q, {"law", "gamma", "coeff"}, "params.pressure");
      read(q, "law", c.pressure, "params.pressure");
      read(q, "gamma", c.gamma, "params.pressure");
      read(q, "coeff", c.pressure_coeff, "params.pressure");
    }
  }
  if (j.contains("data")) {
    const json& d = j.at("data");
    detail::reject_unknown(d, {"kind", "amplitude", "sigma", "kappa", "xi_lo", "xi_hi", "slope", "seed"}, "data");
    read(d, "kind", c.data.kind, "data");
    read(d, "amplitude", c.data.amplitude, "data");
    read(d, "sigma", c.data.sigma, "data");
    read(d, "kappa", c.data.kappa, "data");
    read(d, "xi_lo", c.data.xi_lo, "data");
    read(d, "xi_hi", c.data.xi_hi, "data");
    read(d, "slope", c.data.slope, "data");
    read(d, "seed", c.data.seed, "data");
  }
  read(j, "horizon", c.horizon, "config");
  read(j, "dt", c.dt, "config");
  read(j, "sample_every", c.sample_every, "config");
  read(j, "j0", c.j0, "config");
  read(j, "p", c.p, "config");
  read(j, "epsilon", c.epsilon, "config");
  read(j, "output", c.output, "config");
  detail::read_table(j, "tolerances", c.tolerances, "config");
  detail::read_table(j, "options", c.options, "config");
  validate(c);
  return c;
}

inline ExperimentConfig load_config(const std::string& path, const std::string& scenario) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j, scenario);
}

inline json to_json(const ExperimentConfig& c) {
  json j;
  j["scenario"] = c.scenario;
  j["grid"] = {{"dim", c.grid.dim}, {"points", c.grid.points}, {"half_length_pi", c.grid.half_length_pi}};
  j["params"] = {{"mu", c.mu},
                 {"lambda", c.lambda},
                 {"pressure", {{"law", c.pressure}, {"gamma", c.gamma}, {"coeff", c.pressure_coeff}}}};
  j["data"] = {{"kind", c.data.kind},   {"amplitude", c.data.amplitude}, {"sigma", c.data.sigma},
               {"kappa", c.data.kappa}, {"xi_lo", c.data.xi_lo},         {"xi_hi", c.data.xi_hi},
               {"slope", c.data.slope}, {"seed", c.data.seed}};
  j["horizon"] = c.horizon;
  j["dt"] = c.dt;
  j["sample_every"] = c.sample_every;
  j["j0"] = c.j0;
  j["p"] = c.p;
  j["epsilon"] = c.epsilon;
  j["tolerances"] = c.tolerances;
  j["options"] = c.options;
  j["output"] = c.output;
  return j;
}

}  // namespace bcns
