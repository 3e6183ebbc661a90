#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "bcns/scenarios.hpp"

namespace {

void setup_logging() {
  const char* env = std::getenv("BCNS_LOG");
  const std::string level = env ? env : "warn";
  if (level == "error")
    spdlog::set_level(spdlog::level::err);
  else if (level == "warn")
    spdlog::set_level(spdlog::level::warn);
  else if (level == "info")
    spdlog::set_level(spdlog::level::info);
  else if (level == "debug")
    spdlog::set_level(spdlog::level::debug);
  else {
    spdlog::set_level(spdlog::level::warn);
    spdlog::warn("BCNS_LOG='{}' not one of error, warn, info, debug; using warn", level);
  }
}

int fit_command(const std::string& csv, const std::vector<double>& window, const std::vector<std::string>& columns,
                const std::string& json_out) {
  try {
    const auto rows = bcns::fit_report(csv, window[0], window[1], columns);
    std::cout << bcns::fit_table(rows);
    const auto j = bcns::to_json(rows, window[0], window[1]);
    if (!json_out.empty())
      std::ofstream(json_out) << j.dump(2) << "\n";
    else
      std::cout << j.dump(2) << "\n";
    return 0;
  } catch (const bcns::Error& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Numerical laboratory for the barotropic compressible Navier-Stokes system"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int workers = 0;
  std::optional<std::uint64_t> seed;
  std::string chosen;
  for (const auto& name : bcns::scenario_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " scenario");
    sub->add_option("--config", config_path, "JSON config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_option("--workers", workers, "cap on worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", seed, "data seed (overrides the config)");
    sub->callback([&chosen, name] { chosen = name; });
  }
  std::string csv, fit_json;
  std::vector<double> window{10.0, 100.0};
  std::vector<std::string> columns;
  auto* fit = app.add_subcommand("fit-report", "fit <t>^slope to the columns of a results.csv");
  fit->add_option("csv", csv, "results.csv with a leading t column")->required()->check(CLI::ExistingFile);
  fit->add_option("--window", window, "t1 t2")->expected(2);
  fit->add_option("--columns", columns, "series to fit (default: all)");
  fit->add_option("--json", fit_json, "write the JSON report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (fit->parsed()) return fit_command(csv, window, columns, fit_json);

  bcns::ExperimentConfig cfg;
  try {
    cfg = bcns::load_config(config_path, chosen);
    if (!out_dir.empty()) cfg.output = out_dir;
    if (seed) cfg.data.seed = *seed;
    bcns::validate(cfg);
  } catch (const bcns::Error& e) {
    spdlog::error("invalid config: {}", e.what());
    return 2;
  }
  bcns::worker_limit() = workers;
  spdlog::info("scenario {} -> {}", cfg.scenario, cfg.output);
  const bcns::RunOutcome r = bcns::run(cfg, cfg.output);
  if (r.exit_code == 2) {
    spdlog::error("invalid config: {}", r.error);
    return 2;
  }
  for (const auto& c : r.output.checks)
    spdlog::log(c.passed ? spdlog::level::info : spdlog::level::warn, "{} {} = {} (limit {})", c.passed ? "ok  " : "FAIL",
                c.name, c.value, c.limit);
  if (!r.error.empty()) spdlog::error("run aborted: {}", r.error);
  std::cout << (r.exit_code == 0 ? "PASS " : "FAIL ") << cfg.scenario << " (" << r.runtime << " s) -> " << cfg.output
            << "\n";
  return r.exit_code;
}
