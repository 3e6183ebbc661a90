// One PASS/FAIL line per acceptance criterion; exit status 0 iff all pass.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <sstream>

#include "bcns/scenarios.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = BCNS_CONFIG_DIR;
const fs::path kOut = "acceptance_out";

std::map<std::string, bcns::RunOutcome> cache;

const bcns::RunOutcome& run_config(const std::string& file, const std::string& tag = {}) {
  const std::string key = file + tag;
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  std::ifstream in(kConfigs / file);
  const auto j = bcns::json::parse(in);
  bcns::ExperimentConfig cfg = bcns::parse_config(j, j.at("scenario").get<std::string>());
  const fs::path dir = kOut / (fs::path(file).stem().string() + tag);
  std::fprintf(stderr, "  running %s -> %s\n", file.c_str(), dir.string().c_str());
  auto r = bcns::run(cfg, dir);
  std::fprintf(stderr, "  done in %.1f s\n", r.runtime);
  return cache.emplace(key, std::move(r)).first->second;
}

struct Verdict {
  bool ok = true;
  std::string detail;
  void add(const bcns::Check& c) {
    ok = ok && c.passed;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s%s=%.3g%s", detail.empty() ? "" : " ", c.name.c_str(), c.value, c.passed ? "" : "(!)");
    detail += buf;
  }
  void fail(const std::string& why) {
    ok = false;
    detail += (detail.empty() ? "" : " ") + why;
  }
};

// checks from one run, filtered by name (empty filter = all)
void take(Verdict& v, const bcns::RunOutcome& r, const std::vector<std::string>& names = {}) {
  if (r.exit_code == 2) return v.fail("config rejected: " + r.error);
  for (const auto& c : r.output.checks) {
    const bool wanted = names.empty() || std::find(names.begin(), names.end(), c.name) != names.end();
    if (wanted) v.add(c);
  }
  for (const auto& n : names)
    if (std::none_of(r.output.checks.begin(), r.output.checks.end(), [&](const bcns::Check& c) { return c.name == n; }))
      v.fail("missing check " + n);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

int main() {
  using Crit = std::pair<std::string, std::function<Verdict()>>;
  const std::vector<Crit> crits{
      {"C1 harmonic-analysis suite", [] { Verdict v; take(v, run_config("lp-verify.json")); return v; }},
      {"C2 operator constants", [] { Verdict v; take(v, run_config("operator-verify.json")); return v; }},
      {"C3 linear solver exactness",
       [] {
         Verdict v;
         take(v, run_config("linear-estimates.json"), {"coupled_vs_rk4", "regime_boundary_misclassified", "semigroup_property"});
         return v;
       }},
      {"C4 estimate ratios",
       [] {
         Verdict v;
         take(v, run_config("linear-estimates.json"),
              {"transport_ratios_finite", "transport_max_ratio_across_resolutions", "lame_ratios_finite",
               "lame_max_ratio_across_resolutions", "coupled_ratios_finite", "coupled_max_ratio_across_resolutions",
               "runtime_seconds"});
         return v;
       }},
      {"C5 decay exponent", [] { Verdict v; take(v, run_config("linear-decay.json")); return v; }},
      {"C6 Picard local existence", [] { Verdict v; take(v, run_config("local-existence.json")); return v; }},
      {"C7 weighted consistency (d=2,3)",
       [] {
         Verdict v;
         take(v, run_config("weighted-bounds.json"), {"weighted_density_drift", "weighted_velocity_drift", "runtime_seconds"});
         take(v, run_config("weighted-bounds-3d.json"), {"weighted_density_drift", "weighted_velocity_drift", "runtime_seconds"});
         return v;
       }},
      {"C8 global-bound shadow", [] { Verdict v; take(v, run_config("global-bounds.json")); return v; }},
      {"C9 effective-velocity residuals",
       [] {
         Verdict v;
         take(v, run_config("weighted-bounds.json"),
              {"effective_velocity_heat_residual", "weighted_effective_velocity_heat_residual"});
         return v;
       }},
      {"C10 determinism",
       [] {
         Verdict v;
         for (const std::string f : {"lp-verify.json", "operator-verify.json", "weighted-bounds.json"}) {
           run_config(f);
           run_config(f, "_rerun");
           const std::string stem = fs::path(f).stem().string();
           const std::string a = slurp(kOut / stem / "results.csv"), b = slurp(kOut / (stem + "_rerun") / "results.csv");
           const bool same = !a.empty() && a == b;
           if (!same) v.ok = false;
           v.detail += (v.detail.empty() ? "" : " ") + stem + (same ? "=identical" : "=DIFFERS");
         }
         return v;
       }},
  };
  int failed = 0;
  for (const auto& [name, f] : crits) {
    Verdict v;
    try {
      v = f();
    } catch (const std::exception& e) {
      v.fail(std::string("exception: ") + e.what());
    }
    failed += !v.ok;
    std::printf("%s %s: %s\n", v.ok ? "PASS" : "FAIL", name.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(crits.size()) - failed, crits.size());
  return failed == 0 ? 0 : 1;
}
