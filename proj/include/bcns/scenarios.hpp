#pragma once

#include <chrono>
#include <random>

#include "bcns/config.hpp"
#include "bcns/diagnostics.hpp"
#include "bcns/parallel.hpp"
#include "bcns/picard.hpp"
#include "bcns/report.hpp"

namespace bcns {

// --- data ---------------------------------------------------------------------

inline RealField scaled_to_sup(RealField f, double amplitude) {
  const double m = lp_norm(f, kInfinity);
  if (m > 0.0) f *= amplitude / m;
  return f;
}

/// Initial state from the data section at the given amplitude.
inline FluidState initial_state(const GridSpec& g, const DataConfig& d, double amplitude) {
  if (amplitude > 0.25) throw ConfigError("data.amplitude above 1/4 leaves no margin against vacuum");
  const int dim = g.dim;
  FluidState s{RealField(g), RealField(g, dim), {}, 0.0};
  if (d.kind == "zero" || amplitude == 0.0) return s;
  std::vector<RealField> comps;
  if (d.kind == "band") {
    // Nyquist planes are invisible to first derivatives, so density there would never move
    s.a = drop_nyquist(remove_mean(gaussian_bump(g, {amplitude, d.sigma, {}, {d.kappa, 0.0, 0.0}})));
    for (int c = 0; c < dim; ++c) {
      std::array<double, 3> w{};
      w[c] = d.kappa;
      comps.push_back(drop_nyquist(remove_mean(gaussian_bump(g, {amplitude, d.sigma, {}, w}))));
    }
  } else if (d.kind == "gaussian") {
    s.a = remove_mean(gaussian_bump(g, {amplitude, d.sigma, {}, {}}));
    for (int c = 0; c < dim; ++c) comps.push_back(remove_mean(gaussian_bump(g, {amplitude, d.sigma, {0.5 * c, 0.0, 0.0}, {}})));
  } else if (d.kind == "hermite") {
    return hermite_state(g, amplitude, d.sigma);
  } else if (d.kind == "random") {
    const BandSpec band{d.xi_lo, d.xi_hi, d.slope};
    s.a = scaled_to_sup(random_band_field(g, d.seed, band), amplitude);
    s.u = scaled_to_sup(random_band_field(g, d.seed + 1, band, dim), amplitude);
    return s;
  }
  s.u = stack(std::span<const RealField>(comps));
  return s;
}

namespace detail {

inline double rel_l2(const RealField& x, const RealField& ref) {
  const double n = lp_norm(ref, 2);
  return n > 0.0 ? lp_norm(x - ref, 2) / n : lp_norm(x, 2);
}

inline double spectral_norm(const SpectralCoeffs& F) {
  double s = 0.0;
  for (const auto& z : F.coeffs()) s += std::norm(z);
  return std::sqrt(s);
}

inline double max_of(const std::vector<double>& v) {
  double m = -kInfinity;
  for (double x : v)
    if (std::isfinite(x)) m = std::max(m, x);
  return m;
}

inline double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *lo > 0.0 ? *hi / *lo : kInfinity;
}

// RK4 on a_t = -k v, v_t = alpha k a - nu k^2 v, halving the step until it settles.
inline std::pair<double, double> rk4_reference(double alpha, double nu, double k, double a0, double v0, double t) {
  auto run = [&](long n) {
    const double h = t / n;
    double a = a0, v = v0;
    auto f = [&](double x, double y) { return std::pair{-k * y, alpha * k * x - nu * k * k * y}; };
    for (long i = 0; i < n; ++i) {
      auto [k1a, k1v] = f(a, v);
      auto [k2a, k2v] = f(a + 0.5 * h * k1a, v + 0.5 * h * k1v);
      auto [k3a, k3v] = f(a + 0.5 * h * k2a, v + 0.5 * h * k2v);
      auto [k4a, k4v] = f(a + h * k3a, v + h * k3v);
      a += h / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a);
      v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
    }
    return std::pair{a, v};
  };
  long n = std::max(16L, static_cast<long>(std::ceil(t * nu * k * k)));
  auto prev = run(n);
  for (int it = 0; it < 16; ++it) {
    n *= 2;
    auto cur = run(n);
    const double ch = std::max(std::abs(cur.first - prev.first), std::abs(cur.second - prev.second));
    prev = cur;
    if (ch < 1e-14) break;
  }
  return prev;
}

}  // namespace detail

// --- lp-verify -----------------------------------------------------------------

inline ScenarioOutput run_lp_verify(const ExperimentConfig& c) {
  const GridSpec g = c.grid.spec();
  const DyadicPartition part = DyadicPartition::clamped(g, c.j0);
  const double lo = std::ldexp(1.0, part.j_min()), hi = std::ldexp(1.0, part.j_max());
  const RealField f = random_band_field(g, c.data.seed, {lo, hi, c.data.slope});
  const double nf = lp_norm(f, 2);
  ScenarioOutput out;
  out.table = Table({"j", "unity_error", "cross_block_max", "block_l2", "low_sum_error"});

  std::vector<double> unity(part.blocks(), 0.0);
  for_each_mode(g, [&](const Mode& md) {
    if (md.norm < lo || md.norm > hi) return;
    const int j = std::min(part.j_max(), static_cast<int>(std::floor(std::log2(md.norm))));
    auto& u = unity[j - part.j_min()];
    u = std::max(u, std::abs(part.total_weight(md.index) - 1.0));
  });
  std::vector<RealField> blocks;
  for (int j = part.j_min(); j <= part.j_max(); ++j) blocks.push_back(block(f, j, part));
  double worst_cross = 0.0, worst_unity = 0.0, worst_low = 0.0;
  RealField sum(g);
  for (int j = part.j_min(); j <= part.j_max(); ++j) {
    const RealField& bj = blocks[j - part.j_min()];
    sum += bj;
    double cross = 0.0;
    for (int jj = part.j_min(); jj <= part.j_max(); ++jj)
      if (std::abs(j - jj) >= 2) cross = std::max(cross, lp_norm(block(bj, jj, part), 2) / nf);
    RealField tail = low_sum(f, j, part);
    for (int jj = j + 1; jj <= part.j_max(); ++jj) tail += blocks[jj - part.j_min()];
    const double lerr = detail::rel_l2(tail, f);
    const double uerr = unity[j - part.j_min()];
    worst_cross = std::max(worst_cross, cross);
    worst_unity = std::max(worst_unity, uerr);
    worst_low = std::max(worst_low, lerr);
    out.table.add({static_cast<double>(j), uerr, cross, lp_norm(bj, 2), lerr});
  }
  out.checks.push_back(check_le("partition_of_unity", worst_unity, c.tol("unity")));
  out.checks.push_back(check_le("block_orthogonality", worst_cross, c.tol("orthogonality")));
  out.checks.push_back(check_le("block_reconstruction", std::max(detail::rel_l2(sum, f), worst_low), c.tol("bony")));

  const RealField u = random_band_field(g, c.data.seed + 1, {lo, hi, c.data.slope});
  const RealField v = random_band_field(g, c.data.seed + 2, {lo, hi, c.data.slope});
  const BonyParts bp = bony_decompose(u, v, part);
  out.checks.push_back(check_le("bony_reconstruction", detail::rel_l2(bp.t_uv + bp.t_vu + bp.r_uv, dealiased_product(u, v)),
                                c.tol("bony")));

  // P/Q algebra on white-noise-like data, Nyquist planes included
  const RealField w = remove_mean(random_band_field(g, c.data.seed + 3, {0.0, 0.99 * g.nyquist(), 0.0}, g.dim));
  const SpectralCoeffs W = forward_transform(w);
  const SpectralCoeffs P = leray_P(W), Q = curlfree_Q(W);
  const double n0 = detail::spectral_norm(W);
  const double pq = std::max({detail::spectral_norm(leray_P(P) - P), detail::spectral_norm(curlfree_Q(Q) - Q),
                              detail::spectral_norm(curlfree_Q(P)), detail::spectral_norm(P + Q - W),
                              detail::spectral_norm(divergence(P))}) /
                    n0;
  out.checks.push_back(check_le("projection_algebra", pq, c.tol("projections")));
  out.checkpoints.push_back({0.0, "test field", FluidState{f, w, {}, 0.0}});
  return out;
}

// --- operator-verify ------------------------------------------------------------

struct LawConstants {
  double gradient = 0, paraproduct = 0, remainder = 0, product = 0, composition = 0;
};

/// Empirical constants of the gradient, paraproduct, remainder, product and composition
/// laws for data living in the dyadic band j, maximised over samples. Paraproducts use
/// T_u v = sum S_{j-2} u Delta_j v here, so that coarse grids still separate two blocks.
inline LawConstants law_constants(const GridSpec& g, const DyadicPartition& part, int j, double p, int samples,
                                  std::uint64_t seed) {
  const double s = g.dim / p;
  const BesovParams crit{s, p, 1.0}, below{s - 1.0, p, 1.0};
  const double blo = 0.75 * std::ldexp(1.0, j), bhi = 1.5 * std::ldexp(1.0, j), fund = g.fundamental();
  auto bnorm = [&](const RealField& f, const BesovParams& bp) { return besov_norm(f, bp, part).total; };
  LawConstants k;
  for (int n = 0; n < samples; ++n) {
    const std::uint64_t sd = seed + 1000 * static_cast<std::uint64_t>(j + 64) + 10 * n;
    const RealField f = random_band_field(g, sd, {blo, bhi, 0.0});
    const RealField low = random_band_field(g, sd + 1, {fund, 0.5 * blo, 0.0});
    const RealField f2 = random_band_field(g, sd + 2, {blo, bhi, 0.0});
    const RealField wide = random_band_field(g, sd + 3, {fund, bhi, 0.0});
    const double nf = bnorm(f, crit);
    k.gradient = std::max(k.gradient, bnorm(gradient(f), below) / nf);
    k.paraproduct = std::max(k.paraproduct, bnorm(bony_T(low, f, part, 2), crit) / (lp_norm(low, kInfinity) * nf));
    // R: B^0_{inf,inf} x B^s_{p,1} -> B^s_{p,1}
    k.remainder = std::max(k.remainder, bnorm(bony_R(f, f2, part, 2), crit) / (bnorm(f, {0.0, kInfinity, kInfinity}) * bnorm(f2, crit)));
    const double pw = bnorm(dealiased_product(f, wide), crit),
                 rhs = lp_norm(f, kInfinity) * bnorm(wide, crit) + lp_norm(wide, kInfinity) * nf;
    k.product = std::max(k.product, pw / rhs);
    const RealField a = scaled_to_sup(f, 0.5);
    k.composition = std::max(k.composition, bnorm(compose_F(a, fraction_composition()), crit) / bnorm(a, crit));
  }
  return k;
}

inline ScenarioOutput run_operator_verify(const ExperimentConfig& c) {
  ScenarioOutput out;
  out.table = Table({"points", "j", "gradient", "paraproduct", "remainder", "product", "composition"});
  const std::vector<std::string> laws{"gradient", "paraproduct", "remainder", "product", "composition"};
  const std::vector<int> sizes{c.grid.points / 2, c.grid.points, 2 * c.grid.points};
  std::map<std::string, std::vector<double>> sup_per_grid, spread_per_grid;
  const int samples = static_cast<int>(c.opt("samples"));
  for (int n : sizes) {
    const GridSpec g = make_grid(c.grid.dim, n, c.grid.half_length_pi * pi);
    const DyadicPartition part = DyadicPartition::clamped(g, c.j0);
    std::map<std::string, std::vector<double>> per_j;
    // products of two shell fields reach 3*2^j; keep them below Nyquist
    const int j1 = part.j_min() + 2,
              j2 = std::min(part.j_max(), static_cast<int>(std::floor(std::log2(g.nyquist() / 3.0))));
    require(j2 >= j1, "grid too coarse for the operator constants");
    std::vector<LawConstants> ks(j2 - j1 + 1);
    parallel_for(ks.size(), [&](std::size_t i) { ks[i] = law_constants(g, part, j1 + static_cast<int>(i), c.p, samples, c.data.seed); });
    for (std::size_t i = 0; i < ks.size(); ++i) {
      const auto& k = ks[i];
      const std::vector<double> v{k.gradient, k.paraproduct, k.remainder, k.product, k.composition};
      for (std::size_t l = 0; l < laws.size(); ++l) per_j[laws[l]].push_back(v[l]);
      out.table.add({static_cast<double>(n), static_cast<double>(j1 + static_cast<int>(i)), k.gradient, k.paraproduct,
                     k.remainder, k.product, k.composition});
    }
    for (const auto& l : laws) {
      sup_per_grid[l].push_back(detail::max_of(per_j[l]));
      spread_per_grid[l].push_back(detail::spread(per_j[l]));
    }
  }
  for (const auto& l : laws) {
    out.checks.push_back(check_le(l + "_across_j", detail::max_of(spread_per_grid[l]), c.tol("across_j"),
                                  "max over grids of (max_j C_j / min_j C_j)"));
    out.checks.push_back(check_le(l + "_across_grids", detail::spread(sup_per_grid[l]), c.tol("across_grids"),
                                  "spread of sup_j C_j over the three grids"));
  }
  return out;
}

// --- linear-estimates -----------------------------------------------------------

inline ScenarioOutput run_linear_estimates(const ExperimentConfig& c) {
  ScenarioOutput out;
  // exactness of the per-mode coupled solution
  double worst = 0.0;
  const double alpha = 1.0, nu = 1.0, ks = 2.0;
  for (double k : {0.1, 1.0, ks * (1 - 1e-9), ks, ks * (1 + 1e-9), 3.0, 20.0})
    for (double t : {0.05, 1.0, 3.0}) {
      const Mat2 E = coupled_exponential(alpha, nu, k, k, t);
      auto [a1, v1] = detail::rk4_reference(alpha, nu, k, 1.0, 0.0, t);
      auto [a2, v2] = detail::rk4_reference(alpha, nu, k, 0.0, 1.0, t);
      worst = std::max({worst, std::abs(E.e00 - a1), std::abs(E.e10 - v1), std::abs(E.e01 - a2), std::abs(E.e11 - v2)});
    }
  out.checks.push_back(check_le("coupled_vs_rk4", worst, c.tol("rk4")));
  int wrong = 0;
  for (double f : {0.5, 0.9, 0.999})
    if (coupled_eigenvalues(alpha, nu, f * ks).first.imag() == 0.0) ++wrong;
  for (double f : {1.001, 1.1, 3.0})
    if (coupled_eigenvalues(alpha, nu, f * ks).first.imag() != 0.0) ++wrong;
  out.checks.push_back(check_le("regime_boundary_misclassified", wrong, 0.5, "eigenvalues complex below |xi| = 2, real above"));

  {
    const GridSpec g = c.grid.spec();
    const RealField f = random_band_field(g, c.data.seed, {g.fundamental(), 0.5 * g.nyquist(), 0.0});
    const RealField u = remove_mean(random_band_field(g, c.data.seed + 1, {g.fundamental(), 0.5 * g.nyquist(), 0.0}, g.dim));
    const double mu = c.mu, lam = c.lambda;
    double e = detail::rel_l2(heat_semigroup(heat_semigroup(f, 0.1, 0.7), 0.4, 0.7), heat_semigroup(f, 0.5, 0.7));
    e = std::max(e, detail::rel_l2(lame_semigroup(lame_semigroup(u, 0.2, mu, lam), 0.35, mu, lam), lame_semigroup(u, 0.55, mu, lam)));
    // group law of the 2x2 exponential too
    for (double k : {0.3, 2.0, 7.0}) {
      const Mat2 A = coupled_exponential(alpha, nu, k, k, 0.4), B = coupled_exponential(alpha, nu, k, k, 0.9),
                 C = coupled_exponential(alpha, nu, k, k, 1.3);
      const double s = std::max({std::abs(C.e00), std::abs(C.e01), std::abs(C.e10), std::abs(C.e11)});
      e = std::max({e, std::abs(A.e00 * B.e00 + A.e01 * B.e10 - C.e00) / s, std::abs(A.e00 * B.e01 + A.e01 * B.e11 - C.e01) / s,
                    std::abs(A.e10 * B.e00 + A.e11 * B.e10 - C.e10) / s, std::abs(A.e10 * B.e01 + A.e11 * B.e11 - C.e11) / s});
    }
    out.checks.push_back(check_le("semigroup_property", e, c.tol("semigroup")));
  }

  // estimate ratios over randomized problems at three resolutions
  const int problems = static_cast<int>(c.opt("problems"));
  const std::vector<int> sizes{c.grid.points / 2, c.grid.points, 2 * c.grid.points};
  struct Draw {
    double damping, vamp, fomega, mu, lambda, alpha, nu;
    std::uint64_t seed;
  };
  std::vector<Draw> draws;
  std::mt19937_64 rng(c.data.seed);
  std::uniform_real_distribution<double> U01(0.0, 1.0);
  for (int i = 0; i < problems; ++i)
    draws.push_back({U01(rng), 0.5 + 1.5 * U01(rng), 1.0 + 4.0 * U01(rng), 0.5 + 1.5 * U01(rng), -0.4 + 1.4 * U01(rng),
                     0.5 + 1.5 * U01(rng), 0.5 + 1.5 * U01(rng), rng()});
  out.table = Table({"problem", "points", "transport_ratio", "lame_ratio", "coupled_ratio"});
  std::vector<std::array<double, 3>> ratio(problems * sizes.size());
  for (std::size_t r = 0; r < sizes.size(); ++r) {
    const GridSpec g = make_grid(c.grid.dim, sizes[r], c.grid.half_length_pi * pi);
    const DyadicPartition part = DyadicPartition::clamped(g, c.j0);
    const double xlo = g.fundamental(), xhi = c.data.xi_hi;
    parallel_for(problems, [&](std::size_t i) {
      const Draw& d = draws[i];
      auto band = [&](std::uint64_t k, int comps) { return random_band_field(g, d.seed + k, {xlo, xhi, 0.0}, comps); };
      const RealField v = scaled_to_sup(band(1, g.dim), d.vamp), f = band(2, 1);
      TransportProblem tp{band(3, 1), [&](double) { return v; }};
      tp.forcing = [&, w = d.fomega](double t) { return std::cos(w * t) * f; };
      tp.damping = d.damping;
      tp.horizon = c.horizon;
      tp.dt = c.dt;
      const double tr = check_transport_estimate(tp, solve_transport(tp), 0.5, c.p, part, 1.0).ratio;
      const RealField gl = band(4, g.dim);
      LameProblem lp_{band(5, g.dim), [&, w = d.fomega](double t) { return std::sin(w * t) * gl; }, d.mu, d.lambda, c.horizon,
                      c.dt};
      const double lr = check_lame_estimate(lp_, solve_lame_forced(lp_), 0.0, c.p, part).ratio;
      std::vector<double> times;
      const int nt = static_cast<int>(std::ceil(c.horizon / c.dt - 1e-9));
      for (int n = 0; n <= nt; ++n) times.push_back(c.horizon * n / nt);
      CoupledLinearProblem clp{band(6, 1), band(7, 1), d.alpha, d.nu, times};
      const double cr = check_coupled_estimate(clp, solve_coupled_linear(clp), 0.0, part).ratio;
      ratio[r * problems + i] = {tr, lr, cr};
    });
  }
  const std::vector<std::string> names{"transport", "lame", "coupled"};
  for (std::size_t e = 0; e < names.size(); ++e) {
    std::vector<double> maxima;
    bool finite = true;
    for (std::size_t r = 0; r < sizes.size(); ++r) {
      double m = 0.0;
      for (int i = 0; i < problems; ++i) {
        const double x = ratio[r * problems + i][e];
        finite = finite && std::isfinite(x) && x > 0.0;
        m = std::max(m, x);
      }
      maxima.push_back(m);
    }
    out.checks.push_back(check_ge(names[e] + "_ratios_finite", finite ? 1.0 : 0.0, 1.0));
    out.checks.push_back(check_le(names[e] + "_max_ratio_across_resolutions", detail::spread(maxima),
                                  c.tol("across_resolutions"), "max/min over resolutions of the max LHS/RHS ratio"));
  }
  for (int i = 0; i < problems; ++i)
    for (std::size_t r = 0; r < sizes.size(); ++r) {
      const auto& x = ratio[r * problems + i];
      out.table.add({static_cast<double>(i), static_cast<double>(sizes[r]), x[0], x[1], x[2]});
    }
  return out;
}

// --- linear-decay ---------------------------------------------------------------

inline double low_critical_norm(const SpectralCoeffs& A, const SpectralCoeffs& U, double p, const DyadicPartition& part) {
  const BesovParams bp{A.grid().dim / p, p, 1.0};
  return besov_norm(A, bp, part).low + besov_norm(U, bp, part).low;
}

inline ScenarioOutput run_linear_decay(const ExperimentConfig& c) {
  const GridSpec g = c.grid.spec();
  const DyadicPartition part = DyadicPartition::clamped(g, c.j0);
  const CNSParams prm = c.params();
  const FluidState s0 = initial_state(g, c.data, c.data.amplitude);
  const SpectralCoeffs A0 = forward_transform(s0.a), U0 = forward_transform(s0.u);
  ScenarioOutput out;
  out.table = Table({"t", "linear", "nonlinear"});
  const double every = c.dt * c.sample_every;
  const int n = static_cast<int>(std::floor(c.horizon / every + 1e-9));
  std::vector<double> times, lin(n + 1), non(n + 1, std::nan(""));
  for (int i = 0; i <= n; ++i) times.push_back(i * every);
  parallel_for(times.size(), [&](std::size_t i) {
    LinearPropagator P(g, prm.alpha(), prm.mu, prm.lambda, times[i]);
    SpectralCoeffs A = A0, U = U0;
    P.apply(A, U);
    lin[i] = low_critical_norm(A, U, c.p, part);
  });
  const bool nonlinear = c.opt("nonlinear") != 0.0;
  FluidState last = s0;
  if (nonlinear) {
    std::size_t i = 0;
    last = evolve(s0, prm, {c.horizon, c.dt, c.sample_every}, [&](const FluidState& s) {
      if (i < non.size()) non[i] = low_critical_norm(forward_transform(s.a), forward_transform(s.u), c.p, part);
      ++i;
    });
  }
  for (std::size_t i = 0; i < times.size(); ++i) out.table.add({times[i], lin[i], non[i]});
  const double t1 = c.opt("fit_from"), t2 = c.opt("fit_to"), target = c.tol("exponent");
  const DecayFit fl = measure_decay(times, lin, t1, t2);
  out.checks.push_back(check_in("linear_exponent", fl.slope, target - c.tol("linear_band"), target + c.tol("linear_band")));
  out.checks.push_back(check_ge("linear_r2", fl.r2, c.tol("r2")));
  json fits{{"linear", {{"exponent", fl.slope}, {"r2", fl.r2}, {"ci", {fl.ci_low, fl.ci_high}}}}};
  if (nonlinear) {
    const DecayFit fn = measure_decay(times, non, t1, t2);
    out.checks.push_back(
        check_in("nonlinear_exponent", fn.slope, target - c.tol("nonlinear_band"), target + c.tol("nonlinear_band")));
    fits["nonlinear"] = {{"exponent", fn.slope}, {"r2", fn.r2}, {"ci", {fn.ci_low, fn.ci_high}}};
  }
  out.extra["fits"] = fits;
  out.checkpoints.push_back({0.0, "data", s0});
  if (nonlinear) out.checkpoints.push_back({last.t, "nonlinear end", last});
  return out;
}

// --- local-existence ------------------------------------------------------------

inline ScenarioOutput run_local_existence(const ExperimentConfig& c) {
  const GridSpec g = c.grid.spec();
  const CNSParams prm = c.params();
  const FluidState s0 = initial_state(g, c.data, c.data.amplitude);
  PicardOptions o;
  o.horizon = c.horizon;
  o.dt = c.dt;
  o.p = c.p;
  o.n_max = static_cast<int>(c.opt("max_iterations"));
  o.tol = c.tol("terminal");
  const PicardResult r = picard_iterate({s0.a, s0.u}, prm, o);
  ScenarioOutput out;
  out.table = Table({"n", "delta_a", "delta_u", "total", "ratio"});
  double worst = 0.0;
  for (std::size_t n = 0; n < r.trace.size(); ++n) {
    const auto q = r.trace.ratio(n);
    if (q && n >= 2) worst = std::max(worst, *q);
    out.table.add({static_cast<double>(n), r.trace.delta_a[n], r.trace.delta_u[n], r.trace.total[n], q ? *q : std::nan("")});
  }
  out.checks.push_back(check_ge("converged", r.status == PicardStatus::converged ? 1.0 : 0.0, 1.0, to_string(r.status)));
  out.checks.push_back(check_le("contraction_ratio_from_n2", worst, c.tol("contraction")));
  out.checks.push_back(check_le("terminal_difference", r.trace.size() ? r.trace.total.back() : 0.0, c.tol("terminal")));
  const LimitComparison lc = compare_with_direct(r.limit(), {s0.a, s0.u}, prm, o);
  out.checks.push_back(check_le("limit_vs_direct_a", lc.a, c.tol("limit")));
  out.checks.push_back(check_le("limit_vs_direct_u", lc.u, c.tol("limit")));
  out.extra["status"] = to_string(r.status);
  out.extra["iterations"] = r.iterations;
  out.checkpoints.push_back({0.0, "data", s0});
  out.checkpoints.push_back({c.horizon, "picard limit", FluidState{r.limit().a.back(), r.limit().u.back(), {}, c.horizon}});
  return out;
}

// --- global-bounds --------------------------------------------------------------

inline ScenarioOutput run_global_bounds(const ExperimentConfig& c) {
  const GridSpec g = c.grid.spec();
  const CNSParams prm = c.params();
  const std::vector<double> amps{c.data.amplitude, 0.5 * c.data.amplitude};
  DiagnosticsOptions dopt;
  dopt.p = c.p;
  dopt.j0 = c.j0;
  dopt.epsilon = c.epsilon;
  std::vector<DiagnosticsRecord> recs(amps.size());
  std::vector<FluidState> ends(amps.size());
  parallel_for(amps.size(), [&](std::size_t i) {
    DiagnosticsAccumulator acc(g, dopt);
    ends[i] = evolve(initial_state(g, c.data, amps[i]), prm, {c.horizon, c.dt, c.sample_every},
                     [&](const FluidState& s) { acc.push(s); });
    recs[i] = acc.record();
  });
  ScenarioOutput out;
  out.table = Table({"t", "S_ratio", "S_ratio_half", "S_runmax", "S_runmax_half", "Y", "X", "D"});
  const double S0 = recs[0].initial.at("S0"), S0h = recs[1].initial.at("S0");
  const auto S = recs[0].total("S"), Sh = recs[1].total("S"), Y = recs[0].total("Y"), X = recs[0].total("X"),
             D = recs[0].total("D");
  const std::size_t n = S.size();
  std::vector<double> r(n), rh(n), m(n), mh(n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = S0 > 0.0 ? S[i] / S0 : 0.0;
    rh[i] = S0h > 0.0 ? Sh[i] / S0h : 0.0;
    m[i] = std::max(r[i], i ? m[i - 1] : 0.0);
    mh[i] = std::max(rh[i], i ? mh[i - 1] : 0.0);
    out.table.add({recs[0].times[i], r[i], rh[i], m[i], mh[i], Y[i], X[i], D[i]});
  }
  if (S0 == 0.0) {
    double worst = 0.0;
    for (const auto& rec : recs)
      for (const auto& row : rec.rows)
        for (double v : row) worst = std::max(worst, std::abs(v));
    out.checks.push_back(check_le("zero_data_diagnostics", worst, 0.0));
  } else {
    const std::size_t i3 = static_cast<std::size_t>(std::llround((n - 1) * 2.0 / 3.0));
    const double growth = std::max(m[n - 1] / m[i3], mh[n - 1] / mh[i3]) - 1.0;
    out.checks.push_back(check_le("runmax_growth_final_third", growth, c.tol("growth")));
    double agree = 0.0;
    for (std::size_t i = 0; i < n; ++i) agree = std::max(agree, std::abs(r[i] / rh[i] - 1.0));
    out.checks.push_back(check_le("amplitude_ratio_agreement", agree, c.tol("amplitude_agreement")));
  }
  out.extra["S0"] = {S0, S0h};
  out.extra["final_ratio"] = {r.back(), rh.back()};
  out.checkpoints.push_back({ends[0].t, "end, amplitude c", ends[0]});
  out.checkpoints.push_back({ends[1].t, "end, amplitude c/2", ends[1]});
  return out;
}

// --- weighted-bounds ------------------------------------------------------------

inline ScenarioOutput run_weighted_bounds(const ExperimentConfig& c) {
  const GridSpec g = c.grid.spec();
  const CNSParams prm = c.params();
  const double alpha = prm.alpha(), nu = prm.nu();
  std::vector<int> axes;
  for (int k = 0; k < g.dim; ++k) axes.push_back(k);
  const FluidState s0 = with_weights(initial_state(g, c.data, c.data.amplitude), axes);
  const bool residuals = c.opt("residuals") != 0.0;
  auto [steps, dt] = step_plan(c.horizon, c.dt);

  ScenarioOutput out;
  out.table = Table({"t", "drift_A", "drift_U", "w_residual", "W_residual"});
  double worst_a = 0.0, worst_u = 0.0, worst_w = 0.0, worst_W = 0.0;
  auto drift = [&](const FluidState& s) {
    double ea = 0.0, eu = 0.0;
    for (const auto& w : s.weighted) {
      auto [a, u] = weighted_consistency(s, w);
      ea = std::max(ea, a);
      eu = std::max(eu, u);
    }
    worst_a = std::max(worst_a, ea);
    worst_u = std::max(worst_u, eu);
    return std::pair{ea, eu};
  };
  auto resid = [&](const FluidState& m0, const FluidState& s, const FluidState& p1) {
    const RealField f = source_f(s.a, s.u, prm), gg = source_g(s.a, s.u, prm);
    const double rw = heat_residual(effective_velocity(m0.a, m0.u, alpha, nu), effective_velocity(s.a, s.u, alpha, nu),
                                    effective_velocity(p1.a, p1.u, alpha, nu), dt,
                                    effective_velocity_forcing(s.u, f, gg, alpha, nu), nu);
    double rW = 0.0;
    for (std::size_t k = 0; k < s.weighted.size(); ++k) {
      const auto& w = s.weighted[k];
      const auto ws = source_weighted(s.a, s.u, w.A, w.U, w.axis, prm);
      auto W = [&](const FluidState& x) { return weighted_effective_velocity(x.weighted[k].A, x.weighted[k].U, alpha, nu).W; };
      rW = std::max(rW, heat_residual(W(m0), W(s), W(p1), dt, effective_velocity_forcing(w.U, ws.f, ws.g, alpha, nu), nu));
    }
    worst_w = std::max(worst_w, rw);
    worst_W = std::max(worst_W, rW);
    return std::pair{rw, rW};
  };

  // rolling window: the residual at step n needs n - 1 and n + 1
  std::optional<FluidState> prev, cur;
  int idx = -1;
  const double nan = std::nan("");
  FluidState last = evolve(s0, prm, {c.horizon, c.dt, 1}, [&](const FluidState& s) {
    ++idx;
    if (idx == 0) {
      auto [ea, eu] = drift(s);
      out.table.add({s.t, ea, eu, nan, nan});
    } else if ((idx - 1) % c.sample_every == 0 && idx - 1 > 0 && cur) {
      auto [ea, eu] = drift(*cur);
      auto [rw, rW] = residuals && prev ? resid(*prev, *cur, s) : std::pair{nan, nan};
      out.table.add({cur->t, ea, eu, rw, rW});
    }
    prev = std::move(cur);
    cur = s;
  });
  if (steps > 0) {
    auto [ea, eu] = drift(last);
    out.table.add({last.t, ea, eu, nan, nan});
  }
  out.checks.push_back(check_le("weighted_density_drift", worst_a, c.tol("consistency")));
  out.checks.push_back(check_le("weighted_velocity_drift", worst_u, c.tol("consistency")));
  if (residuals) {
    out.checks.push_back(check_le("effective_velocity_heat_residual", worst_w, c.tol("heat_residual")));
    out.checks.push_back(check_le("weighted_effective_velocity_heat_residual", worst_W, c.tol("heat_residual")));
  }
  out.checkpoints.push_back({0.0, "data", s0});
  out.checkpoints.push_back({last.t, "end", last});
  return out;
}

// --- dispatch -------------------------------------------------------------------

inline ScenarioOutput run_scenario(const ExperimentConfig& c) {
  const std::string& s = c.scenario;
  if (s == "lp-verify") return run_lp_verify(c);
  if (s == "operator-verify") return run_operator_verify(c);
  if (s == "linear-estimates") return run_linear_estimates(c);
  if (s == "linear-decay") return run_linear_decay(c);
  if (s == "local-existence") return run_local_existence(c);
  if (s == "global-bounds") return run_global_bounds(c);
  if (s == "weighted-bounds") return run_weighted_bounds(c);
  throw ConfigError("unknown scenario '" + s + "'");
}

struct RunOutcome {
  int exit_code = 0;  // 0 pass, 1 failed check, 2 bad config
  ScenarioOutput output;
  double runtime = 0.0;
  std::string error;
};

/// Runs a scenario and writes its artifacts to dir. Setup errors (bad config,
/// arguments the library rejects) give 2 and no artifacts; numerical failures
/// during the run are recorded as a failing check.
inline RunOutcome run(const ExperimentConfig& c, const std::filesystem::path& dir) {
  RunOutcome r;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    validate(c);
    r.output = run_scenario(c);
  } catch (const ConfigError& e) {
    r.exit_code = 2;
    r.error = e.what();
    return r;
  } catch (const InvalidArgument& e) {
    r.exit_code = 2;
    r.error = e.what();
    return r;
  } catch (const std::exception& e) {
    r.error = e.what();
    r.output.checks.push_back({"completed", 0.0, 1.0, ">=", 0.0, false, e.what()});
  }
  r.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.output.checks.push_back(check_le("runtime_seconds", r.runtime, c.tol("runtime")));
  write_outputs(dir, c, r.output, r.runtime);
  r.exit_code = r.output.passed() ? 0 : 1;
  return r;
}

}  // namespace bcns
