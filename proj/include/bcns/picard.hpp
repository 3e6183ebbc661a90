#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "bcns/cns.hpp"

namespace bcns {

//
// Successive approximations for (a, u):
//   d_t a^{n+1} + u^n . grad a^{n+1} = -(1 + a^n) div u^n,         a^{n+1}(0) = S_{n+1} a0
//   d_t u^{n+1} - A u^{n+1} = -u^n.grad u^n - F(a^n) A u^n - P'(1+a^n)/(1+a^n) grad a^n,
//                                                                 u^{n+1}(0) = S_{n+1} u0
// seeded with a^0 = S_0 a0 (constant in time), u^0 = e^{tA} S_0 u0.
// Each iterate is a pair of linear problems solved with the transport and
// forced Lame solvers; sources are tabulated on the sample grid and
// interpolated (cubic) at intermediate stages.
//

struct PicardOptions {
  double horizon = 0.2;
  double dt = 2e-3;
  int n_max = 30;
  double tol = 1e-6;  // on the difference norm, absolute
  double p = 2.0;
  double max_cfl = 0.5;
  int patience = 3;  // consecutive ratios >= 1 before giving up
  bool keep_sequence = false;
  std::vector<int> axes;  // weighted iteration only
};

struct IterationTrace {
  // entry n describes delta^n = (iterate n+1) - (iterate n)
  std::vector<double> delta_a;  // ||da||_{L^inf B^{d/p}_{p,1}}
  std::vector<double> delta_u;  // ||du||_{E_p}
  std::vector<double> total;    // delta_a + 4 delta_u (+ weighted parts)
  std::vector<std::vector<double>> delta_A, delta_U;  // per axis: L^inf B^{d/p+1}, E_p^{d/p}

  std::size_t size() const { return total.size(); }
  /// total[n] / total[n-1], n >= 1; 0 when both vanish.
  std::optional<double> ratio(std::size_t n) const {
    if (n == 0 || n >= total.size()) return std::nullopt;
    if (total[n - 1] == 0.0) return total[n] == 0.0 ? 0.0 : kInfinity;
    return total[n] / total[n - 1];
  }
};

enum class PicardStatus { converged, max_iterations, diverged };

inline const char* to_string(PicardStatus s) {
  switch (s) {
    case PicardStatus::converged: return "converged";
    case PicardStatus::max_iterations: return "max_iterations";
    case PicardStatus::diverged: return "diverged";
  }
  return "?";
}

struct WeightedSeries {
  int axis = 0;
  TimeSeries<RealField> A, U;
};

struct PicardIterate {
  TimeSeries<RealField> a, u;
  std::vector<WeightedSeries> weighted;
};

struct PicardResult {
  PicardStatus status = PicardStatus::max_iterations;
  IterationTrace trace;
  std::vector<PicardIterate> sequence;  // every iterate with keep_sequence, else only the last
  int iterations = 0;                   // index of the last iterate
  const PicardIterate& limit() const { return sequence.back(); }
};

/// S_n f = chi(2^{-n}|D|) f, the telescoped sum of all blocks j <= n (including
/// frequencies below the resolved band); n past the band is the identity.
inline RealField truncate_data(const RealField& f, int n, const DyadicPartition& part) {
  require_same_grid(f.grid(), part.grid());
  if (n > part.j_max()) return f;
  SpectralCoeffs F = forward_transform(f);
  for_each_mode(f.grid(), [&](const Mode& md) {
    if (md.is_zero()) return;
    const double w = lp::chi(std::ldexp(md.norm, -n));
    for (int c = 0; c < F.components(); ++c) F.component(c)[md.index] *= w;
  });
  return inverse_transform_unchecked(F);
}

namespace detail {

inline std::pair<int, double> picard_steps(const PicardOptions& o) {
  if (!(o.horizon > 0.0) || !(o.dt > 0.0)) throw InvalidArgument("Picard horizon and dt must be positive");
  if (o.n_max < 1) throw InvalidArgument("n_max must be at least 1");
  if (!(o.p >= 1.0)) throw InvalidArgument("Lebesgue exponent must be >= 1");
  return step_plan(o.horizon, o.dt);
}

template <class F>
TimeSeries<RealField> tabulate(const TimeSeries<RealField>& like, F&& f) {
  TimeSeries<RealField> out(like.t0(), like.dt());
  for (std::size_t i = 0; i < like.size(); ++i) out.push(f(i));
  return out;
}

inline FieldFn interpolant(const TimeSeries<RealField>& s) {
  return [&s](double t) { return s.at(std::min(t, s.t_end())); };
}

// sup in time of the instantaneous norm, and Chemin-Lerner / L^1 pieces
struct SeriesNorms {
  BlockHistory h;
  explicit SeriesNorms(int jmin) : h(jmin) {}
  double linf(double s, const DyadicPartition& part) const {
    double m = 0.0;
    for (std::size_t n = 0; n < h.size(); ++n) m = std::max(m, h.instant(n, s, 1.0, part.j_min(), part.j_max()));
    return m;
  }
  double tilde_linf(double s, const DyadicPartition& part) const {
    return h.tilde_linf(s, 1.0, part.j_min(), part.j_max(), h.size() - 1);
  }
  double l1(double s, const DyadicPartition& part) const {
    return h.l1(s, 1.0, part.j_min(), part.j_max(), h.size() - 1);
  }
};

inline SeriesNorms difference_history(const TimeSeries<RealField>& x, const TimeSeries<RealField>& y, double p,
                                      const DyadicPartition& part) {
  require(x.size() == y.size(), "iterates sampled differently");
  SeriesNorms out(part.j_min());
  for (std::size_t i = 0; i < x.size(); ++i) out.h.push(x.time(i), block_norms(x[i] - y[i], p, part));
  return out;
}

// -(1 + a) div u with the product dealiased
inline RealField mass_source(const Kinematics& k) {
  RealField prod = k.a;
  auto o = prod.component(0);
  auto dv = k.div_u.component(0);
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= dv[i];
  SpectralCoeffs F = dealias(forward_transform(prod));
  F += forward_transform(k.div_u);
  F *= -1.0;
  return inverse_transform_unchecked(F);
}

// g - alpha grad a: the full right-hand side of the u-equation minus A u
inline RealField momentum_source(const Kinematics& k, const SpectralCoeffs& ah, const CNSParams& p) {
  SpectralCoeffs G = source_g_spectral(k);
  G.axpy(-p.alpha(), gradient(ah));
  return inverse_transform_unchecked(G);
}

}  // namespace detail

struct PicardData {
  RealField a0, u0;
};

/// Seed iterate: a^0 = S_0 a0, u^0 = e^{tA} S_0 u0 (plus x_k-weights when axes are given).
inline PicardIterate picard_seed(const PicardData& data, const CNSParams& p, const PicardOptions& o,
                                 const DyadicPartition& part) {
  auto [steps, dt] = detail::picard_steps(o);
  const RealField a = truncate_data(data.a0, 0, part);
  const SpectralCoeffs U0 = forward_transform(truncate_data(data.u0, 0, part));
  PicardIterate it{TimeSeries<RealField>(0.0, dt), TimeSeries<RealField>(0.0, dt), {}};
  for (int i = 0; i <= steps; ++i) {
    it.a.push(a);
    it.u.push(inverse_transform_unchecked(lame_semigroup(U0, i * dt, p.mu, p.lambda)));
  }
  for (int k : o.axes) {
    WeightedSeries w{k, detail::tabulate(it.a, [&](std::size_t i) { return coordinate_weight(it.a[i], k, kInfinity).field; }),
                     detail::tabulate(it.u, [&](std::size_t i) { return coordinate_weight(it.u[i], k, kInfinity).field; })};
    it.weighted.push_back(std::move(w));
  }
  return it;
}

/// One Picard step: iterate n -> n+1 with initial data S_{n+1}(a0, u0).
inline PicardIterate picard_step(const PicardIterate& cur, int n, const PicardData& data, const CNSParams& p,
                                 const PicardOptions& o, const DyadicPartition& part) {
  auto [steps, dt] = detail::picard_steps(o);
  const GridSpec& g = data.a0.grid();
  const int d = g.dim;
  std::vector<Kinematics> kin;
  kin.reserve(cur.a.size());
  std::vector<SpectralCoeffs> ah;
  for (std::size_t i = 0; i < cur.a.size(); ++i) {
    ah.push_back(forward_transform(cur.a[i]));
    kin.push_back(kinematics(ah.back(), forward_transform(cur.u[i]), p));
  }
  PicardIterate next;
  {
    auto fa = detail::tabulate(cur.a, [&](std::size_t i) { return detail::mass_source(kin[i]); });
    TransportProblem tp{truncate_data(data.a0, n + 1, part), detail::interpolant(cur.u), 0.0,
                        detail::interpolant(fa), o.horizon, dt, 1, o.max_cfl};
    next.a = solve_transport(tp);
  }
  {
    auto gu = detail::tabulate(cur.u, [&](std::size_t i) { return detail::momentum_source(kin[i], ah[i], p); });
    LameProblem lp{truncate_data(data.u0, n + 1, part), detail::interpolant(gu), p.mu, p.lambda, o.horizon, dt, 1};
    next.u = solve_lame_forced(lp);
  }
  for (const WeightedSeries& w : cur.weighted) {
    const int k = w.axis;
    // B_{n+1} from the fresh velocity
    std::vector<RealField> Bnext;
    for (std::size_t i = 0; i < next.u.size(); ++i) {
      Kinematics kn;
      const SpectralCoeffs Uh = forward_transform(next.u[i]);
      kn.a = RealField(g);
      kn.u = next.u[i];
      kn.grad_u = detail::component_gradients(Uh);
      kn.div_u = inverse_transform_unchecked(divergence(Uh));
      Bnext.push_back(weight_commutator(kn, k, p));
    }
    // d_t A + u^n.grad A = -div U^n + u^n_k - A^n div u^n + u^n_k a^{n+1}
    auto fA = detail::tabulate(cur.a, [&](std::size_t i) {
      const Kinematics& kk = kin[i];
      RealField prod(g);
      auto o_ = prod.component(0);
      auto An = w.A[i].component(0);
      auto dv = kk.div_u.component(0);
      auto uk = kk.u.component(k);
      auto an = next.a[i].component(0);
      for (std::size_t q = 0; q < o_.size(); ++q) o_[q] = -An[q] * dv[q] + uk[q] * an[q];
      SpectralCoeffs F = dealias(forward_transform(prod));
      F.axpy(-1.0, divergence(forward_transform(w.U[i])));
      F += forward_transform(kk.u.component_field(k));
      return inverse_transform_unchecked(F);
    });
    RealField A0 = coordinate_weight(truncate_data(data.a0, n + 1, part), k, kInfinity).field;
    TransportProblem tp{A0, detail::interpolant(cur.u), 0.0, detail::interpolant(fA), o.horizon, dt, 1, o.max_cfl};
    WeightedSeries nw{k, solve_transport(tp), {}};
    // d_t U - A U = -(U^n.grad)u^n - F(a^n)(A U^n - B_n) - (alpha + beta(a^n))(grad A^n - a^n e_k) - B_{n+1}
    auto gU = detail::tabulate(cur.u, [&](std::size_t i) {
      const Kinematics& kk = kin[i];
      const SpectralCoeffs Ah = forward_transform(w.A[i]);
      const SpectralCoeffs Uh = forward_transform(w.U[i]);
      RealField gradA = inverse_transform_unchecked(gradient(Ah));
      RealField lameU = inverse_transform_unchecked(lame_operator(Uh, p.mu, p.lambda));
      RealField Bn = weight_commutator(kk, k, p);
      RealField prod(g, d);
      auto fr = kk.frac_a.component(0);
      auto be = kk.beta_a.component(0);
      auto av = kk.a.component(0);
      for (int c = 0; c < d; ++c) {
        auto o_ = prod.component(c);
        auto lu = lameU.component(c);
        auto bn = Bn.component(c);
        auto gA = gradA.component(c);
        for (std::size_t q = 0; q < o_.size(); ++q) o_[q] = -fr[q] * (lu[q] - bn[q]) - be[q] * gA[q];
        if (c == k)
          for (std::size_t q = 0; q < o_.size(); ++q) o_[q] += be[q] * av[q];
        for (int j = 0; j < d; ++j) {
          auto Uj = w.U[i].component(j);
          auto dj = kk.grad_u[c].component(j);
          for (std::size_t q = 0; q < o_.size(); ++q) o_[q] -= Uj[q] * dj[q];
        }
      }
      SpectralCoeffs G = dealias(forward_transform(prod));
      G.axpy(-p.alpha(), gradient(Ah));
      RealField lin = -1.0 * Bnext[i];
      auto lk = lin.component(k);
      for (std::size_t q = 0; q < lk.size(); ++q) lk[q] += p.alpha() * av[q];
      G += forward_transform(lin);
      return inverse_transform_unchecked(G);
    });
    RealField U0 = coordinate_weight(truncate_data(data.u0, n + 1, part), k, kInfinity).field;
    LameProblem lp{U0, detail::interpolant(gU), p.mu, p.lambda, o.horizon, dt, 1};
    nw.U = solve_lame_forced(lp);
    next.weighted.push_back(std::move(nw));
  }
  return next;
}

/// Appends the difference norms of (next - cur) to the trace; returns the total.
inline double record_difference(IterationTrace& tr, const PicardIterate& next, const PicardIterate& cur, double p,
                                const DyadicPartition& part) {
  const int d = part.grid().dim;
  const double s = d / p;
  auto ha = detail::difference_history(next.a, cur.a, p, part);
  auto hu = detail::difference_history(next.u, cur.u, p, part);
  const double da = ha.linf(s, part);
  const double du = hu.tilde_linf(s - 1.0, part) + hu.l1(s + 1.0, part);
  double total = da + 4.0 * du;
  std::vector<double> wA, wU;
  for (std::size_t m = 0; m < next.weighted.size(); ++m) {
    auto hA = detail::difference_history(next.weighted[m].A, cur.weighted[m].A, p, part);
    auto hU = detail::difference_history(next.weighted[m].U, cur.weighted[m].U, p, part);
    wA.push_back(hA.linf(s + 1.0, part));
    wU.push_back(hU.tilde_linf(s, part) + hU.l1(s + 2.0, part));
    total += wA.back() + 4.0 * wU.back();
  }
  tr.delta_a.push_back(da);
  tr.delta_u.push_back(du);
  tr.delta_A.push_back(std::move(wA));
  tr.delta_U.push_back(std::move(wU));
  tr.total.push_back(total);
  return total;
}

inline PicardResult picard_iterate_impl(const PicardData& data, const CNSParams& p, const PicardOptions& o) {
  p.validate();
  require_same_grid(data.a0.grid(), data.u0.grid());
  require(data.a0.components() == 1 && data.u0.components() == data.a0.grid().dim, "Picard data shape mismatch");
  for (int k : o.axes) require(k >= 0 && k < data.a0.grid().dim, "weight axis out of range");
  const DyadicPartition part = DyadicPartition::clamped(data.a0.grid(), 0);
  PicardResult res;
  PicardIterate cur = picard_seed(data, p, o, part);
  if (o.keep_sequence) res.sequence.push_back(cur);
  int bad = 0;
  res.status = PicardStatus::max_iterations;
  for (int n = 0; n < o.n_max; ++n) {
    PicardIterate next = picard_step(cur, n, data, p, o, part);
    const double tot = record_difference(res.trace, next, cur, o.p, part);
    cur = std::move(next);
    res.iterations = n + 1;
    if (o.keep_sequence) res.sequence.push_back(cur);
    auto r = res.trace.ratio(static_cast<std::size_t>(n));
    bad = (r && *r >= 1.0 && tot > o.tol) ? bad + 1 : 0;
    if (tot <= o.tol) {
      res.status = PicardStatus::converged;
      break;
    }
    if (bad >= o.patience) {
      res.status = PicardStatus::diverged;
      break;
    }
  }
  if (!o.keep_sequence) res.sequence.push_back(std::move(cur));
  return res;
}

inline PicardResult picard_iterate(const PicardData& data, const CNSParams& p, PicardOptions o) {
  o.axes.clear();
  return picard_iterate_impl(data, p, o);
}

inline PicardResult picard_iterate_weighted(const PicardData& data, const CNSParams& p, const PicardOptions& o) {
  if (o.axes.empty()) throw InvalidArgument("weighted iteration needs at least one axis");
  return picard_iterate_impl(data, p, o);
}

/// Relative L^2(0,T; L^2) distance between an iterate and the direct nonlinear solver.
struct LimitComparison {
  double a = 0.0, u = 0.0;
};

inline LimitComparison compare_with_direct(const PicardIterate& it, const PicardData& data, const CNSParams& p,
                                           const PicardOptions& o) {
  auto [steps, dt] = detail::picard_steps(o);
  FluidState init{data.a0, data.u0, {}, 0.0};
  double na = 0, nu = 0, ea = 0, eu = 0;
  std::size_t i = 0;
  evolve(init, p, {o.horizon, dt, 1, o.max_cfl}, [&](const FluidState& s) {
    require(i < it.a.size(), "iterate shorter than the direct run");
    auto acc = [](double& e, double& n, const RealField& x, const RealField& ref, double w) {
      const double dx = lp_norm(x - ref, 2), r = lp_norm(ref, 2);
      e += w * dx * dx;
      n += w * r * r;
    };
    const double w = (i == 0 || static_cast<int>(i) == steps) ? 0.5 : 1.0;
    acc(ea, na, it.a[i], s.a, w);
    acc(eu, nu, it.u[i], s.u, w);
    ++i;
  });
  auto ratio = [](double e, double n) { return n > 0.0 ? std::sqrt(e / n) : std::sqrt(e); };
  return {ratio(ea, na), ratio(eu, nu)};
}

/// Residuals of the seed equation for U^0 = x_k e^{tA} u0 at time t, relative to ||d_t U^0||_2:
/// derived right-hand side -B(u^0), and the printed variant with (div u e_k - grad u_k).
struct SeedResidual {
  double derived = 0.0;
  double printed = 0.0;
};

inline SeedResidual seed_residual(const RealField& u0, int axis, const CNSParams& p, double t) {
  p.validate();
  const GridSpec& g = u0.grid();
  require(axis >= 0 && axis < g.dim, "weight axis out of range");
  const SpectralCoeffs Ut = lame_semigroup(forward_transform(u0), t, p.mu, p.lambda);
  const RealField u = inverse_transform_unchecked(Ut);
  const RealField dtU = coordinate_weight(inverse_transform_unchecked(lame_operator(Ut, p.mu, p.lambda)), axis, kInfinity).field;
  const RealField U = coordinate_weight(u, axis, kInfinity).field;
  const RealField AU = inverse_transform_unchecked(lame_operator(forward_transform(U), p.mu, p.lambda));
  Kinematics k;
  k.a = RealField(g);
  k.u = u;
  k.grad_u = detail::component_gradients(Ut);
  k.div_u = inverse_transform_unchecked(divergence(Ut));
  const RealField B = weight_commutator(k, axis, p);
  // printed: -2 mu d_k u - (lambda+mu)(div u e_k - grad u_k)
  RealField Bp(g, g.dim);
  for (int i = 0; i < g.dim; ++i) {
    auto o = Bp.component(i);
    auto dku = k.grad_u[i].component(axis);
    auto gk = k.grad_u[axis].component(i);
    for (std::size_t n = 0; n < o.size(); ++n) o[n] = -2.0 * p.mu * dku[n] + (p.lambda + p.mu) * gk[n];
    if (i == axis) {
      auto dv = k.div_u.component(0);
      for (std::size_t n = 0; n < o.size(); ++n) o[n] -= (p.lambda + p.mu) * dv[n];
    }
  }
  const double scale = lp_norm(dtU, 2);
  auto rel = [&](const RealField& r) { return scale > 0.0 ? lp_norm(r, 2) / scale : lp_norm(r, 2); };
  return {rel(dtU - AU + B), rel(dtU - AU - Bp)};
}

}  // namespace bcns
