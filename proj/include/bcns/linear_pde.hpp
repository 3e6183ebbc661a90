#pragma once

#include <boost/math/distributions/students_t.hpp>
#include <complex>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "bcns/operators.hpp"
#include "bcns/timeseries.hpp"

namespace bcns {

using FieldFn = std::function<RealField(double)>;

struct EstimateCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  std::string context;
};

inline EstimateCheck make_check(double lhs, double rhs, std::string context) {
  EstimateCheck c{lhs, rhs, 0.0, std::move(context)};
  if (rhs > 0.0)
    c.ratio = lhs / rhs;
  else
    c.ratio = lhs == 0.0 ? 0.0 : kInfinity;
  return c;
}

/// Number of steps and the adjusted step that land exactly on the horizon.
inline std::pair<int, double> step_plan(double horizon, double dt) {
  if (!(horizon >= 0.0) || !(dt > 0.0)) throw InvalidArgument("need horizon >= 0 and dt > 0");
  const int n = std::max(0, static_cast<int>(std::ceil(horizon / dt - 1e-9)));
  return {n, n > 0 ? horizon / n : dt};
}

inline constexpr double kBlowUpThreshold = 1e12;

inline void guard_blowup(const RealField& f, const char* who) {
  const double m = lp_norm(f, kInfinity);
  if (!std::isfinite(m)) throw NumericFault(std::string(who) + ": non-finite values");
  if (m > kBlowUpThreshold) throw BlowUp(std::string(who) + ": solution exceeded 1e12");
}

// --- transport -----------------------------------------------------------------

struct TransportProblem {
  RealField a0;
  FieldFn velocity;  // empty: v = 0
  double damping = 0.0;
  FieldFn forcing;  // empty: f = 0
  double horizon = 1.0;
  double dt = 1e-2;
  int sample_every = 1;
  double max_cfl = 0.5;
};

inline double cfl_number(const RealField& v, double dt) { return lp_norm(v, kInfinity) * dt / v.grid().spacing(); }

/// v . grad a with the product dealiased.
inline RealField advection(const RealField& v, const SpectralCoeffs& A) {
  const GridSpec& g = A.grid();
  RealField ga = inverse_transform_unchecked(gradient(A));
  RealField out(g);
  auto o = out.component(0);
  for (int c = 0; c < g.dim; ++c) {
    auto vc = v.component(c);
    auto gc = ga.component(c);
    for (std::size_t i = 0; i < o.size(); ++i) o[i] += vc[i] * gc[i];
  }
  return dealias(out);
}

/// RK4 for a_t + v . grad a + lambda a = f with spectral derivatives.
inline TimeSeries<RealField> solve_transport(const TransportProblem& tp) {
  const GridSpec& g = tp.a0.grid();
  require(tp.a0.components() == 1, "transport needs a scalar field");
  if (!(tp.damping >= 0.0)) throw InvalidArgument("damping must be nonnegative");
  require(tp.sample_every >= 1, "sample_every must be positive");
  auto [steps, dt] = step_plan(tp.horizon, tp.dt);
  auto rhs = [&](double t, const RealField& a) {
    RealField r(g);
    if (tp.velocity) {
      RealField v = tp.velocity(t);
      require_same_grid(v.grid(), g);
      if (cfl_number(v, dt) > tp.max_cfl)
        throw CflViolation("CFL number " + std::to_string(cfl_number(v, dt)) + " above " + std::to_string(tp.max_cfl));
      r.axpy(-1.0, advection(v, forward_transform(a)));
    }
    if (tp.damping != 0.0) r.axpy(-tp.damping, a);
    if (tp.forcing) r += tp.forcing(t);
    return r;
  };
  TimeSeries<RealField> out(0.0, dt * tp.sample_every);
  RealField a = tp.a0;
  out.push(a);
  for (int n = 0; n < steps; ++n) {
    const double t = n * dt;
    RealField k1 = rhs(t, a);
    RealField y = a;
    y.axpy(0.5 * dt, k1);
    RealField k2 = rhs(t + 0.5 * dt, y);
    y = a;
    y.axpy(0.5 * dt, k2);
    RealField k3 = rhs(t + 0.5 * dt, y);
    y = a;
    y.axpy(dt, k3);
    RealField k4 = rhs(t + dt, y);
    a.axpy(dt / 6.0, k1);
    a.axpy(dt / 3.0, k2);
    a.axpy(dt / 3.0, k3);
    a.axpy(dt / 6.0, k4);
    guard_blowup(a, "transport");
    if ((n + 1) % tp.sample_every == 0) out.push(a);
  }
  return out;
}

inline void check_transport_regularity(double s, double p, int d) {
  const double pp = std::isinf(p) ? 1.0 : (p == 1.0 ? kInfinity : p / (p - 1.0));
  const double lo = -std::min(d / p, d / pp);
  if (!(s > lo && s <= 1.0 + d / p))
    throw InvalidArgument("regularity s = " + std::to_string(s) + " outside the admissible transport range");
}

struct TransportCheck : EstimateCheck {
  double constant = 0.0;  // C in exp(C V(t))
  double V = 0.0;         // int ||grad v||_{B^{d/p}_{p,1}}
};

/// LHS = ||a||_{L~inf B^s_{p,1}} + lambda ||a||_{L^1 B^s_{p,1}};
/// RHS = exp(C V) (||a0||_{B^s_{p,1}} + ||f||_{L^1 B^s_{p,1}}).
inline TransportCheck check_transport_estimate(const TransportProblem& tp, const TimeSeries<RealField>& sol, double s,
                                               double p, const DyadicPartition& part, double C = 1.0) {
  const int d = tp.a0.grid().dim;
  check_transport_regularity(s, p, d);
  if (sol.empty()) throw InvalidArgument("empty solution");
  BlockHistory ha(part.j_min()), hf(part.j_min());
  std::vector<double> gradv;
  for (std::size_t n = 0; n < sol.size(); ++n) {
    const double t = sol.time(n);
    ha.push(t, block_norms(sol[n], p, part));
    if (tp.forcing) hf.push(t, block_norms(tp.forcing(t), p, part));
    if (tp.velocity) {
      // ||grad v||: pointwise Frobenius norm of the Jacobian
      RealField v = tp.velocity(t);
      SpectralCoeffs V = forward_transform(v);
      std::vector<double> acc(part.blocks(), 0.0);
      for (int c = 0; c < d; ++c) {
        auto bn = block_norms(gradient(V.component_coeffs(c)), p, part);
        for (std::size_t b = 0; b < acc.size(); ++b) acc[b] += bn[b] * bn[b];
      }
      double total = 0.0;
      for (std::size_t b = 0; b < acc.size(); ++b) {
        const int j = part.j_min() + static_cast<int>(b);
        total += std::pow(2.0, (d / p) * j) * std::sqrt(acc[b]);
      }
      gradv.push_back(total);
    }
  }
  const std::size_t last = sol.size() - 1;
  const int lo = part.j_min(), hi = part.j_max();
  TransportCheck out;
  const double lhs = ha.tilde_linf(s, 1.0, lo, hi, last) + tp.damping * ha.l1(s, 1.0, lo, hi, last);
  double V = 0.0;
  for (std::size_t n = 1; n < gradv.size(); ++n) V += 0.5 * sol.dt() * (gradv[n] + gradv[n - 1]);
  const double f1 = tp.forcing ? hf.l1(s, 1.0, lo, hi, last) : 0.0;
  const double rhs = std::exp(C * V) * (ha.instant(0, s, 1.0, lo, hi) + f1);
  static_cast<EstimateCheck&>(out) = make_check(lhs, rhs, "transport");
  out.constant = C;
  out.V = V;
  return out;
}

// --- Lame / heat with forcing ---------------------------------------------------

namespace detail {
// phi_1(z) = (e^z - 1)/z, phi_2(z) = (e^z - 1 - z)/z^2
inline double phi1(double z) {
  if (std::abs(z) < 1e-3) return 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0;
  return std::expm1(z) / z;
}
inline double phi2(double z) {
  if (std::abs(z) < 1e-3) return 0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0;
  return (std::expm1(z) - z) / (z * z);
}
}  // namespace detail

struct LameProblem {
  RealField u0;
  FieldFn forcing;  // empty: g = 0
  double mu = 1.0;
  double lambda = 0.0;
  double horizon = 1.0;
  double dt = 1e-2;
  int sample_every = 1;
};

/// Exponential integrator (ETD2): exact semigroup, forcing interpolated
/// linearly over each step. Exact for g affine in t, second order otherwise.
inline TimeSeries<RealField> solve_lame_forced(const LameProblem& lp_) {
  check_lame_coefficients(lp_.mu, lp_.lambda);
  const GridSpec& g = lp_.u0.grid();
  require(lp_.u0.components() == g.dim, "Lame solver needs a vector field");
  require(lp_.sample_every >= 1, "sample_every must be positive");
  auto [steps, dt] = step_plan(lp_.horizon, lp_.dt);
  const double mu = lp_.mu, nu = lp_.lambda + 2.0 * lp_.mu;
  SpectralCoeffs U = forward_transform(lp_.u0);
  TimeSeries<RealField> out(0.0, dt * lp_.sample_every);
  out.push(lp_.u0);
  SpectralCoeffs G0 = lp_.forcing ? forward_transform(lp_.forcing(0.0)) : SpectralCoeffs(g, g.dim);
  for (int n = 0; n < steps; ++n) {
    SpectralCoeffs next = apply_pq(U, [&](double k2) { return std::exp(-mu * k2 * dt); },
                                   [&](double k2) { return std::exp(-nu * k2 * dt); });
    if (lp_.forcing) {
      SpectralCoeffs G1 = forward_transform(lp_.forcing((n + 1) * dt));
      next += apply_pq(G0, [&](double k2) { return dt * detail::phi1(-mu * k2 * dt); },
                       [&](double k2) { return dt * detail::phi1(-nu * k2 * dt); });
      SpectralCoeffs dG = G1 - G0;
      next += apply_pq(dG, [&](double k2) { return dt * detail::phi2(-mu * k2 * dt); },
                       [&](double k2) { return dt * detail::phi2(-nu * k2 * dt); });
      G0 = std::move(G1);
    }
    U = std::move(next);
    if ((n + 1) % lp_.sample_every == 0) {
      RealField u = inverse_transform_unchecked(U);
      guard_blowup(u, "lame");
      out.push(std::move(u));
    }
  }
  return out;
}

/// LHS = ||u||_{L~inf B^s_{p,1}} + ||u||_{L^1 B^{s+2}_{p,1}}; RHS = ||u0||_{B^s} + ||g||_{L^1 B^s}.
inline EstimateCheck check_lame_estimate(const LameProblem& lp_, const TimeSeries<RealField>& sol, double s, double p,
                                         const DyadicPartition& part) {
  BlockHistory hu(part.j_min()), hg(part.j_min());
  for (std::size_t n = 0; n < sol.size(); ++n) {
    hu.push(sol.time(n), block_norms(sol[n], p, part));
    if (lp_.forcing) hg.push(sol.time(n), block_norms(lp_.forcing(sol.time(n)), p, part));
  }
  const std::size_t last = sol.size() - 1;
  const int lo = part.j_min(), hi = part.j_max();
  const double lhs = hu.tilde_linf(s, 1.0, lo, hi, last) + hu.l1(s + 2.0, 1.0, lo, hi, last);
  const double rhs = hu.instant(0, s, 1.0, lo, hi) + (lp_.forcing ? hg.l1(s, 1.0, lo, hi, last) : 0.0);
  return make_check(lhs, rhs, "lame");
}

// --- coupled hyperbolic-parabolic system -----------------------------------------

/// exp(t M) for a real 2x2 matrix M = [[m00, m01], [m10, m11]].
struct Mat2 {
  double e00 = 1.0, e01 = 0.0, e10 = 0.0, e11 = 1.0;
};

/// `scale` sets the Jordan switch: |disc| < 1e-12 scale^2 counts as degenerate.
inline Mat2 expm2(double m00, double m01, double m10, double m11, double t, double scale) {
  const double tau = 0.5 * (m00 + m11);
  const double h = 0.5 * (m00 - m11);
  const double delta2 = h * h + m01 * m10;  // disc / 4
  const double det = m00 * m11 - m01 * m10;
  Mat2 E;
  if (std::abs(4.0 * delta2) < 1e-12 * scale * scale) {
    const double e = std::exp(tau * t);
    E.e00 = e * (1.0 + t * (m00 - tau));
    E.e01 = e * t * m01;
    E.e10 = e * t * m10;
    E.e11 = e * (1.0 + t * (m11 - tau));
  } else if (delta2 > 0.0) {
    const double dl = std::sqrt(delta2);
    const double l1 = tau - dl;                                // most negative
    const double l2 = (tau < 0.0 && l1 != 0.0) ? det / l1 : tau + dl;  // avoids cancellation
    const double x1 = std::exp(l1 * t), x2 = std::exp(l2 * t);
    const double inv = 1.0 / (l2 - l1);
    // (e^{l2 t}(M - l1) - e^{l1 t}(M - l2)) / (l2 - l1)
    E.e00 = (x2 * (m00 - l1) - x1 * (m00 - l2)) * inv;
    E.e01 = (x2 - x1) * m01 * inv;
    E.e10 = (x2 - x1) * m10 * inv;
    E.e11 = (x2 * (m11 - l1) - x1 * (m11 - l2)) * inv;
  } else {
    const double w = std::sqrt(-delta2);
    const double e = std::exp(tau * t);
    const double c = std::cos(w * t), s = std::sin(w * t) / w;
    E.e00 = e * (c + s * (m00 - tau));
    E.e01 = e * s * m01;
    E.e10 = e * s * m10;
    E.e11 = e * (c + s * (m11 - tau));
  }
  return E;
}

/// Per-mode generator of (a_hat, v_hat): a' = -kappa v, v' = alpha kappa a - nu k^2 v,
/// with kappa the derivative magnitude (|xi| off the Nyquist planes) and k = |xi|.
inline Mat2 coupled_generator(double alpha, double nu, double kappa, double k) {
  return {0.0, -kappa, alpha * kappa, -nu * k * k};
}

inline Mat2 coupled_exponential(double alpha, double nu, double kappa, double k, double t) {
  if (k == 0.0) return {};
  const Mat2 M = coupled_generator(alpha, nu, kappa, k);
  return expm2(M.e00, M.e01, M.e10, M.e11, t, nu * k * k);
}

/// Roots of z^2 + nu k^2 z + alpha k^2.
inline std::pair<complex, complex> coupled_eigenvalues(double alpha, double nu, double k) {
  const complex disc = nu * nu * k * k * k * k - 4.0 * alpha * k * k;
  const complex r = std::sqrt(disc);
  return {0.5 * (-nu * k * k - r), 0.5 * (-nu * k * k + r)};
}

inline double derivative_magnitude(const Mode& md) {
  return std::sqrt(md.xi_odd[0] * md.xi_odd[0] + md.xi_odd[1] * md.xi_odd[1] + md.xi_odd[2] * md.xi_odd[2]);
}

struct CoupledLinearProblem {
  RealField a0;
  RealField v0;  // scalarized velocity |D|^{-1} div u
  double alpha = 1.0;
  double nu = 1.0;
  std::vector<double> times;
};

struct ScalarPair {
  RealField a;
  RealField v;
};

inline void check_coupled(const CoupledLinearProblem& clp) {
  if (!(clp.alpha > 0.0) || !(clp.nu > 0.0)) throw InvalidArgument("coupled system needs alpha, nu > 0");
  require(clp.a0.components() == 1 && clp.v0.components() == 1, "coupled system takes scalar a and v");
  require_same_grid(clp.a0.grid(), clp.v0.grid());
}

inline std::pair<SpectralCoeffs, SpectralCoeffs> evolve_coupled(const SpectralCoeffs& A, const SpectralCoeffs& V,
                                                                double alpha, double nu, double t) {
  SpectralCoeffs a(A.grid()), v(A.grid());
  auto ai = A.component(0), vi = V.component(0);
  auto ao = a.component(0), vo = v.component(0);
  for_each_mode(A.grid(), [&](const Mode& md) {
    const Mat2 E = coupled_exponential(alpha, nu, derivative_magnitude(md), md.norm, t);
    ao[md.index] = E.e00 * ai[md.index] + E.e01 * vi[md.index];
    vo[md.index] = E.e10 * ai[md.index] + E.e11 * vi[md.index];
  });
  return {std::move(a), std::move(v)};
}

/// Exact per-mode solution sampled at clp.times.
inline std::vector<ScalarPair> solve_coupled_linear(const CoupledLinearProblem& clp) {
  check_coupled(clp);
  SpectralCoeffs A = forward_transform(clp.a0), V = forward_transform(clp.v0);
  std::vector<ScalarPair> out;
  for (double t : clp.times) {
    if (!(t >= 0.0)) throw InvalidArgument("sample times must be nonnegative");
    auto [a, v] = evolve_coupled(A, V, clp.alpha, clp.nu, t);
    out.push_back({inverse_transform_unchecked(a), inverse_transform_unchecked(v)});
  }
  return out;
}

/// Block norms of a pair: ||Delta_j a|| + ||Delta_j v||.
inline std::vector<double> pair_block_norms(const SpectralCoeffs& A, const SpectralCoeffs& V, double p,
                                            const DyadicPartition& part) {
  auto x = block_norms(A, p, part);
  auto y = block_norms(V, p, part);
  for (std::size_t b = 0; b < x.size(); ++b) x[b] += y[b];
  return x;
}

/// Low-frequency (j <= j0) check: ||(a,v)||^l_{L~inf B^s_{2,1}} + ||(a,v)||^l_{L^1 B^{s+2}_{2,1}}
/// against ||(a0,v0)||^l_{B^s_{2,1}} (no forcing).
inline EstimateCheck check_coupled_estimate(const CoupledLinearProblem& clp, const std::vector<ScalarPair>& sol, double s,
                                            const DyadicPartition& part) {
  require(sol.size() == clp.times.size() && !sol.empty(), "solution does not match the sample times");
  BlockHistory h(part.j_min());
  for (std::size_t n = 0; n < sol.size(); ++n)
    h.push(clp.times[n], pair_block_norms(forward_transform(sol[n].a), forward_transform(sol[n].v), 2.0, part));
  const std::size_t last = sol.size() - 1;
  const int lo = part.j_min(), hi = part.j0();
  const double lhs = h.tilde_linf(s, 1.0, lo, hi, last) + h.l1(s + 2.0, 1.0, lo, hi, last);
  BlockHistory h0(part.j_min());
  h0.push(0.0, pair_block_norms(forward_transform(clp.a0), forward_transform(clp.v0), 2.0, part));
  return make_check(lhs, h0.instant(0, s, 1.0, lo, hi), "coupled-low");
}

//
// Exact propagator of the full linear part for a state (a, u):
// a_t + div u = 0, u_t - A u + alpha grad a = 0. The P part of u decays by
// exp(-mu k^2 t); the longitudinal part couples to a through the 2x2 block.
//
class LinearPropagator {
 public:
  LinearPropagator(const GridSpec& g, double alpha, double mu, double lambda, double t)
      : grid_(g), t_(t), coeffs_(g.size()) {
    check_lame_coefficients(mu, lambda);
    if (!(alpha > 0.0)) throw InvalidArgument("alpha must be positive");
    const double nu = lambda + 2.0 * mu;
    for_each_mode(g, [&](const Mode& md) {
      Entry& e = coeffs_[md.index];
      e.E = coupled_exponential(alpha, nu, derivative_magnitude(md), md.norm, t);
      e.p = std::exp(-mu * md.norm * md.norm * t);
    });
  }

  double time() const { return t_; }
  const GridSpec& grid() const { return grid_; }

  /// In place; A scalar, U vector, both spectral.
  void apply(SpectralCoeffs& A, SpectralCoeffs& U) const {
    const int d = grid_.dim;
    auto a = A.component(0);
    for_each_mode(grid_, [&](const Mode& md) {
      const std::size_t i = md.index;
      const Entry& e = coeffs_[i];
      const double kap = derivative_magnitude(md);
      if (kap == 0.0) {
        // Q vanishes here (zero mode, pure-Nyquist modes): a frozen, u in the P part
        for (int c = 0; c < d; ++c) U.component(c)[i] *= e.p;
        return;
      }
      complex w = 0.0;  // longitudinal component
      for (int c = 0; c < d; ++c) w += (md.xi_odd[c] / kap) * U.component(c)[i];
      const complex v = complex(0.0, 1.0) * w;
      const complex an = e.E.e00 * a[i] + e.E.e01 * v;
      const complex vn = e.E.e10 * a[i] + e.E.e11 * v;
      const complex wn = complex(0.0, -1.0) * vn;
      a[i] = an;
      for (int c = 0; c < d; ++c) {
        const double dir = md.xi_odd[c] / kap;
        const complex uc = U.component(c)[i];
        U.component(c)[i] = e.p * (uc - w * dir) + wn * dir;
      }
    });
  }

 private:
  struct Entry {
    Mat2 E;
    double p = 1.0;
  };
  GridSpec grid_;
  double t_;
  std::vector<Entry> coeffs_;
};

// --- decay fits -------------------------------------------------------------------

struct DecayFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 1.0;
  double stderr_slope = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t points = 0;
};

inline double japanese(double t) { return std::sqrt(1.0 + t * t); }

/// Least squares of log(value) against log<t> over t in [t1, t2].
inline DecayFit measure_decay(std::span<const double> t, std::span<const double> v, double t1, double t2,
                              double confidence = 0.95) {
  require(t.size() == v.size(), "time and value series differ in length");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t1 || t[i] > t2) continue;
    if (!(v[i] > 0.0)) throw InvalidArgument("decay fit needs positive values in the window");
    x.push_back(std::log(japanese(t[i])));
    y.push_back(std::log(v[i]));
  }
  const std::size_t n = x.size();
  if (n < 3) throw InvalidArgument("decay fit needs at least three samples in the window");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("decay window needs distinct times");
  DecayFit f;
  f.points = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    sse += r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  f.stderr_slope = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
  boost::math::students_t dist(static_cast<double>(n - 2));
  const double q = boost::math::quantile(boost::math::complement(dist, 0.5 * (1.0 - confidence)));
  f.ci_low = f.slope - q * f.stderr_slope;
  f.ci_high = f.slope + q * f.stderr_slope;
  return f;
}

}  // namespace bcns
