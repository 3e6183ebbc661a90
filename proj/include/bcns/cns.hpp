#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bcns/data.hpp"
#include "bcns/linear_pde.hpp"

namespace bcns {

// --- parameters -----------------------------------------------------------------

/// P(rho) = coeff rho^gamma / gamma (gamma-law) or coeff rho (affine).
struct PressureLaw {
  enum class Kind { gamma, affine };
  Kind kind = Kind::gamma;
  double gamma = 1.4;
  double coeff = 1.0;

  static PressureLaw gamma_law(double gamma, double coeff = 1.0) { return {Kind::gamma, gamma, coeff}; }
  static PressureLaw affine(double coeff = 1.0) { return {Kind::affine, 1.0, coeff}; }

  double dP(double rho) const { return kind == Kind::affine ? coeff : coeff * std::pow(rho, gamma - 1.0); }
  std::string name() const { return kind == Kind::affine ? "affine" : "gamma"; }
};

struct CNSParams {
  double mu = 1.0;
  double lambda = 0.0;
  PressureLaw pressure;

  double alpha() const { return pressure.dP(1.0); }
  double nu() const { return lambda + 2.0 * mu; }
  void validate() const {
    check_lame_coefficients(mu, lambda);
    if (!(alpha() > 0.0)) throw InvalidArgument("pressure law needs P'(1) > 0");
    if (pressure.kind == PressureLaw::Kind::gamma && !(pressure.gamma > 0.0))
      throw InvalidArgument("gamma must be positive");
  }
};

inline constexpr double kVacuumFloor = 0.1;

inline void check_vacuum(const RealField& a) {
  double lo = kInfinity;
  for (double v : a.samples()) lo = std::min(lo, 1.0 + v);
  if (lo <= kVacuumFloor) throw VacuumViolation("min(1 + a) = " + std::to_string(lo) + " <= 0.1");
}

// --- state ------------------------------------------------------------------------

/// (A_k, U_k) = (x_k a, x_k u); axis is zero-based.
struct WeightedPair {
  int axis = 0;
  RealField A;
  RealField U;
};

struct FluidState {
  RealField a;
  RealField u;
  std::vector<WeightedPair> weighted;
  double t = 0.0;
};

inline void check_state(const FluidState& s) {
  const GridSpec& g = s.a.grid();
  require(s.a.components() == 1, "density perturbation must be scalar");
  require(s.u.components() == g.dim, "velocity must have d components");
  require_same_grid(s.u.grid(), g);
  for (const auto& w : s.weighted) {
    require(w.axis >= 0 && w.axis < g.dim, "weight axis out of range");
    require(w.A.components() == 1 && w.U.components() == g.dim, "weighted pair has the wrong shape");
    require_same_grid(w.A.grid(), g);
    require_same_grid(w.U.grid(), g);
  }
}

/// Mean-free localized data built from Gaussian derivatives: a ~ Lap G, u_i ~ d_{i+1} G (+ d_0 G for i = 0),
/// each with its own slightly shifted centre, scaled so sup|a| = sup|u| = amplitude.
inline FluidState hermite_state(const GridSpec& g, double amplitude, double sigma) {
  const int d = g.dim;
  FluidState s;
  s.a = RealField(g);
  for (int i = 0; i < d; ++i) {
    std::array<int, 3> o{};
    o[i] = 2;
    s.a += hermite_bump(g, {1.0, sigma, {0.3, -0.2, 0.1}, o});
  }
  s.a *= amplitude / lp_norm(s.a, kInfinity);
  std::vector<RealField> comps;
  for (int c = 0; c < d; ++c) {
    std::array<int, 3> o{};
    o[(c + 1) % d] = 1;
    if (c == 0) o[0] += 1;
    comps.push_back(hermite_bump(g, {1.0, sigma, {0.4 * c - 0.2, 0.1 * c, -0.3}, o}));
  }
  s.u = stack(std::span<const RealField>(comps));
  s.u *= amplitude / lp_norm(s.u, kInfinity);
  return s;
}

/// Attaches consistent weighted pairs x_k (a, u) for the given axes.
inline FluidState with_weights(FluidState s, const std::vector<int>& axes,
                               double threshold = kDefaultBoundaryThreshold) {
  s.weighted.clear();
  for (int k : axes) {
    WeightedPair w{k, coordinate_weight(s.a, k, threshold).field, RealField(s.u.grid(), s.u.grid().dim)};
    for (int c = 0; c < s.u.grid().dim; ++c) {
      RealField uc = coordinate_weight(s.u.component_field(c), k, threshold).field;
      std::ranges::copy(uc.samples(), w.U.component(c).begin());
    }
    s.weighted.push_back(std::move(w));
  }
  return s;
}

/// ||A_k - x_k a||_2 / ||x_k a||_2 and the same for U_k.
inline std::pair<double, double> weighted_consistency(const FluidState& s, const WeightedPair& w) {
  FluidState ref = with_weights(FluidState{s.a, s.u, {}, s.t}, {w.axis}, kInfinity);
  const auto& r = ref.weighted.front();
  auto relerr = [](const RealField& x, const RealField& y) {
    const double n = lp_norm(y, 2);
    return n > 0.0 ? lp_norm(x - y, 2) / n : lp_norm(x, 2);
  };
  return {relerr(w.A, r.A), relerr(w.U, r.U)};
}

// --- nonlinear terms ------------------------------------------------------------

namespace detail {

inline RealField pointwise(const RealField& a, double (*fn)(double, const CNSParams&), const CNSParams& p) {
  RealField out = a;
  for (double& v : out.samples()) v = fn(v, p);
  return out;
}

inline double frac(double a, const CNSParams&) { return a / (1.0 + a); }
inline double beta(double a, const CNSParams& p) { return p.pressure.dP(1.0 + a) / (1.0 + a) - p.alpha(); }
inline double inv_rho(double a, const CNSParams&) { return 1.0 / (1.0 + a); }

// gradients of every component, out[i] holds grad u_i
inline std::vector<RealField> component_gradients(const SpectralCoeffs& U) {
  std::vector<RealField> out;
  for (int c = 0; c < U.components(); ++c) out.push_back(inverse_transform_unchecked(gradient(U.component_coeffs(c))));
  return out;
}

inline SpectralCoeffs dealiased_spectrum(const RealField& f) { return dealias(forward_transform(f)); }

}  // namespace detail

/// Derived quantities of (a, u) shared by all source terms.
struct Kinematics {
  RealField a, u;
  RealField grad_a;
  std::vector<RealField> grad_u;  // grad_u[i] = grad u_i
  RealField div_u;
  RealField lame_u;  // A u
  RealField frac_a;  // a / (1 + a)
  RealField beta_a;
  RealField inv_rho;
};

inline Kinematics kinematics(const SpectralCoeffs& Ah, const SpectralCoeffs& Uh, const CNSParams& p) {
  const GridSpec& g = Ah.grid();
  Kinematics k;
  k.a = inverse_transform_unchecked(Ah);
  k.u = inverse_transform_unchecked(Uh);
  check_vacuum(k.a);
  k.grad_a = inverse_transform_unchecked(gradient(Ah));
  k.grad_u = detail::component_gradients(Uh);
  k.div_u = RealField(g);
  for (int c = 0; c < g.dim; ++c) {
    auto src = k.grad_u[c].component(c);
    auto dst = k.div_u.component(0);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
  k.lame_u = inverse_transform_unchecked(lame_operator(Uh, p.mu, p.lambda));
  k.frac_a = detail::pointwise(k.a, detail::frac, p);
  k.beta_a = detail::pointwise(k.a, detail::beta, p);
  k.inv_rho = detail::pointwise(k.a, detail::inv_rho, p);
  return k;
}

/// Spectral f = -div(a u), dealiased.
inline SpectralCoeffs source_f_spectral(const Kinematics& k) {
  const GridSpec& g = k.a.grid();
  RealField au(g, g.dim);
  for (int c = 0; c < g.dim; ++c) {
    auto x = k.a.component(0);
    auto y = k.u.component(c);
    auto o = au.component(c);
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] * y[i];
  }
  SpectralCoeffs F = divergence(dealias(forward_transform(au)));
  F *= -1.0;
  return F;
}

/// Spectral g = -u.grad u - a/(1+a) A u - beta(a) grad a, dealiased.
inline SpectralCoeffs source_g_spectral(const Kinematics& k) {
  const GridSpec& g = k.a.grid();
  const int d = g.dim;
  RealField out(g, d);
  auto fa = k.frac_a.component(0);
  auto ba = k.beta_a.component(0);
  for (int i = 0; i < d; ++i) {
    auto o = out.component(i);
    auto lu = k.lame_u.component(i);
    auto ga = k.grad_a.component(i);
    for (std::size_t n = 0; n < o.size(); ++n) o[n] = -fa[n] * lu[n] - ba[n] * ga[n];
    for (int j = 0; j < d; ++j) {
      auto uj = k.u.component(j);
      auto dj = k.grad_u[i].component(j);
      for (std::size_t n = 0; n < o.size(); ++n) o[n] -= uj[n] * dj[n];
    }
  }
  return detail::dealiased_spectrum(out);
}

inline RealField source_f(const RealField& a, const RealField& u, const CNSParams& p = {}) {
  return inverse_transform_unchecked(source_f_spectral(kinematics(forward_transform(a), forward_transform(u), p)));
}
inline RealField source_g(const RealField& a, const RealField& u, const CNSParams& p) {
  p.validate();
  return inverse_transform_unchecked(source_g_spectral(kinematics(forward_transform(a), forward_transform(u), p)));
}

/// B = 2 mu d_k u + (lambda + mu)(div(u) e_k + grad u_k), the commutator x_k A u - A(x_k u) with sign flipped.
inline RealField weight_commutator(const Kinematics& k, int axis, const CNSParams& p) {
  const GridSpec& g = k.a.grid();
  RealField B(g, g.dim);
  for (int i = 0; i < g.dim; ++i) {
    auto o = B.component(i);
    auto dku = k.grad_u[i].component(axis);
    auto gk = k.grad_u[axis].component(i);
    for (std::size_t n = 0; n < o.size(); ++n) o[n] = 2.0 * p.mu * dku[n] + (p.lambda + p.mu) * gk[n];
    if (i == axis) {
      auto dv = k.div_u.component(0);
      for (std::size_t n = 0; n < o.size(); ++n) o[n] += (p.lambda + p.mu) * dv[n];
    }
  }
  return B;
}

struct WeightedSourceSpectra {
  SpectralCoeffs f;
  SpectralCoeffs g;
};

//
// Sources of the weighted pair, obtained by multiplying the (a, u) system by x_k
// and using x_k Lap u = Lap U - 2 d_k u, x_k grad div u = grad div U - div(u) e_k - grad u_k,
// x_k grad a = grad A - a e_k:
//   frak_f = u_k - A div u - U . grad a
//   frak_g = -(U . grad) u - a/(1+a) A U - beta(a) grad A + P'(1+a)/(1+a) a e_k - B/(1+a)
//
inline WeightedSourceSpectra weighted_sources_spectral(const Kinematics& k, const SpectralCoeffs& Ah,
                                                       const SpectralCoeffs& Uh, int axis, const CNSParams& p) {
  const GridSpec& g = k.a.grid();
  const int d = g.dim;
  RealField A = inverse_transform_unchecked(Ah);
  RealField U = inverse_transform_unchecked(Uh);
  RealField gradA = inverse_transform_unchecked(gradient(Ah));
  RealField lameU = inverse_transform_unchecked(lame_operator(Uh, p.mu, p.lambda));
  RealField B = weight_commutator(k, axis, p);

  RealField f(g);
  {
    auto o = f.component(0);
    auto uk = k.u.component(axis);
    auto av = A.component(0);
    auto dv = k.div_u.component(0);
    for (std::size_t n = 0; n < o.size(); ++n) o[n] = -av[n] * dv[n];
    for (int j = 0; j < d; ++j) {
      auto Uj = U.component(j);
      auto gj = k.grad_a.component(j);
      for (std::size_t n = 0; n < o.size(); ++n) o[n] -= Uj[n] * gj[n];
    }
  }
  RealField gw(g, d);
  auto fa = k.frac_a.component(0);
  auto ba = k.beta_a.component(0);
  auto av = k.a.component(0);
  for (int i = 0; i < d; ++i) {
    auto o = gw.component(i);
    auto lu = lameU.component(i);
    auto gA = gradA.component(i);
    auto b = B.component(i);
    for (std::size_t n = 0; n < o.size(); ++n) o[n] = -fa[n] * lu[n] - ba[n] * gA[n] + fa[n] * b[n];
    if (i == axis)
      for (std::size_t n = 0; n < o.size(); ++n) o[n] += ba[n] * av[n];
    for (int j = 0; j < d; ++j) {
      auto Uj = U.component(j);
      auto dj = k.grad_u[i].component(j);
      for (std::size_t n = 0; n < o.size(); ++n) o[n] -= Uj[n] * dj[n];
    }
  }
  // the terms linear in (a, u) are kept exact, only products are dealiased
  SpectralCoeffs F = detail::dealiased_spectrum(f);
  F += forward_transform(k.u.component_field(axis));
  SpectralCoeffs G = detail::dealiased_spectrum(gw);
  B *= -1.0;
  auto Bs = B.component(axis);
  auto a0 = k.a.component(0);
  const double alpha = p.alpha();
  for (std::size_t n = 0; n < Bs.size(); ++n) Bs[n] += alpha * a0[n];
  G += forward_transform(B);
  return {std::move(F), std::move(G)};
}

/// The weighted momentum source exactly as printed in the reformulated weighted system:
/// -2 mu d_k u + a e_k - (lambda+mu)(div(u) e_k + grad u_k) - (x_k beta) grad a - (U.grad) u - A/(1+a) A u.
inline RealField printed_weighted_g(const Kinematics& k, const RealField& A, const RealField& U, int axis,
                                    const CNSParams& p) {
  const GridSpec& g = k.a.grid();
  const int d = g.dim;
  RealField B = weight_commutator(k, axis, p);
  RealField xb = coordinate_weight(k.beta_a, axis, kInfinity).field;
  RealField out(g, d);
  auto ir = k.inv_rho.component(0);
  auto av = A.component(0);
  auto xbv = xb.component(0);
  for (int i = 0; i < d; ++i) {
    auto o = out.component(i);
    auto b = B.component(i);
    auto lu = k.lame_u.component(i);
    auto ga = k.grad_a.component(i);
    for (std::size_t n = 0; n < o.size(); ++n) o[n] = -xbv[n] * ga[n] - av[n] * ir[n] * lu[n];
    for (int j = 0; j < d; ++j) {
      auto Uj = U.component(j);
      auto dj = k.grad_u[i].component(j);
      for (std::size_t n = 0; n < o.size(); ++n) o[n] -= Uj[n] * dj[n];
    }
  }
  out = dealias(out);
  out -= B;
  auto ok = out.component(axis);
  auto a = k.a.component(0);
  for (std::size_t n = 0; n < ok.size(); ++n) ok[n] += a[n];
  return out;
}

struct WeightedSources {
  RealField f;
  RealField g;
  RealField g_printed;
  double printed_difference = 0.0;  // ||g_printed - g||_2 / ||g||_2 (absolute when g = 0)
};

inline WeightedSources source_weighted(const RealField& a, const RealField& u, const RealField& A, const RealField& U,
                                       int axis, const CNSParams& p) {
  p.validate();
  require(axis >= 0 && axis < a.grid().dim, "weight axis out of range");
  Kinematics k = kinematics(forward_transform(a), forward_transform(u), p);
  auto s = weighted_sources_spectral(k, forward_transform(A), forward_transform(U), axis, p);
  WeightedSources out{inverse_transform_unchecked(s.f), inverse_transform_unchecked(s.g),
                      printed_weighted_g(k, A, U, axis, p), 0.0};
  const double n = lp_norm(out.g, 2);
  const double diff = lp_norm(out.g_printed - out.g, 2);
  out.printed_difference = n > 0.0 ? diff / n : diff;
  return out;
}

// --- time stepping ------------------------------------------------------------------

struct SpectralState {
  SpectralCoeffs a, u;
  std::vector<int> axes;
  std::vector<SpectralCoeffs> A, U;
  double t = 0.0;

  SpectralState& axpy(double s, const SpectralState& o) {
    a.axpy(s, o.a);
    u.axpy(s, o.u);
    for (std::size_t k = 0; k < A.size(); ++k) {
      A[k].axpy(s, o.A[k]);
      U[k].axpy(s, o.U[k]);
    }
    return *this;
  }
};

inline SpectralState to_spectral(const FluidState& s) {
  SpectralState out{forward_transform(s.a), forward_transform(s.u), {}, {}, {}, s.t};
  for (const auto& w : s.weighted) {
    out.axes.push_back(w.axis);
    out.A.push_back(forward_transform(w.A));
    out.U.push_back(forward_transform(w.U));
  }
  return out;
}

inline FluidState to_physical(const SpectralState& s) {
  FluidState out{inverse_transform_unchecked(s.a), inverse_transform_unchecked(s.u), {}, s.t};
  for (std::size_t k = 0; k < s.axes.size(); ++k)
    out.weighted.push_back({s.axes[k], inverse_transform_unchecked(s.A[k]), inverse_transform_unchecked(s.U[k])});
  return out;
}

struct StepOptions {
  double max_cfl = 0.5;
};

//
// Lawson-Heun: the linear part (transport-free acoustic system with the full
// Lame operator) is propagated exactly per mode, the sources by Heun's rule
// in the integrating-factor variables. Second order in dt.
//
class NonlinearStepper {
 public:
  NonlinearStepper(const GridSpec& g, const CNSParams& p, double dt, StepOptions opt = {})
      : params_(p), dt_(dt), opt_(opt), prop_((p.validate(), g), p.alpha(), p.mu, p.lambda, dt) {
    if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  }

  double dt() const { return dt_; }

  /// Sources at a state, packed like the state.
  SpectralState rhs(const SpectralState& s) const {
    Kinematics k = kinematics(s.a, s.u, params_);
    const double cfl = lp_norm(k.u, kInfinity) * dt_ / s.a.grid().spacing();
    if (cfl > opt_.max_cfl) throw CflViolation("CFL number " + std::to_string(cfl) + " above " + std::to_string(opt_.max_cfl));
    SpectralState r{source_f_spectral(k), source_g_spectral(k), s.axes, {}, {}, s.t};
    for (std::size_t i = 0; i < s.axes.size(); ++i) {
      auto w = weighted_sources_spectral(k, s.A[i], s.U[i], s.axes[i], params_);
      r.A.push_back(std::move(w.f));
      r.U.push_back(std::move(w.g));
    }
    return r;
  }

  void propagate(SpectralState& s) const {
    prop_.apply(s.a, s.u);
    for (std::size_t i = 0; i < s.A.size(); ++i) prop_.apply(s.A[i], s.U[i]);
  }

  void step(SpectralState& s) const {
    const SpectralState n0 = rhs(s);
    SpectralState pred = s;
    pred.axpy(dt_, n0);
    propagate(pred);
    pred.t = s.t + dt_;
    const SpectralState n1 = rhs(pred);
    s.axpy(0.5 * dt_, n0);
    propagate(s);
    s.axpy(0.5 * dt_, n1);
    s.t += dt_;
  }

 private:
  CNSParams params_;
  double dt_;
  StepOptions opt_;
  LinearPropagator prop_;
};

inline void guard_state(const FluidState& s) {
  guard_blowup(s.a, "density");
  guard_blowup(s.u, "velocity");
  for (const auto& w : s.weighted) {
    guard_blowup(w.A, "weighted density");
    guard_blowup(w.U, "weighted velocity");
  }
}

inline FluidState step_nonlinear(const FluidState& state, const CNSParams& p, double dt, StepOptions opt = {}) {
  check_state(state);
  NonlinearStepper st(state.a.grid(), p, dt, opt);
  SpectralState s = to_spectral(state);
  st.step(s);
  FluidState out = to_physical(s);
  guard_state(out);
  return out;
}

struct EvolveOptions {
  double horizon = 1.0;
  double dt = 1e-2;
  int sample_every = 1;
  double max_cfl = 0.5;
};

using StateObserver = std::function<void(const FluidState&)>;

/// Advances to the horizon; the observer sees t = 0 and every sample_every-th step.
inline FluidState evolve(const FluidState& init, const CNSParams& p, const EvolveOptions& opt,
                         const StateObserver& observe = {}) {
  check_state(init);
  require(opt.sample_every >= 1, "sample_every must be positive");
  auto [steps, dt] = step_plan(opt.horizon, opt.dt);
  NonlinearStepper st(init.a.grid(), p, dt, {opt.max_cfl});
  SpectralState s = to_spectral(init);
  const double t0 = init.t;
  if (observe) observe(init);
  FluidState cur = init;
  for (int n = 0; n < steps; ++n) {
    st.step(s);
    s.t = t0 + (n + 1) * dt;
    const bool sample = (n + 1) % opt.sample_every == 0 || n + 1 == steps;
    if (sample || (n + 1) % 16 == 0) {
      cur = to_physical(s);
      guard_state(cur);
      if (sample && observe) observe(cur);
    }
  }
  return steps > 0 ? to_physical(s) : init;
}

// --- effective velocities -----------------------------------------------------------

/// grad (-Lap)^{-1} of a scalar with its mean dropped.
inline SpectralCoeffs grad_inv_lap(SpectralCoeffs F) {
  F.component(0)[0] = 0.0;
  return gradient(inv_neg_laplacian(F));
}

/// w = grad (-Lap)^{-1} (alpha a - nu div u); alpha = nu = 1 in normalized units.
inline RealField effective_velocity(const RealField& a, const RealField& u, double alpha = 1.0, double nu = 1.0) {
  SpectralCoeffs Ah = forward_transform(a);
  require_zero_mean(Ah, "effective_velocity");
  SpectralCoeffs rhs = Ah;
  rhs *= alpha;
  rhs.axpy(-nu, divergence(forward_transform(u)));
  return inverse_transform_unchecked(grad_inv_lap(rhs));
}

struct WeightedEffectiveVelocity {
  RealField W;
  double removed_mean = 0.0;  // mean of A_k that was subtracted
};

inline WeightedEffectiveVelocity weighted_effective_velocity(const RealField& A, const RealField& U, double alpha = 1.0,
                                                             double nu = 1.0) {
  const double m = mean(A)[0];
  SpectralCoeffs rhs = forward_transform(remove_mean(A));
  rhs *= alpha;
  rhs.axpy(-nu, divergence(forward_transform(U)));
  return {inverse_transform_unchecked(grad_inv_lap(rhs)), m};
}

/// Right side of dt w - nu Lap w = grad(-Lap)^{-1}(alpha f - nu div g) - alpha grad(-Lap)^{-1} div u,
/// valid for (a, u, f, g) and for the weighted (A_k, U_k, frak_f, frak_g) alike.
inline RealField effective_velocity_forcing(const RealField& u, const RealField& f, const RealField& g, double alpha,
                                            double nu) {
  SpectralCoeffs r = forward_transform(f);
  r *= alpha;
  r.axpy(-nu, divergence(forward_transform(g)));
  r.axpy(-alpha, divergence(forward_transform(u)));
  return inverse_transform_unchecked(grad_inv_lap(r));
}

/// ||(w+ - w-)/(2 dt) - nu Lap w - F|| / ||(w+ - w-)/(2 dt)||.
inline double heat_residual(const RealField& w_minus, const RealField& w, const RealField& w_plus, double dt,
                            const RealField& forcing, double nu) {
  RealField dwdt = (1.0 / (2.0 * dt)) * (w_plus - w_minus);
  RealField r = dwdt - nu * laplacian(w) - forcing;
  const double n = lp_norm(dwdt, 2);
  return n > 0.0 ? lp_norm(r, 2) / n : lp_norm(r, 2);
}

// --- rescaling ---------------------------------------------------------------------

//
// a(t, x) = a~((alpha/nu) t, (sqrt(alpha)/nu) x), u = sqrt(alpha) u~(...). The samples
// stay on the same index grid; the box half-length becomes (sqrt(alpha)/nu) L.
//
struct Rescaled {
  FluidState state;
  CNSParams params;
  double time_factor = 1.0;    // t~ = time_factor t
  double length_factor = 1.0;  // x~ = length_factor x
};

inline Rescaled rescale_state(const FluidState& s, const CNSParams& p) {
  p.validate();
  check_state(s);
  const double alpha = p.alpha(), nu = p.nu();
  const double lf = std::sqrt(alpha) / nu, tf = alpha / nu;
  GridSpec g = s.a.grid();
  g.half_length *= lf;
  auto moved = [&](const RealField& f, double scale) {
    std::vector<double> v(f.samples().begin(), f.samples().end());
    for (double& x : v) x *= scale;
    return RealField(g, f.components(), std::move(v));
  };
  Rescaled r;
  r.state.a = moved(s.a, 1.0);
  r.state.u = moved(s.u, 1.0 / std::sqrt(alpha));
  for (const auto& w : s.weighted) r.state.weighted.push_back({w.axis, moved(w.A, lf), moved(w.U, lf / std::sqrt(alpha))});
  r.state.t = s.t * tf;
  r.params.mu = p.mu / nu;
  r.params.lambda = p.lambda / nu;
  r.params.pressure = p.pressure;
  r.params.pressure.coeff /= alpha;
  r.time_factor = tf;
  r.length_factor = lf;
  return r;
}

/// Inverse of rescale_state back to the original parameters.
inline FluidState unrescale_state(const FluidState& s, const CNSParams& original) {
  const double alpha = original.alpha(), nu = original.nu();
  const double lf = std::sqrt(alpha) / nu, tf = alpha / nu;
  GridSpec g = s.a.grid();
  g.half_length /= lf;
  auto moved = [&](const RealField& f, double scale) {
    std::vector<double> v(f.samples().begin(), f.samples().end());
    for (double& x : v) x *= scale;
    return RealField(g, f.components(), std::move(v));
  };
  FluidState out{moved(s.a, 1.0), moved(s.u, std::sqrt(alpha)), {}, s.t / tf};
  for (const auto& w : s.weighted) out.weighted.push_back({w.axis, moved(w.A, 1.0 / lf), moved(w.U, std::sqrt(alpha) / lf)});
  return out;
}

}  // namespace bcns
