#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bcns/littlewood_paley.hpp"

namespace bcns {

enum class ZeroModePolicy { zero, identity };

//
// Fourier multiplier with a (possibly matrix valued) symbol. entry(xi, r, c)
// is row r, column c; a scalar symbol has 1x1 shape and acts componentwise.
// On Nyquist planes the symbol is averaged over the +-xi_i aliases, which is
// what a continuous symbol does to the (real) cosine mode living there.
//
struct MultiplierSpec {
  std::function<complex(const std::array<double, 3>&, int, int)> entry;
  int rows = 1;
  int cols = 1;
  double degree = 0.0;
  ZeroModePolicy zero_mode = ZeroModePolicy::zero;
  std::string name = "multiplier";
};

inline MultiplierSpec scalar_multiplier(std::function<complex(const std::array<double, 3>&)> symbol, double degree,
                                        ZeroModePolicy zm = ZeroModePolicy::zero, std::string name = "multiplier") {
  return {[s = std::move(symbol)](const std::array<double, 3>& xi, int, int) { return s(xi); }, 1, 1, degree, zm,
          std::move(name)};
}

inline SpectralCoeffs apply_multiplier(const SpectralCoeffs& F, const MultiplierSpec& M) {
  const GridSpec& g = F.grid();
  const bool componentwise = M.rows == 1 && M.cols == 1;
  const int in_c = F.components();
  if (!componentwise && M.cols != in_c) throw InvalidArgument(M.name + ": symbol shape does not match input");
  const int out_c = componentwise ? in_c : M.rows;
  SpectralCoeffs out(g, out_c);
  for_each_mode(g, [&](const Mode& md) {
    if (md.is_zero()) {
      if (M.zero_mode == ZeroModePolicy::identity) {
        if (out_c != in_c) throw InvalidArgument(M.name + ": identity zero-mode policy needs a square symbol");
        for (int c = 0; c < in_c; ++c) out.component(c)[md.index] = F.component(c)[md.index];
      }
      return;
    }
    for (int r = 0; r < out_c; ++r) {
      complex acc = 0.0;
      for (int c = 0; c < in_c; ++c) {
        if (componentwise && c != r) continue;
        const int rr = componentwise ? 0 : r, cc = componentwise ? 0 : c;
        const complex m = alias_average<complex>(md, [&](const std::array<double, 3>& xi) { return M.entry(xi, rr, cc); });
        if (!std::isfinite(m.real()) || !std::isfinite(m.imag()))
          throw InvalidArgument(M.name + ": symbol singular at a resolved frequency");
        acc += m * F.component(c)[md.index];
      }
      out.component(r)[md.index] = acc;
    }
  });
  return out;
}

inline RealField apply_multiplier(const RealField& f, const MultiplierSpec& M) {
  return inverse_transform(apply_multiplier(forward_transform(f), M));
}

/// |F(0)| small against the overall size; the S'_h admissibility test.
inline constexpr double kMeanTolerance = 1e-10;

inline bool has_zero_mean(const SpectralCoeffs& F) {
  double total = 0.0;
  for (const auto& z : F.coeffs()) total += std::norm(z);
  const double scale = std::sqrt(total);
  for (int c = 0; c < F.components(); ++c)
    if (std::abs(F.component(c)[0]) > kMeanTolerance * scale + 1e-300) return false;
  return true;
}

inline void require_zero_mean(const SpectralCoeffs& F, const char* who) {
  if (!has_zero_mean(F)) throw NonzeroMean(std::string(who) + " requires mean-zero input");
}

/// Subtracts the mean of every component.
inline RealField remove_mean(RealField f) {
  auto m = mean(f);
  for (int c = 0; c < f.components(); ++c)
    for (double& v : f.component(c)) v -= m[c];
  return f;
}

/// Zeroes every mode with a Nyquist index. First derivatives cannot see those
/// modes, so density content there is frozen by the discrete dynamics.
inline RealField drop_nyquist(const RealField& f) {
  SpectralCoeffs F = forward_transform(f);
  for (int c = 0; c < F.components(); ++c) {
    auto v = F.component(c);
    for_each_mode(f.grid(), [&](const Mode& md) {
      if (md.nyquist) v[md.index] = 0.0;
    });
  }
  return inverse_transform(F);
}

// --- differential operators, spectral side ----------------------------------

/// d/dx_axis; odd symbol, so Nyquist content is dropped.
inline SpectralCoeffs partial(const SpectralCoeffs& F, int axis) {
  require(axis >= 0 && axis < F.grid().dim, "axis out of range");
  SpectralCoeffs out(F.grid(), F.components());
  for_each_mode(F.grid(), [&](const Mode& md) {
    const complex m(0.0, md.xi_odd[axis]);
    for (int c = 0; c < F.components(); ++c) out.component(c)[md.index] = m * F.component(c)[md.index];
  });
  return out;
}

inline SpectralCoeffs gradient(const SpectralCoeffs& F) {
  require(F.components() == 1, "gradient expects a scalar field");
  const GridSpec& g = F.grid();
  SpectralCoeffs out(g, g.dim);
  auto in = F.component(0);
  for_each_mode(g, [&](const Mode& md) {
    for (int a = 0; a < g.dim; ++a) out.component(a)[md.index] = complex(0.0, md.xi_odd[a]) * in[md.index];
  });
  return out;
}

inline SpectralCoeffs divergence(const SpectralCoeffs& U) {
  const GridSpec& g = U.grid();
  require(U.components() == g.dim, "divergence expects a vector field");
  SpectralCoeffs out(g, 1);
  auto o = out.component(0);
  for_each_mode(g, [&](const Mode& md) {
    complex acc = 0.0;
    for (int a = 0; a < g.dim; ++a) acc += complex(0.0, md.xi_odd[a]) * U.component(a)[md.index];
    o[md.index] = acc;
  });
  return out;
}

inline SpectralCoeffs laplacian(const SpectralCoeffs& F) {
  SpectralCoeffs out(F.grid(), F.components());
  for_each_mode(F.grid(), [&](const Mode& md) {
    const double k2 = md.norm * md.norm;
    for (int c = 0; c < F.components(); ++c) out.component(c)[md.index] = -k2 * F.component(c)[md.index];
  });
  return out;
}

/// (-Delta)^{-1}; the zero mode is set to zero.
inline SpectralCoeffs inv_neg_laplacian(const SpectralCoeffs& F) {
  require_zero_mean(F, "inv_neg_laplacian");
  SpectralCoeffs out(F.grid(), F.components());
  for_each_mode(F.grid(), [&](const Mode& md) {
    if (md.is_zero()) return;
    const double k2 = md.norm * md.norm;
    for (int c = 0; c < F.components(); ++c) out.component(c)[md.index] = F.component(c)[md.index] / k2;
  });
  return out;
}

//
// Helmholtz projections. With xi' = xi with Nyquist components dropped,
// Q = xi' xi'^T / |xi'|^2 and P = Id - Q. Off the Nyquist planes this is the
// usual delta_ij - xi_i xi_j / |xi|^2; on them it is still an orthogonal
// projector and div P u = 0 holds exactly for the discrete divergence.
//
namespace detail {
template <class F>
void for_each_q_mode(const SpectralCoeffs& U, F&& f) {
  const GridSpec& g = U.grid();
  require(U.components() == g.dim, "projection expects a vector field");
  for_each_mode(g, [&](const Mode& md) {
    double n2 = 0.0;
    for (int a = 0; a < g.dim; ++a) n2 += md.xi_odd[a] * md.xi_odd[a];
    complex dot = 0.0;
    if (n2 > 0.0)
      for (int a = 0; a < g.dim; ++a) dot += md.xi_odd[a] * U.component(a)[md.index];
    f(md, n2, dot);
  });
}
}  // namespace detail

inline SpectralCoeffs curlfree_Q(const SpectralCoeffs& U) {
  require_zero_mean(U, "curlfree_Q");
  SpectralCoeffs out(U.grid(), U.components());
  detail::for_each_q_mode(U, [&](const Mode& md, double n2, complex dot) {
    if (n2 == 0.0) return;
    for (int a = 0; a < U.grid().dim; ++a) out.component(a)[md.index] = md.xi_odd[a] * dot / n2;
  });
  return out;
}

inline SpectralCoeffs leray_P(const SpectralCoeffs& U) {
  SpectralCoeffs out = U;
  out -= curlfree_Q(U);
  return out;
}

/// v = |D|^{-1} div u, symbol i xi'.u / |xi|. Then Q u = -i xi' v / |xi|
/// off the Nyquist planes, and u = grad(phi) gives v = -|xi| phi.
inline SpectralCoeffs scalarize_v(const SpectralCoeffs& U) {
  require_zero_mean(U, "scalarize_v");
  const GridSpec& g = U.grid();
  require(U.components() == g.dim, "scalarize_v expects a vector field");
  SpectralCoeffs out(g, 1);
  auto o = out.component(0);
  for_each_mode(g, [&](const Mode& md) {
    if (md.is_zero()) return;
    complex acc = 0.0;
    for (int a = 0; a < g.dim; ++a) acc += complex(0.0, md.xi_odd[a]) * U.component(a)[md.index];
    o[md.index] = acc / md.norm;
  });
  return out;
}

/// Inverse of scalarize_v on curl-free fields: u = -i xi' v / |xi| (= Q u).
inline SpectralCoeffs gradient_from_v(const SpectralCoeffs& V) {
  const GridSpec& g = V.grid();
  require(V.components() == 1, "gradient_from_v expects a scalar");
  SpectralCoeffs out(g, g.dim);
  auto in = V.component(0);
  for_each_mode(g, [&](const Mode& md) {
    if (md.is_zero()) return;
    for (int a = 0; a < g.dim; ++a) out.component(a)[md.index] = complex(0.0, -md.xi_odd[a] / md.norm) * in[md.index];
  });
  return out;
}

// physical-space convenience wrappers
inline RealField gradient(const RealField& f) { return inverse_transform_unchecked(gradient(forward_transform(f))); }
inline RealField divergence(const RealField& u) { return inverse_transform_unchecked(divergence(forward_transform(u))); }
inline RealField laplacian(const RealField& f) { return inverse_transform_unchecked(laplacian(forward_transform(f))); }
inline RealField inv_neg_laplacian(const RealField& f) {
  return inverse_transform_unchecked(inv_neg_laplacian(forward_transform(f)));
}
inline RealField leray_P(const RealField& u) { return inverse_transform_unchecked(leray_P(forward_transform(u))); }
inline RealField curlfree_Q(const RealField& u) { return inverse_transform_unchecked(curlfree_Q(forward_transform(u))); }
inline RealField scalarize_v(const RealField& u) { return inverse_transform_unchecked(scalarize_v(forward_transform(u))); }

// --- semigroups --------------------------------------------------------------

inline void check_lame_coefficients(double mu, double lambda) {
  if (!(mu > 0.0) || !(2.0 * mu + lambda > 0.0))
    throw InvalidArgument("Lame coefficients need mu > 0 and 2 mu + lambda > 0");
}

inline SpectralCoeffs heat_semigroup(const SpectralCoeffs& F, double t, double kappa) {
  if (!(t >= 0.0)) throw InvalidArgument("semigroup time must be nonnegative");
  if (!(kappa > 0.0)) throw InvalidArgument("diffusivity must be positive");
  SpectralCoeffs out(F.grid(), F.components());
  for_each_mode(F.grid(), [&](const Mode& md) {
    const double e = std::exp(-kappa * md.norm * md.norm * t);
    for (int c = 0; c < F.components(); ++c) out.component(c)[md.index] = e * F.component(c)[md.index];
  });
  return out;
}

/// Applies phi_P(|xi|^2) to the P part and phi_Q(|xi|^2) to the Q part.
template <class FP, class FQ>
SpectralCoeffs apply_pq(const SpectralCoeffs& U, FP&& fp, FQ&& fq) {
  SpectralCoeffs out(U.grid(), U.components());
  detail::for_each_q_mode(U, [&](const Mode& md, double n2, complex dot) {
    const double k2 = md.norm * md.norm;
    const double ep = fp(k2), eq = fq(k2);
    for (int a = 0; a < U.grid().dim; ++a) {
      const complex u = U.component(a)[md.index];
      const complex q = n2 > 0.0 ? md.xi_odd[a] * dot / n2 : complex(0.0);
      out.component(a)[md.index] = ep * (u - q) + eq * q;
    }
  });
  return out;
}

/// e^{tA} with A = mu Delta + (lambda + mu) grad div.
inline SpectralCoeffs lame_semigroup(const SpectralCoeffs& U, double t, double mu, double lambda) {
  check_lame_coefficients(mu, lambda);
  if (!(t >= 0.0)) throw InvalidArgument("semigroup time must be nonnegative");
  const double nu = lambda + 2.0 * mu;
  return apply_pq(U, [&](double k2) { return std::exp(-mu * k2 * t); }, [&](double k2) { return std::exp(-nu * k2 * t); });
}

/// A u = mu Delta u + (lambda + mu) grad div u.
inline SpectralCoeffs lame_operator(const SpectralCoeffs& U, double mu, double lambda) {
  SpectralCoeffs out = laplacian(U);
  out *= mu;
  out.axpy(lambda + mu, gradient(divergence(U)));
  return out;
}

inline RealField heat_semigroup(const RealField& f, double t, double kappa) {
  return inverse_transform_unchecked(heat_semigroup(forward_transform(f), t, kappa));
}
inline RealField lame_semigroup(const RealField& u, double t, double mu, double lambda) {
  return inverse_transform_unchecked(lame_semigroup(forward_transform(u), t, mu, lambda));
}

// --- composition -------------------------------------------------------------

/// Smooth F with F(0) = 0 and an open admissible interval (lo, hi).
struct Composition {
  std::function<double(double)> fn;
  double lo = -kInfinity;
  double hi = kInfinity;
  std::string name = "F";
};

inline Composition fraction_composition() {
  return {[](double a) { return a / (1.0 + a); }, -1.0, kInfinity, "a/(1+a)"};
}

inline RealField compose_F(const RealField& f, const Composition& F) {
  if (std::abs(F.fn(0.0)) > 1e-14) throw InvalidArgument(F.name + ": composition needs F(0) = 0");
  require(f.components() == 1, "compose_F expects a scalar field");
  RealField out = f;
  for (double& v : out.samples()) {
    if (!(v > F.lo && v < F.hi)) {
      if (F.lo == -1.0) throw VacuumViolation(F.name + ": 1 + a <= 0 encountered");
      throw InvalidArgument(F.name + ": argument " + std::to_string(v) + " outside domain");
    }
    v = F.fn(v);
  }
  if (!out.all_finite()) throw NumericFault(F.name + ": non-finite composition");
  return out;
}

// --- Bony decomposition -------------------------------------------------------

struct BonyParts {
  RealField t_uv;  // sum_j S_{j-4}u Delta_j v
  RealField t_vu;
  RealField r_uv;  // sum_{|j-j'|<=3} Delta_j u Delta_j' v
};

namespace detail {
inline std::vector<RealField> physical_blocks(const RealField& f, const DyadicPartition& part) {
  SpectralCoeffs F = forward_transform(f);
  std::vector<RealField> out;
  for (int j = part.j_min(); j <= part.j_max(); ++j) out.push_back(inverse_transform_unchecked(block(F, j, part)));
  return out;
}
inline void add_product(RealField& acc, const RealField& a, const RealField& b) {
  auto o = acc.samples();
  auto x = a.samples();
  auto y = b.samples();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += x[i] * y[i];
}
}  // namespace detail

/// All three pieces of uv; each is dealiased when `dealiased` is set.
/// `gap` is the block separation of the paraproducts: T_u v = sum_j S_{j-gap} u Delta_j v,
/// and the remainder collects |j - j'| < gap.
inline BonyParts bony_decompose(const RealField& u, const RealField& v, const DyadicPartition& part,
                                bool dealiased = true, int gap = 4) {
  require(gap >= 1, "paraproduct gap must be positive");
  require_same_grid(u.grid(), v.grid());
  require(u.components() == 1 && v.components() == 1, "Bony decomposition expects scalars");
  auto bu = detail::physical_blocks(u, part);
  auto bv = detail::physical_blocks(v, part);
  const int nb = part.blocks();
  const GridSpec& g = u.grid();
  BonyParts out{RealField(g), RealField(g), RealField(g)};
  // running low sums S_{j-gap}
  RealField su(g), sv(g);
  for (int b = 0; b < nb; ++b) {
    if (b - gap >= 0) {
      su += bu[b - gap];
      sv += bv[b - gap];
    }
    detail::add_product(out.t_uv, su, bv[b]);
    detail::add_product(out.t_vu, sv, bu[b]);
    for (int c = std::max(0, b - gap + 1); c <= std::min(nb - 1, b + gap - 1); ++c) detail::add_product(out.r_uv, bu[b], bv[c]);
  }
  if (dealiased) {
    out.t_uv = dealias(out.t_uv);
    out.t_vu = dealias(out.t_vu);
    out.r_uv = dealias(out.r_uv);
  }
  return out;
}

inline RealField bony_T(const RealField& u, const RealField& v, const DyadicPartition& part, int gap = 4) {
  return bony_decompose(u, v, part, true, gap).t_uv;
}
inline RealField bony_R(const RealField& u, const RealField& v, const DyadicPartition& part, int gap = 4) {
  return bony_decompose(u, v, part, true, gap).r_uv;
}

/// Symmetric part of the Jacobian; entry (i, j) at index i * d + j.
inline std::vector<RealField> deformation_tensor(const RealField& u) {
  const GridSpec& g = u.grid();
  require(u.components() == g.dim, "deformation tensor expects a vector field");
  SpectralCoeffs U = forward_transform(u);
  std::vector<RealField> du;  // du[i*d+j] = d_j u_i
  for (int i = 0; i < g.dim; ++i) {
    SpectralCoeffs ui = U.component_coeffs(i);
    for (int j = 0; j < g.dim; ++j) du.push_back(inverse_transform_unchecked(partial(ui, j)));
  }
  std::vector<RealField> out;
  for (int i = 0; i < g.dim; ++i)
    for (int j = 0; j < g.dim; ++j) out.push_back(0.5 * (du[i * g.dim + j] + du[j * g.dim + i]));
  return out;
}

}  // namespace bcns
