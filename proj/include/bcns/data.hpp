#pragma once

#include <random>

#include "bcns/spectral_core.hpp"

namespace bcns {

//
// Initial-data generators. Random fields are drawn as finite Fourier
// series on the torus lattice, enumerating wavevectors independently of
// N, so one seed gives the same continuous function on every grid that
// resolves the band.
//

struct BandSpec {
  double xi_lo = 0.0;  // keep |xi| in [xi_lo, xi_hi]
  double xi_hi = 1.0;
  double slope = 0.0;  // amplitude ~ |xi|^slope
};

namespace detail {

/// Canonical half of the lattice: first nonzero component positive.
inline bool canonical(const std::array<int, 3>& m) {
  for (int v : m) {
    if (v > 0) return true;
    if (v < 0) return false;
  }
  return false;
}

inline std::size_t lattice_index(const GridSpec& g, const std::array<int, 3>& m) {
  const int n = g.points;
  std::size_t idx = 0;
  for (int a = 0; a < g.dim; ++a) idx = idx * n + static_cast<std::size_t>((m[a] % n + n) % n);
  return idx;
}

}  // namespace detail

/// Spectrum of sum_m c_m exp(i xi_m . x) for the given continuous coefficients.
/// Under the unitary normalization a continuous amplitude c becomes
/// (h / N)^{d/2} N^d (-1)^{sum m} c because samples start at x = -L.
inline complex lattice_scale(const GridSpec& g, const std::array<int, 3>& m) {
  int parity = 0;
  for (int a = 0; a < g.dim; ++a) parity += m[a];
  const double s = std::pow(g.spacing() / g.points, 0.5 * g.dim) * static_cast<double>(g.size());
  return (parity % 2 == 0) ? s : -s;
}

/// Random real field (1 or d components) with Fourier support in the band;
/// normalized to unit L^2 norm over the box (grid independent).
inline RealField random_band_field(const GridSpec& g, std::uint64_t seed, const BandSpec& band, int components = 1) {
  validate(g);
  const double k0 = g.fundamental();
  const int mmax = static_cast<int>(std::floor(band.xi_hi / k0 + 1e-9));
  if (2 * mmax >= g.points) throw InvalidArgument("band exceeds the grid's resolved frequencies");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  SpectralCoeffs F(g, components);
  double energy = 0.0;
  const int m2 = g.dim == 3 ? mmax : 0;
  for (int c = 0; c < components; ++c) {
    for (int i0 = -mmax; i0 <= mmax; ++i0)
      for (int i1 = -mmax; i1 <= mmax; ++i1)
        for (int i2 = -m2; i2 <= m2; ++i2) {
          const std::array<int, 3> m{i0, i1, i2};
          if (!detail::canonical(m)) continue;
          const double r = k0 * std::sqrt(double(i0 * i0 + i1 * i1 + i2 * i2));
          // draw before the band test so the stream does not depend on the band edges
          const double re = normal(rng), im = normal(rng);
          if (r < band.xi_lo || r > band.xi_hi) continue;
          const complex amp = std::pow(r, band.slope) * complex(re, im);
          energy += 2.0 * std::norm(amp);
          const std::array<int, 3> neg{-i0, -i1, -i2};
          F.component(c)[detail::lattice_index(g, m)] = lattice_scale(g, m) * amp;
          F.component(c)[detail::lattice_index(g, neg)] = lattice_scale(g, neg) * std::conj(amp);
        }
  }
  if (energy == 0.0) throw InvalidArgument("band contains no lattice frequencies");
  // continuous L^2 norm^2 = (2L)^d sum |c_m|^2
  F *= 1.0 / std::sqrt(energy * g.volume());
  return inverse_transform(F);
}

/// A exp(-|x - x0|^2 / (2 sigma^2)), optionally modulated by cos(kappa . x).
struct BumpSpec {
  double amplitude = 1.0;
  double sigma = 1.0;
  std::array<double, 3> center{};
  std::array<double, 3> wave{};  // kappa
};

inline RealField gaussian_bump(const GridSpec& g, const BumpSpec& b) {
  return RealField::sample(g, [&](const std::array<double, 3>& x) {
    double r2 = 0.0, ph = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      r2 += (x[a] - b.center[a]) * (x[a] - b.center[a]);
      ph += b.wave[a] * x[a];
    }
    return b.amplitude * std::exp(-0.5 * r2 / (b.sigma * b.sigma)) * std::cos(ph);
  });
}

/// d^order of A exp(-|x - x0|^2 / (2 sigma^2)), i.e. a Hermite function. Any nonzero
/// order makes the field mean-free, so it can be x_k-weighted without a seam offset.
struct HermiteSpec {
  double amplitude = 1.0;
  double sigma = 1.0;
  std::array<double, 3> center{};
  std::array<int, 3> order{};
};

inline RealField hermite_bump(const GridSpec& g, const HermiteSpec& h) {
  auto he = [](int n, double z) {
    double p0 = 1.0, p1 = z;
    if (n == 0) return p0;
    for (int k = 1; k < n; ++k) {
      const double p2 = z * p1 - k * p0;
      p0 = p1;
      p1 = p2;
    }
    return p1;
  };
  return RealField::sample(g, [&](const std::array<double, 3>& x) {
    double v = h.amplitude;
    for (int a = 0; a < g.dim; ++a) {
      const double z = (x[a] - h.center[a]) / h.sigma;
      v *= std::pow(-1.0 / h.sigma, h.order[a]) * he(h.order[a], z) * std::exp(-0.5 * z * z);
    }
    return v;
  });
}

}  // namespace bcns
