#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "bcns/fft.hpp"

namespace bcns {

/// Pointwise Euclidean magnitude of a (scalar or vector) field at sample i.
inline double magnitude_at(const RealField& f, std::size_t i) {
  if (f.components() == 1) return std::abs(f.component(0)[i]);
  double s = 0.0;
  for (int c = 0; c < f.components(); ++c) s += f.component(c)[i] * f.component(c)[i];
  return std::sqrt(s);
}

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Riemann-sum L^p norm (sum |f|^p h^d)^{1/p}; p = infinity gives the max norm.
inline double lp_norm(const RealField& f, double p) {
  if (!(p >= 1.0)) throw InvalidArgument("L^p norm needs p >= 1");
  const std::size_t n = f.points();
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, magnitude_at(f, i));
    return m;
  }
  // scale by the max to keep large p from overflowing
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, magnitude_at(f, i));
  if (m == 0.0) return 0.0;
  double s = 0.0;
  if (p == 2.0) {
    for (std::size_t i = 0; i < n; ++i) {
      const double r = magnitude_at(f, i) / m;
      s += r * r;
    }
    return m * std::sqrt(s * f.grid().cell_volume());
  }
  for (std::size_t i = 0; i < n; ++i) s += std::pow(magnitude_at(f, i) / m, p);
  return m * std::pow(s * f.grid().cell_volume(), 1.0 / p);
}

/// Spatial mean of each component (the zero mode divided by sqrt(volume)).
inline std::vector<double> mean(const RealField& f) {
  std::vector<double> out(f.components(), 0.0);
  for (int c = 0; c < f.components(); ++c) {
    double s = 0.0;
    for (double v : f.component(c)) s += v;
    out[c] = s / static_cast<double>(f.points());
  }
  return out;
}

inline double integral(const RealField& f, int component = 0) {
  double s = 0.0;
  for (double v : f.component(component)) s += v;
  return s * f.grid().cell_volume();
}

/// Fraction of ||f||_1 that lies within 0.1 L of the box boundary.
inline double boundary_mass_fraction(const RealField& f) {
  const GridSpec& g = f.grid();
  const double band = 0.1 * g.half_length;
  double total = 0.0, near = 0.0;
  RealField::for_each_point(g, [&](std::size_t i, const std::array<double, 3>& x) {
    const double v = magnitude_at(f, i);
    total += v;
    double dist = kInfinity;
    for (int a = 0; a < g.dim; ++a) dist = std::min(dist, g.half_length - std::abs(x[a]));
    if (dist < band) near += v;
  });
  return total > 0.0 ? near / total : 0.0;
}

struct WeightedField {
  RealField field;
  double boundary_fraction = 0.0;
  std::vector<std::string> warnings;
};

inline constexpr double kDefaultBoundaryThreshold = 1e-8;

/// x_k f with x_k the signed coordinate in [-L, L); `axis` is zero-based.
inline WeightedField coordinate_weight(const RealField& f, int axis,
                                       double boundary_threshold = kDefaultBoundaryThreshold) {
  const GridSpec& g = f.grid();
  if (axis < 0 || axis >= g.dim) throw InvalidArgument("weight axis out of range");
  WeightedField out{f, boundary_mass_fraction(f), {}};
  const std::size_t n = f.points();
  RealField::for_each_point(g, [&](std::size_t i, const std::array<double, 3>& x) {
    for (int c = 0; c < f.components(); ++c) out.field.component(c)[i] *= x[axis];
  });
  (void)n;
  if (out.boundary_fraction > boundary_threshold)
    out.warnings.push_back("boundary mass fraction " + std::to_string(out.boundary_fraction) +
                           " exceeds " + std::to_string(boundary_threshold) + "; x_k weight sees the periodic seam");
  return out;
}

/// Zero every mode with some |m_i| > N/3 (two-thirds rule). Idempotent.
inline SpectralCoeffs dealias(SpectralCoeffs F) {
  const GridSpec& g = F.grid();
  const int n = g.points;
  for_each_mode(g, [&](const Mode& md) {
    bool cut = false;
    for (int a = 0; a < g.dim; ++a) cut = cut || 3 * std::abs(md.m[a]) > n;
    if (cut)
      for (int c = 0; c < F.components(); ++c) F.component(c)[md.index] = 0.0;
  });
  return F;
}

inline RealField dealias(const RealField& f) { return inverse_transform_unchecked(dealias(forward_transform(f))); }

/// Dealiased pointwise product of two scalar fields.
inline RealField dealiased_product(const RealField& a, const RealField& b) {
  require_same_grid(a.grid(), b.grid());
  require(a.components() == 1 && b.components() == 1, "dealiased_product expects scalars");
  RealField p = a;
  auto ps = p.samples();
  auto bs = b.samples();
  for (std::size_t i = 0; i < ps.size(); ++i) ps[i] *= bs[i];
  return dealias(p);
}

}  // namespace bcns
