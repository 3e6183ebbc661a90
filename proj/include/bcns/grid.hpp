#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include "bcns/error.hpp"

namespace bcns {

inline constexpr double pi = std::numbers::pi;

//
// Uniform periodic grid on the torus [-L, L)^d, N points per axis.
// Sample i along an axis sits at x = -L + i h with h = 2L / N; the
// origin is sample N/2. Frequencies are xi = (pi / L) m with integer
// m in [-N/2, N/2).
//
struct GridSpec {
  int dim = 2;
  int points = 64;
  double half_length = 32.0 * pi;

  double spacing() const { return 2.0 * half_length / points; }
  double volume() const { return std::pow(2.0 * half_length, dim); }
  double cell_volume() const { return std::pow(spacing(), dim); }

  /// Number of samples of a scalar field, N^d.
  std::size_t size() const {
    std::size_t n = 1;
    for (int i = 0; i < dim; ++i) n *= static_cast<std::size_t>(points);
    return n;
  }

  /// Smallest nonzero frequency magnitude, pi / L.
  double fundamental() const { return pi / half_length; }
  /// Largest per-axis frequency magnitude, pi N / (2 L).
  double nyquist() const { return pi * points / (2.0 * half_length); }

  int wavenumber(int i) const { return i < points / 2 ? i : i - points; }
  double coordinate(int i) const { return -half_length + i * spacing(); }

  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.dim == b.dim && a.points == b.points && a.half_length == b.half_length;
  }
};

inline void validate(const GridSpec& g) {
  if (g.dim != 2 && g.dim != 3)
    throw InvalidArgument("grid dimension must be 2 or 3, got " + std::to_string(g.dim));
  if (g.points < 4 || !std::has_single_bit(static_cast<unsigned>(g.points)))
    throw InvalidArgument("points per axis must be a power of two >= 4, got " +
                          std::to_string(g.points));
  if (!(g.half_length > 0.0) || !std::isfinite(g.half_length))
    throw InvalidArgument("box half length must be positive and finite");
}

inline GridSpec make_grid(int dim, int points, double half_length = 32.0 * pi) {
  GridSpec g{dim, points, half_length};
  validate(g);
  return g;
}

inline void require_same_grid(const GridSpec& a, const GridSpec& b) {
  if (!(a == b)) throw InvalidArgument("fields live on different grids");
}

/// One Fourier mode of a grid.
struct Mode {
  std::size_t index = 0;
  std::array<int, 3> m{};
  std::array<double, 3> xi{};
  /// xi with Nyquist components zeroed; the right factor wherever xi_i
  /// appears to an odd power, since the two aliases +-xi_i average out.
  std::array<double, 3> xi_odd{};
  double norm = 0.0;
  unsigned nyquist = 0;  // bit i set when m_i == -N/2

  bool is_zero() const { return m[0] == 0 && m[1] == 0 && m[2] == 0; }
};

/// Calls f(const Mode&) for every mode in linear (row-major) order.
template <class F>
void for_each_mode(const GridSpec& g, F&& f) {
  const int n = g.points;
  const double k0 = g.fundamental();
  const int n2 = g.dim == 3 ? n : 1;
  Mode md;
  std::size_t idx = 0;
  for (int i0 = 0; i0 < n; ++i0) {
    for (int i1 = 0; i1 < n; ++i1) {
      for (int i2 = 0; i2 < n2; ++i2, ++idx) {
        md.index = idx;
        md.m = {g.wavenumber(i0), g.wavenumber(i1), g.dim == 3 ? g.wavenumber(i2) : 0};
        md.nyquist = 0;
        double s = 0.0;
        for (int a = 0; a < 3; ++a) {
          md.xi[a] = k0 * md.m[a];
          const bool nyq = md.m[a] == -n / 2 && a < g.dim;
          if (nyq) md.nyquist |= 1u << a;
          md.xi_odd[a] = nyq ? 0.0 : md.xi[a];
          s += md.xi[a] * md.xi[a];
        }
        md.norm = std::sqrt(s);
        f(static_cast<const Mode&>(md));
      }
    }
  }
}

/// Linear index of the mode -m (the Hermitian partner of `index`).
inline std::size_t conjugate_index(const GridSpec& g, std::size_t index) {
  const std::size_t n = static_cast<std::size_t>(g.points);
  std::size_t out = 0;
  std::size_t stride = 1;
  for (int a = 0; a < g.dim; ++a) {
    const std::size_t i = index % n;
    index /= n;
    out += ((n - i) % n) * stride;
    stride *= n;
  }
  return out;
}

/// Evaluates f over the sign aliases of Nyquist components and averages.
/// This is how a continuous symbol acts on the real cosine mode at m_i = -N/2.
template <class T, class F>
T alias_average(const Mode& md, F&& f) {
  if (md.nyquist == 0) return f(md.xi);
  T acc{};
  int count = 0;
  const unsigned mask = md.nyquist;
  for (unsigned sub = 0;; sub = (sub - mask) & mask) {
    std::array<double, 3> xi = md.xi;
    for (int a = 0; a < 3; ++a)
      if (sub & (1u << a)) xi[a] = -xi[a];
    acc = acc + f(xi);
    ++count;
    if (sub == mask) break;
  }
  return acc / static_cast<double>(count);
}

}  // namespace bcns
