#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "bcns/grid.hpp"

namespace bcns {

using complex = std::complex<double>;

//
// Sampled field on a GridSpec. Scalars carry one component, vector fields
// carry exactly `dim` components; storage is component-major, each
// component row-major by axis (x_1 slowest).
//
class RealField {
 public:
  RealField() = default;

  explicit RealField(const GridSpec& grid, int components = 1)
      : grid_(grid), components_(components), data_(grid.size() * components, 0.0) {
    validate(grid_);
    check_components();
  }

  RealField(const GridSpec& grid, int components, std::vector<double> samples)
      : grid_(grid), components_(components), data_(std::move(samples)) {
    validate(grid_);
    check_components();
    if (data_.size() != grid_.size() * static_cast<std::size_t>(components_))
      throw InvalidArgument("sample count does not match grid and component count");
    for (double v : data_)
      if (!std::isfinite(v)) throw InvalidArgument("field samples must be finite");
  }

  /// Scalar field sampled from f(x) with x a std::array<double, 3> (unused axes zero).
  template <class F>
  static RealField sample(const GridSpec& grid, F&& f) {
    RealField out(grid, 1);
    for_each_point(grid, [&](std::size_t i, const std::array<double, 3>& x) { out.data_[i] = f(x); });
    out.check_finite();
    return out;
  }

  /// Vector field sampled from f(x, component).
  template <class F>
  static RealField sample_vector(const GridSpec& grid, F&& f) {
    RealField out(grid, grid.dim);
    const std::size_t n = grid.size();
    for_each_point(grid, [&](std::size_t i, const std::array<double, 3>& x) {
      for (int c = 0; c < grid.dim; ++c) out.data_[c * n + i] = f(x, c);
    });
    out.check_finite();
    return out;
  }

  /// Calls f(linear index, coordinates) for every grid point.
  template <class F>
  static void for_each_point(const GridSpec& g, F&& f) {
    const int n = g.points;
    const int n2 = g.dim == 3 ? n : 1;
    std::array<double, 3> x{};
    std::size_t idx = 0;
    for (int i0 = 0; i0 < n; ++i0) {
      x[0] = g.coordinate(i0);
      for (int i1 = 0; i1 < n; ++i1) {
        x[1] = g.coordinate(i1);
        for (int i2 = 0; i2 < n2; ++i2, ++idx) {
          x[2] = g.dim == 3 ? g.coordinate(i2) : 0.0;
          f(idx, static_cast<const std::array<double, 3>&>(x));
        }
      }
    }
  }

  const GridSpec& grid() const { return grid_; }
  int components() const { return components_; }
  bool is_vector() const { return components_ > 1; }
  std::size_t points() const { return grid_.size(); }

  std::span<const double> samples() const { return data_; }
  std::span<double> samples() { return data_; }

  std::span<const double> component(int c) const {
    return std::span<const double>(data_).subspan(c * points(), points());
  }
  std::span<double> component(int c) { return std::span<double>(data_).subspan(c * points(), points()); }

  RealField component_field(int c) const {
    RealField out(grid_, 1);
    std::ranges::copy(component(c), out.data_.begin());
    return out;
  }

  bool all_finite() const {
    return std::ranges::all_of(data_, [](double v) { return std::isfinite(v); });
  }

  RealField& operator+=(const RealField& o) {
    check_compatible(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  RealField& operator-=(const RealField& o) {
    check_compatible(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  RealField& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }
  /// this += s * o
  RealField& axpy(double s, const RealField& o) {
    check_compatible(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * o.data_[i];
    return *this;
  }

  friend RealField operator+(RealField a, const RealField& b) { return a += b; }
  friend RealField operator-(RealField a, const RealField& b) { return a -= b; }
  friend RealField operator*(double s, RealField a) { return a *= s; }

  void check_compatible(const RealField& o) const {
    require_same_grid(grid_, o.grid_);
    if (components_ != o.components_) throw InvalidArgument("component count mismatch");
  }

 private:
  void check_components() const {
    if (components_ != 1 && components_ != grid_.dim)
      throw InvalidArgument("a field has 1 component or exactly d components");
  }
  void check_finite() const {
    if (!all_finite()) throw InvalidArgument("field samples must be finite");
  }

  GridSpec grid_{};
  int components_ = 1;
  std::vector<double> data_;
};

/// Stacks d scalar fields into one vector field.
inline RealField stack(std::span<const RealField> parts) {
  require(!parts.empty(), "stack needs at least one field");
  const GridSpec& g = parts.front().grid();
  const int c = static_cast<int>(parts.size());
  RealField out(g, c);
  for (int i = 0; i < c; ++i) {
    require(parts[i].components() == 1, "stack expects scalar fields");
    require_same_grid(g, parts[i].grid());
    std::ranges::copy(parts[i].samples(), out.component(i).begin());
  }
  return out;
}

//
// Fourier coefficients on the full frequency lattice, same component
// layout as RealField. Normalization is unitary on the discrete torus:
// coeff(m) = (h / N)^{d/2} sum_x f(x) exp(-i 2 pi m . i / N), so that
// sum |coeff|^2 = h^d sum |f|^2 (Parseval with the Riemann-sum L^2 norm).
//
class SpectralCoeffs {
 public:
  SpectralCoeffs() = default;
  explicit SpectralCoeffs(const GridSpec& grid, int components = 1)
      : grid_(grid), components_(components), data_(grid.size() * components) {
    validate(grid_);
    if (components_ != 1 && components_ != grid_.dim)
      throw InvalidArgument("spectral data has 1 component or exactly d components");
  }

  const GridSpec& grid() const { return grid_; }
  int components() const { return components_; }
  std::size_t points() const { return grid_.size(); }

  std::span<const complex> coeffs() const { return data_; }
  std::span<complex> coeffs() { return data_; }
  std::span<const complex> component(int c) const {
    return std::span<const complex>(data_).subspan(c * points(), points());
  }
  std::span<complex> component(int c) { return std::span<complex>(data_).subspan(c * points(), points()); }

  SpectralCoeffs component_coeffs(int c) const {
    SpectralCoeffs out(grid_, 1);
    std::ranges::copy(component(c), out.data_.begin());
    return out;
  }

  SpectralCoeffs& operator+=(const SpectralCoeffs& o) {
    check_compatible(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  SpectralCoeffs& operator-=(const SpectralCoeffs& o) {
    check_compatible(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  SpectralCoeffs& operator*=(double s) {
    for (auto& v : data_) v *= s;
    return *this;
  }
  SpectralCoeffs& axpy(double s, const SpectralCoeffs& o) {
    check_compatible(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * o.data_[i];
    return *this;
  }
  friend SpectralCoeffs operator+(SpectralCoeffs a, const SpectralCoeffs& b) { return a += b; }
  friend SpectralCoeffs operator-(SpectralCoeffs a, const SpectralCoeffs& b) { return a -= b; }
  friend SpectralCoeffs operator*(double s, SpectralCoeffs a) { return a *= s; }

  void check_compatible(const SpectralCoeffs& o) const {
    require_same_grid(grid_, o.grid_);
    if (components_ != o.components_) throw InvalidArgument("component count mismatch");
  }

  /// Largest |coeff(m) - conj(coeff(-m))| over all modes and components.
  double hermitian_defect() const {
    double worst = 0.0;
    for (int c = 0; c < components_; ++c) {
      auto z = component(c);
      for (std::size_t i = 0; i < z.size(); ++i)
        worst = std::max(worst, std::abs(z[i] - std::conj(z[conjugate_index(grid_, i)])));
    }
    return worst;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : data_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  GridSpec grid_{};
  int components_ = 1;
  std::vector<complex> data_;
};

inline SpectralCoeffs stack(std::span<const SpectralCoeffs> parts) {
  require(!parts.empty(), "stack needs at least one field");
  const GridSpec& g = parts.front().grid();
  SpectralCoeffs out(g, static_cast<int>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) {
    require(parts[i].components() == 1, "stack expects scalar spectra");
    require_same_grid(g, parts[i].grid());
    std::ranges::copy(parts[i].coeffs(), out.component(static_cast<int>(i)).begin());
  }
  return out;
}

}  // namespace bcns
