#pragma once

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "bcns/field.hpp"

namespace bcns {

namespace detail {

// FFTW plans keyed by (dim, N, direction). Planning is serialized; the
// new-array execute functions are thread-safe. FFTW_ESTIMATE keeps plan
// selection deterministic so repeated runs give bit-identical output.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int dim, int n, bool forward) {
    std::lock_guard lock(mutex_);
    auto key = std::make_tuple(dim, n, forward);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    int dims[3] = {n, n, n};
    std::size_t total = 1;
    for (int i = 0; i < dim; ++i) total *= static_cast<std::size_t>(n);
    const std::size_t half = total / n * (n / 2 + 1);
    std::vector<double> r(total);
    std::vector<complex> c(half);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan p = forward ? fftw_plan_dft_r2c(dim, dims, r.data(), reinterpret_cast<fftw_complex*>(c.data()), flags)
                          : fftw_plan_dft_c2r(dim, dims, reinterpret_cast<fftw_complex*>(c.data()), r.data(), flags);
    if (!p) throw NumericFault("FFTW failed to create a plan");
    plans_.emplace(key, p);
    return p;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [k, p] : plans_) fftw_destroy_plan(p);
  }
  std::mutex mutex_;
  std::map<std::tuple<int, int, bool>, fftw_plan> plans_;
};

inline std::size_t half_size(const GridSpec& g) { return g.size() / g.points * (g.points / 2 + 1); }

inline void forward_component(const GridSpec& g, std::span<const double> in, std::span<complex> out,
                              std::vector<complex>& half) {
  const int n = g.points;
  const std::size_t nh = static_cast<std::size_t>(n / 2 + 1);
  half.resize(half_size(g));
  fftw_plan p = PlanCache::instance().get(g.dim, n, true);
  fftw_execute_dft_r2c(p, const_cast<double*>(in.data()), reinterpret_cast<fftw_complex*>(half.data()));
  const double scale = std::pow(g.spacing() / n, 0.5 * g.dim);
  const std::size_t rows = g.size() / n;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t k = 0; k < nh; ++k) out[r * n + k] = scale * half[r * nh + k];
  // fill the other half from Hermitian symmetry
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = nh; k < static_cast<std::size_t>(n); ++k) {
      const std::size_t idx = r * n + k;
      out[idx] = std::conj(out[conjugate_index(g, idx)]);
    }
  }
}

inline void inverse_component(const GridSpec& g, std::span<const complex> in, std::span<double> out,
                              std::vector<complex>& half) {
  const int n = g.points;
  const std::size_t nh = static_cast<std::size_t>(n / 2 + 1);
  half.resize(half_size(g));
  const std::size_t rows = g.size() / n;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t k = 0; k < nh; ++k) half[r * nh + k] = in[r * n + k];
  fftw_plan p = PlanCache::instance().get(g.dim, n, false);
  fftw_execute_dft_c2r(p, reinterpret_cast<fftw_complex*>(half.data()), out.data());
  const double scale = 1.0 / std::sqrt(std::pow(g.spacing() * n, g.dim));
  for (double& v : out) v *= scale;
}

}  // namespace detail

/// Relative tolerance on the Hermitian defect accepted by inverse_transform.
inline constexpr double kHermitianTolerance = 1e-10;

inline SpectralCoeffs forward_transform(const RealField& f) {
  SpectralCoeffs out(f.grid(), f.components());
  std::vector<complex> half;
  for (int c = 0; c < f.components(); ++c) detail::forward_component(f.grid(), f.component(c), out.component(c), half);
  for (const auto& z : out.coeffs())
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw NumericFault("non-finite Fourier coefficient");
  return out;
}

/// Inverse without the symmetry check; the anti-Hermitian part is discarded.
inline RealField inverse_transform_unchecked(const SpectralCoeffs& F) {
  RealField out(F.grid(), F.components());
  std::vector<complex> half;
  for (int c = 0; c < F.components(); ++c) detail::inverse_component(F.grid(), F.component(c), out.component(c), half);
  return out;
}

/// Inverse transform; rejects spectra that do not come from a real field.
inline RealField inverse_transform(const SpectralCoeffs& F) {
  const double defect = F.hermitian_defect();
  if (defect > kHermitianTolerance * F.max_abs())
    throw SymmetryViolation("spectrum is not Hermitian symmetric (defect " + std::to_string(defect) + ")");
  return inverse_transform_unchecked(F);
}

}  // namespace bcns
