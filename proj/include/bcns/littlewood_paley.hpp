#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bcns/spectral_core.hpp"

namespace bcns {

namespace lp {

inline double psi(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

/// Smooth cutoff: 1 on [0,1], 0 on [2,inf), exp(-1/x) gluing in between.
inline double chi(double r) {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  const double a = psi(2.0 - r), b = psi(r - 1.0);
  return a / (a + b);
}

/// phi_0(r) = chi(r) - chi(2r); supported in [1/2, 2].
inline double phi0(double r) { return chi(r) - chi(2.0 * r); }

/// phi_j(r) = phi_0(2^{-j} r).
inline double phi(int j, double r) { return phi0(std::ldexp(r, -j)); }

}  // namespace lp

//
// Dyadic partition restricted to the band a grid can resolve. Each mode
// sits in at most two consecutive blocks, so the partition is stored as a
// per-mode table (lower block, its weight, weight of the next block).
//
class DyadicPartition {
 public:
  static int min_level(const GridSpec& g) { return static_cast<int>(std::ceil(std::log2(g.fundamental()) - 1e-12)); }
  static int max_level(const GridSpec& g) { return static_cast<int>(std::floor(std::log2(g.nyquist()) + 1e-12)) - 1; }

  DyadicPartition(const GridSpec& grid, int j0) : grid_(grid), j_min_(min_level(grid)), j_max_(max_level(grid)), j0_(j0) {
    validate(grid_);
    if (j_max_ < j_min_) throw InvalidArgument("grid resolves no complete dyadic block");
    if (j0 < j_min_ || j0 > j_max_)
      throw InvalidArgument("cutoff j0 = " + std::to_string(j0) + " outside resolved range [" + std::to_string(j_min_) +
                            ", " + std::to_string(j_max_) + "]");
    auto t = std::make_shared<Table>();
    const std::size_t n = grid_.size();
    t->lower.assign(n, kNone);
    t->w_lower.assign(n, 0.0);
    t->w_upper.assign(n, 0.0);
    for_each_mode(grid_, [&](const Mode& md) {
      if (md.is_zero()) return;
      const int jl = static_cast<int>(std::floor(std::log2(md.norm)));
      double wl = (jl >= j_min_ && jl <= j_max_) ? lp::phi(jl, md.norm) : 0.0;
      double wu = (jl + 1 >= j_min_ && jl + 1 <= j_max_) ? lp::phi(jl + 1, md.norm) : 0.0;
      if (wl == 0.0 && wu == 0.0) return;
      t->lower[md.index] = static_cast<std::int16_t>(jl);
      t->w_lower[md.index] = wl;
      t->w_upper[md.index] = wu;
    });
    table_ = std::move(t);
  }

  /// Partition with the cutoff clamped into the resolved range.
  static DyadicPartition clamped(const GridSpec& grid, int j0) {
    return DyadicPartition(grid, std::clamp(j0, min_level(grid), max_level(grid)));
  }

  const GridSpec& grid() const { return grid_; }
  int j_min() const { return j_min_; }
  int j_max() const { return j_max_; }
  int j0() const { return j0_; }
  int blocks() const { return j_max_ - j_min_ + 1; }

  /// Weight of block j at linear mode index (0 outside the block or band).
  double weight(int j, std::size_t index) const {
    const int jl = table_->lower[index];
    if (jl == kNone) return 0.0;
    if (j == jl) return table_->w_lower[index];
    if (j == jl + 1) return table_->w_upper[index];
    return 0.0;
  }

  /// Sum of all block weights at a mode; 1 inside [2^{j_min}, 2^{j_max}].
  double total_weight(std::size_t index) const { return table_->w_lower[index] + table_->w_upper[index]; }

  /// Calls f(j, weight) for the (at most two) blocks containing the mode.
  template <class F>
  void for_blocks(std::size_t index, F&& f) const {
    const int jl = table_->lower[index];
    if (jl == kNone) return;
    if (table_->w_lower[index] != 0.0) f(jl, table_->w_lower[index]);
    if (table_->w_upper[index] != 0.0) f(jl + 1, table_->w_upper[index]);
  }

  void check_level(int j) const {
    if (j < j_min_ || j > j_max_)
      throw InvalidArgument("block index " + std::to_string(j) + " outside resolved range");
  }

 private:
  static constexpr std::int16_t kNone = INT16_MIN;
  struct Table {
    std::vector<std::int16_t> lower;
    std::vector<double> w_lower, w_upper;
  };
  GridSpec grid_;
  int j_min_, j_max_, j0_;
  std::shared_ptr<const Table> table_;
};

inline DyadicPartition build_partition(const GridSpec& grid, int j0) { return DyadicPartition(grid, j0); }

inline SpectralCoeffs block(const SpectralCoeffs& F, int j, const DyadicPartition& part) {
  require_same_grid(F.grid(), part.grid());
  part.check_level(j);
  SpectralCoeffs out(F.grid(), F.components());
  for (int c = 0; c < F.components(); ++c) {
    auto in = F.component(c);
    auto o = out.component(c);
    for (std::size_t i = 0; i < in.size(); ++i) o[i] = part.weight(j, i) * in[i];
  }
  return out;
}

inline RealField block(const RealField& f, int j, const DyadicPartition& part) {
  return inverse_transform_unchecked(block(forward_transform(f), j, part));
}

/// S_j f = sum of blocks j' <= j (inclusive) over the resolved range.
inline SpectralCoeffs low_sum(const SpectralCoeffs& F, int j, const DyadicPartition& part) {
  require_same_grid(F.grid(), part.grid());
  SpectralCoeffs out(F.grid(), F.components());
  for (int c = 0; c < F.components(); ++c) {
    auto in = F.component(c);
    auto o = out.component(c);
    for (std::size_t i = 0; i < in.size(); ++i) {
      double w = 0.0;
      part.for_blocks(i, [&](int jj, double wj) {
        if (jj <= j) w += wj;
      });
      o[i] = w * in[i];
    }
  }
  return out;
}

inline RealField low_sum(const RealField& f, int j, const DyadicPartition& part) {
  return inverse_transform_unchecked(low_sum(forward_transform(f), j, part));
}

/// Projection onto the resolved band: sum of all blocks.
inline SpectralCoeffs band_projection(const SpectralCoeffs& F, const DyadicPartition& part) {
  return low_sum(F, part.j_max(), part);
}

struct BesovParams {
  double s = 0.0;
  double p = 2.0;
  double q = 1.0;
};

inline void validate(const BesovParams& bp) {
  if (!(bp.p >= 1.0) || !(bp.q >= 1.0)) throw InvalidArgument("Besov exponents need p, q >= 1");
  if (!std::isfinite(bp.s)) throw InvalidArgument("regularity exponent must be finite");
}

struct BesovBlock {
  int j;
  double value;  // 2^{sj} ||Delta_j f||_p
};

struct BesovReport {
  BesovParams params;
  int j0 = 0;
  std::vector<BesovBlock> blocks;
  double low = 0.0;
  double high = 0.0;
  double total = 0.0;
  std::vector<std::string> warnings;
};

/// l^q aggregation (q = inf gives the sup).
inline double lq_sum(std::span<const double> v, double q) {
  if (std::isinf(q)) {
    double m = 0.0;
    for (double x : v) m = std::max(m, x);
    return m;
  }
  if (q == 1.0) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (double x : v) s += std::pow(x / m, q);
  return m * std::pow(s, 1.0 / q);
}

/// Unweighted block norms ||Delta_j f||_p, index 0 is j_min. Vector fields
/// use the pointwise Euclidean norm.
inline std::vector<double> block_norms(const SpectralCoeffs& F, double p, const DyadicPartition& part) {
  require_same_grid(F.grid(), part.grid());
  if (!(p >= 1.0)) throw InvalidArgument("Besov exponents need p, q >= 1");
  const int nb = part.blocks();
  std::vector<double> out(nb, 0.0);
  if (p == 2.0) {
    // Parseval: ||Delta_j f||_2^2 = sum w_j^2 |F|^2
    for (int c = 0; c < F.components(); ++c) {
      auto z = F.component(c);
      for (std::size_t i = 0; i < z.size(); ++i) {
        const double a2 = std::norm(z[i]);
        if (a2 == 0.0) continue;
        part.for_blocks(i, [&](int j, double w) { out[j - part.j_min()] += w * w * a2; });
      }
    }
    for (double& v : out) v = std::sqrt(v);
    return out;
  }
  for (int j = part.j_min(); j <= part.j_max(); ++j)
    out[j - part.j_min()] = lp_norm(inverse_transform_unchecked(block(F, j, part)), p);
  return out;
}

inline std::vector<double> block_norms(const RealField& f, double p, const DyadicPartition& part) {
  return block_norms(forward_transform(f), p, part);
}

/// Builds a report from unweighted block norms.
inline BesovReport assemble_report(std::span<const double> norms, const BesovParams& bp, const DyadicPartition& part) {
  validate(bp);
  BesovReport r;
  r.params = bp;
  r.j0 = part.j0();
  std::vector<double> all, lo, hi;
  for (int j = part.j_min(); j <= part.j_max(); ++j) {
    const double v = std::pow(2.0, bp.s * j) * norms[j - part.j_min()];
    r.blocks.push_back({j, v});
    all.push_back(v);
    if (j <= part.j0()) lo.push_back(v);
    if (j >= part.j0()) hi.push_back(v);
  }
  r.total = lq_sum(all, bp.q);
  r.low = lq_sum(lo, bp.q);
  r.high = lq_sum(hi, bp.q);
  return r;
}

/// Relative L^2 mass outside the resolved band, sqrt(sum (1 - w)^2 |F|^2) / ||F||.
inline double out_of_band_fraction(const SpectralCoeffs& F, const DyadicPartition& part) {
  double num = 0.0, den = 0.0;
  for (int c = 0; c < F.components(); ++c) {
    auto z = F.component(c);
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double a2 = std::norm(z[i]);
      const double r = 1.0 - part.total_weight(i);
      num += r * r * a2;
      den += a2;
    }
  }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

inline constexpr double kOutOfBandWarning = 1e-6;

inline BesovReport besov_norm(const SpectralCoeffs& F, const BesovParams& bp, const DyadicPartition& part) {
  validate(bp);
  auto norms = block_norms(F, bp.p, part);
  BesovReport r = assemble_report(norms, bp, part);
  const double oob = out_of_band_fraction(F, part);
  if (oob > kOutOfBandWarning)
    r.warnings.push_back("out-of-band L2 fraction " + std::to_string(oob) + " not seen by the resolved blocks");
  return r;
}

inline BesovReport besov_norm(const RealField& f, const BesovParams& bp, const DyadicPartition& part) {
  return besov_norm(forward_transform(f), bp, part);
}

/// Besov norm of x_k f (axis zero-based); carries the boundary-mass warning.
inline BesovReport weighted_besov_norm(const RealField& f, int axis, const BesovParams& bp, const DyadicPartition& part,
                                       double boundary_threshold = kDefaultBoundaryThreshold) {
  WeightedField w = coordinate_weight(f, axis, boundary_threshold);
  BesovReport r = besov_norm(w.field, bp, part);
  r.warnings.insert(r.warnings.begin(), w.warnings.begin(), w.warnings.end());
  return r;
}

enum class TimeNorm { tilde_linf, l1 };

//
// Per-snapshot block-norm tables for a uniformly sampled trajectory.
// Chemin-Lerner sums (sup in time per block, then sum) and L^1 integrals
// of the instantaneous norm are both evaluated from the table, so a run
// can be summarized without keeping its fields.
//
class BlockHistory {
 public:
  explicit BlockHistory(int j_min = 0) : j_min_(j_min) {}

  void push(double t, std::vector<double> norms) {
    if (!times_.empty() && !(t > times_.back())) throw InvalidArgument("history times must increase");
    times_.push_back(t);
    rows_.push_back(std::move(norms));
  }

  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& row(std::size_t n) const { return rows_[n]; }
  int j_min() const { return j_min_; }

  /// 2^{sj} restricted to a frequency window [lo_j, hi_j].
  double instant(std::size_t n, double s, double q, int lo_j, int hi_j) const {
    std::vector<double> v;
    for (std::size_t b = 0; b < rows_[n].size(); ++b) {
      const int j = j_min_ + static_cast<int>(b);
      if (j < lo_j || j > hi_j) continue;
      v.push_back(std::pow(2.0, s * j) * rows_[n][b]);
    }
    return lq_sum(v, q);
  }

  /// sum_j 2^{sj} sup_{t <= times[upto]} ||Delta_j f(t)||, blocks in [lo_j, hi_j], l^q over j.
  double tilde_linf(double s, double q, int lo_j, int hi_j, std::size_t upto) const {
    if (times_.empty()) throw InvalidArgument("empty time series");
    std::vector<double> v;
    for (std::size_t b = 0; b < rows_.front().size(); ++b) {
      const int j = j_min_ + static_cast<int>(b);
      if (j < lo_j || j > hi_j) continue;
      double m = 0.0;
      for (std::size_t n = 0; n <= upto; ++n) m = std::max(m, rows_[n][b]);
      v.push_back(std::pow(2.0, s * j) * m);
    }
    return lq_sum(v, q);
  }

  /// Trapezoid integral over [t_0, t_upto] of the instantaneous norm.
  double l1(double s, double q, int lo_j, int hi_j, std::size_t upto) const {
    if (times_.empty()) throw InvalidArgument("empty time series");
    double acc = 0.0;
    double prev = instant(0, s, q, lo_j, hi_j);
    for (std::size_t n = 1; n <= upto; ++n) {
      const double cur = instant(n, s, q, lo_j, hi_j);
      acc += 0.5 * (times_[n] - times_[n - 1]) * (prev + cur);
      prev = cur;
    }
    return acc;
  }

 private:
  int j_min_;
  std::vector<double> times_;
  std::vector<std::vector<double>> rows_;
};

/// Time-composite norm of a uniformly sampled series (step dt). A single
/// sample has no extent, so its L^1 norm is the instantaneous value times dt.
inline double time_composite_norms(std::span<const RealField> series, double dt, const BesovParams& bp,
                                   const DyadicPartition& part, TimeNorm mode) {
  validate(bp);
  if (series.empty()) throw InvalidArgument("empty time series");
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  BlockHistory h(part.j_min());
  for (std::size_t n = 0; n < series.size(); ++n) h.push(n * dt, block_norms(series[n], bp.p, part));
  const std::size_t last = series.size() - 1;
  if (mode == TimeNorm::tilde_linf) return h.tilde_linf(bp.s, bp.q, part.j_min(), part.j_max(), last);
  if (series.size() == 1) return dt * h.instant(0, bp.s, bp.q, part.j_min(), part.j_max());
  return h.l1(bp.s, bp.q, part.j_min(), part.j_max(), last);
}

}  // namespace bcns
