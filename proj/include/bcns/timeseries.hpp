#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "bcns/error.hpp"

namespace bcns {

//
// Uniformly sampled trajectory t_n = t0 + n dt. at(t) interpolates with
// the cubic Lagrange polynomial through the four nearest samples (linear
// when fewer than four exist), which keeps RK4 stages fourth-order accurate
// when the solver steps on the sample grid.
//
template <class T>
class TimeSeries {
 public:
  TimeSeries() = default;
  TimeSeries(double t0, double dt) : t0_(t0), dt_(dt) {
    if (!(dt > 0.0)) throw InvalidArgument("sample spacing must be positive");
  }

  void push(T v) { values_.push_back(std::move(v)); }

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double t0() const { return t0_; }
  double dt() const { return dt_; }
  double time(std::size_t n) const { return t0_ + static_cast<double>(n) * dt_; }
  double t_end() const { return time(values_.size() - 1); }
  const T& operator[](std::size_t n) const { return values_[n]; }
  T& operator[](std::size_t n) { return values_[n]; }
  const T& back() const { return values_.back(); }
  const std::vector<T>& values() const { return values_; }
  std::vector<T>& values() { return values_; }

  T at(double t) const {
    if (values_.empty()) throw InvalidArgument("empty time series");
    const double x = (t - t0_) / dt_;
    const double last = static_cast<double>(values_.size() - 1);
    if (x < -1e-9 || x > last + 1e-9) throw InvalidArgument("time outside the sampled interval");
    const double r = std::round(x);
    if (std::abs(x - r) < 1e-9) return values_[static_cast<std::size_t>(std::clamp(r, 0.0, last))];
    if (values_.size() == 1) return values_[0];
    if (values_.size() < 4) {
      const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(x), values_.size() - 2);
      const double w = x - static_cast<double>(i);
      T out = values_[i];
      out *= (1.0 - w);
      out.axpy(w, values_[i + 1]);
      return out;
    }
    std::size_t i0 = static_cast<std::size_t>(std::floor(x));
    i0 = i0 >= 1 ? i0 - 1 : 0;
    i0 = std::min(i0, values_.size() - 4);
    T out = values_[i0];
    for (int a = 0; a < 4; ++a) {
      double w = 1.0;
      for (int b = 0; b < 4; ++b)
        if (b != a) w *= (x - static_cast<double>(i0 + b)) / static_cast<double>(a - b);
      if (a == 0)
        out *= w;
      else
        out.axpy(w, values_[i0 + a]);
    }
    return out;
  }

 private:
  double t0_ = 0.0;
  double dt_ = 1.0;
  std::vector<T> values_;
};

}  // namespace bcns
