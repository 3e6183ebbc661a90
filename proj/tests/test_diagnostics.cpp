#include <gtest/gtest.h>

#include "bcns/diagnostics.hpp"

using namespace bcns;

TEST(Diagnostics, CriticalExponent) {
  EXPECT_DOUBLE_EQ(s0_exponent(3, 2.0), 1.5);
  EXPECT_DOUBLE_EQ(s0_exponent(2, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(s0_exponent(3, 3.0), 0.5);
}

TEST(Diagnostics, LatticeEndpoints) {
  DiagnosticsAccumulator acc(make_grid(3, 16, 4.0 * pi), {2.0, 0, 0.1, 0.25, {}});
  const auto& s = acc.s_lattice();
  EXPECT_NEAR(s.front(), 0.1 - 1.5, 1e-14);
  EXPECT_DOUBLE_EQ(s.back(), 2.5);
  for (std::size_t i = 1; i + 1 < s.size(); ++i) EXPECT_NEAR(s[i] - s[i - 1], 0.25, 1e-12);
}

TEST(Diagnostics, ZeroHistory) {
  const GridSpec g = make_grid(2, 32, 4.0 * pi);
  DiagnosticsAccumulator acc(g, {});
  for (int n = 0; n < 4; ++n) acc.push(FluidState{RealField(g), RealField(g, 2), {}, 0.5 * n});
  for (const auto& r : acc.record().rows)
    for (double v : r) EXPECT_EQ(v, 0.0);
  for (const auto& [k, v] : acc.record().initial) EXPECT_EQ(v, 0.0) << k;
}

TEST(Diagnostics, StationaryFieldMatchesBesovReports) {
  // frozen snapshot: tilde-L^inf norm = instantaneous norm, L^1 norm = T times it
  const GridSpec g = make_grid(2, 64, 6.0 * pi);
  FluidState s = hermite_state(g, 0.05, 1.0);
  DiagnosticsOptions o;
  o.j0 = -1;
  DiagnosticsAccumulator acc(g, o);
  const double T = 2.0;
  for (int n = 0; n <= 8; ++n) {
    s.t = T * n / 8.0;
    acc.push(s);
  }
  const auto& part = acc.partition();
  const auto& r = acc.record();
  auto rep = [&](const RealField& f, double sv, double q = 1.0) { return besov_norm(f, {sv, 2.0, q}, part); };
  EXPECT_NEAR(r.series("Y.low_linf").back(), rep(s.a, 0.0).low + rep(s.u, 0.0).low, 1e-12);
  EXPECT_NEAR(r.series("Y.a_high_l1").back(), T * rep(s.a, 2.0).high, 1e-10);
  EXPECT_NEAR(r.series("Y.u_high_l1").back(), T * rep(s.u, 3.0).high, 1e-10);
  EXPECT_NEAR(r.series("X.u_high_linf").back(), rep(s.u, 0.0).high, 1e-12);
  const auto wa = weighted_besov_norm(s.a, 1, {1.0, 2.0, 1.0}, part, kInfinity);
  const auto wu = weighted_besov_norm(s.u, 1, {1.0, 2.0, 1.0}, part, kInfinity);
  EXPECT_NEAR(r.series("S.w1.low_linf").back(), wa.low + wu.low, 1e-12);
  // D.low: max over the lattice of <T>^{(s0+s)/2} ||(a,u)||^l_{B^s}
  double dl = 0.0;
  for (double sv : acc.s_lattice())
    dl = std::max(dl, std::pow(japanese(T), 0.5 * (1.0 + sv)) * (rep(s.a, sv).low + rep(s.u, sv).low));
  EXPECT_NEAR(r.series("D.low").back(), dl, 1e-12 * dl);
  // S0 contains the negative-index sup norm
  const double neg = rep(s.a, -1.0, kInfinity).total + rep(s.u, -1.0, kInfinity).total;
  EXPECT_NEAR(r.initial.at("neg_besov"), neg, 1e-14);
  EXPECT_GT(r.initial.at("S0"), neg);
}

TEST(Diagnostics, MonotoneAlongTrajectory) {
  const GridSpec g = make_grid(2, 32, 4.0 * pi);
  const CNSParams p{1.0, 0.5, PressureLaw::gamma_law(1.4)};
  DiagnosticsAccumulator acc(g, {});
  evolve(hermite_state(g, 0.05, 1.0), p, {1.0, 0.02, 5}, [&](const FluidState& x) { acc.push(x); });
  const auto& r = acc.record();
  ASSERT_EQ(r.rows.size(), 11u);
  for (std::size_t c = 0; c < r.names.size(); ++c)
    for (std::size_t n = 1; n < r.rows.size(); ++n) {
      EXPECT_GE(r.rows[n][c], r.rows[n - 1][c]) << r.names[c];
      EXPECT_GE(r.rows[n][c], 0.0);
    }
  EXPECT_EQ(r.decay.size(), r.rows.size());
}
