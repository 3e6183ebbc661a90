#include <gtest/gtest.h>

#include "bcns/picard.hpp"

using namespace bcns;

namespace {
CNSParams params() { return {1.0, 0.5, PressureLaw::gamma_law(1.4)}; }
GridSpec grid() { return make_grid(2, 64, 6.0 * pi); }
}  // namespace

TEST(Picard, ZeroDataStaysZero) {
  const GridSpec g = grid();
  PicardOptions o;
  o.horizon = 0.05;
  o.dt = 5e-3;
  o.axes = {0, 1};
  PicardResult r = picard_iterate_weighted({RealField(g), RealField(g, 2)}, params(), o);
  EXPECT_EQ(r.status, PicardStatus::converged);
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.trace.total[0], 0.0);
  EXPECT_FALSE(r.trace.ratio(0).has_value());
  for (const auto& a : r.limit().a.values()) EXPECT_EQ(lp_norm(a, kInfinity), 0.0);
  for (const auto& w : r.limit().weighted) EXPECT_EQ(lp_norm(w.U.back(), kInfinity), 0.0);
}

TEST(Picard, DataTruncation) {
  const GridSpec g = grid();
  const auto part = DyadicPartition::clamped(g, 0);
  FluidState s = hermite_state(g, 0.05, 1.0);
  EXPECT_EQ(lp_norm(truncate_data(s.a, part.j_max() + 1, part) - s.a, kInfinity), 0.0);
  // frequencies below the band survive every truncation
  const RealField low = truncate_data(s.a, part.j_min() - 3, part);
  EXPECT_LT(lp_norm(low, 2), 0.5 * lp_norm(s.a, 2));
  double prev = 0.0;
  for (int n = part.j_min(); n <= part.j_max(); ++n) {
    const double e = lp_norm(truncate_data(s.a, n, part), 2);
    EXPECT_GE(e, prev - 1e-14);
    prev = e;
  }
}

TEST(Picard, ContractsAndMatchesDirectSolver) {
  const GridSpec g = grid();
  FluidState s = hermite_state(g, 0.05, 2.5);
  PicardOptions o;
  o.horizon = 0.2;
  o.dt = 2e-3;
  PicardResult r = picard_iterate({s.a, s.u}, params(), o);
  EXPECT_EQ(r.status, PicardStatus::converged);
  for (std::size_t n = 2; n < r.trace.size(); ++n) EXPECT_LE(*r.trace.ratio(n), 0.9) << "n = " << n;
  EXPECT_LE(r.trace.total.back(), 1e-6);
  auto c = compare_with_direct(r.limit(), {s.a, s.u}, params(), o);
  EXPECT_LE(c.a, 1e-4);
  EXPECT_LE(c.u, 1e-4);
}

TEST(Picard, NonConvergenceIsReported) {
  // a long horizon with large data: the lagged pressure term makes the map expansive
  const GridSpec g = make_grid(2, 32, 4.0 * pi);
  FluidState s = hermite_state(g, 0.3, 1.0);
  PicardOptions o;
  o.horizon = 4.0;
  o.dt = 1e-2;
  o.n_max = 12;
  PicardResult r = picard_iterate({s.a, s.u}, params(), o);
  EXPECT_NE(r.status, PicardStatus::converged);
  EXPECT_EQ(r.trace.size(), static_cast<std::size_t>(r.iterations));
}

TEST(PicardWeighted, ConsistentWithUnweightedIterates) {
  // S_n kernels decay slowly, so the data spectrum sits where every S_n (n >= 0) is 1
  // and the truncated data stay localized away from the periodic seam
  const GridSpec g = make_grid(2, 64, 12.0 * pi);
  FluidState s = hermite_state(g, 0.05, 5.0);
  PicardOptions o;
  o.horizon = 0.2;
  o.dt = 4e-3;
  o.axes = {1};
  o.keep_sequence = true;
  PicardResult r = picard_iterate_weighted({s.a, s.u}, params(), o);
  EXPECT_EQ(r.status, PicardStatus::converged);
  for (const PicardIterate& it : r.sequence) {
    for (std::size_t i = 0; i < it.a.size(); i += 10) {
      const RealField xa = coordinate_weight(it.a[i], 1, kInfinity).field;
      const RealField xu = coordinate_weight(it.u[i], 1, kInfinity).field;
      const double na = lp_norm(xa, 2), nu = lp_norm(xu, 2);
      if (na > 0.0) EXPECT_LE(lp_norm(it.weighted[0].A[i] - xa, 2) / na, 1e-4);
      if (nu > 0.0) EXPECT_LE(lp_norm(it.weighted[0].U[i] - xu, 2) / nu, 1e-4);
    }
  }
}

TEST(PicardWeighted, SeedEquationSign) {
  const GridSpec g = grid();
  FluidState s = hermite_state(g, 0.05, 2.5);
  for (int k : {0, 1}) {
    SeedResidual r = seed_residual(s.u, k, params(), 0.1);
    EXPECT_LE(r.derived, 1e-8);
    EXPECT_GT(r.printed, 1e-2);
  }
}
