#include <gtest/gtest.h>

#include "cnsaudit/cutoffs.hpp"

using namespace cnsaudit;

namespace {

const auto kDisk = Domain<2>::disk({0.0, 0.0}, 1.0);

}  // namespace

TEST(SpatialCutoff, PlateauAndMidpoint) {
  const auto phi = build_spatial_cutoff(kDisk, 0.1);
  EXPECT_EQ(phi.value({0.5, 0.0}), 1.0);
  EXPECT_EQ(norm(phi.gradient({0.5, 0.0})), 0.0);
  EXPECT_NEAR(phi.value({0.95, 0.0}), 0.5, 1e-12);
  EXPECT_EQ(phi.value({1.0, 0.0}), 0.0);
  // analytic gradient: chi'(1/2)/delta = 1.5/0.1 pointing inward
  const auto g = phi.gradient({0.0, 0.95});
  EXPECT_NEAR(g[0], 0.0, 1e-12);
  EXPECT_NEAR(g[1], -15.0, 1e-10);
}

TEST(SpatialCutoff, GradientMatchesFiniteDifferences) {
  const auto phi = build_spatial_cutoff(kDisk, 0.2);
  for (double th : {0.1, 1.3, 2.9, 4.4}) {
    const Point<2> x{0.87 * std::cos(th), 0.87 * std::sin(th)};
    const auto g = phi.gradient(x);
    for (std::size_t k = 0; k < 2; ++k) {
      Point<2> p = x, m = x;
      p[k] += 1e-6;
      m[k] -= 1e-6;
      EXPECT_NEAR(g[k], (phi.value(p) - phi.value(m)) / 2e-6, 1e-6);
    }
  }
}

TEST(SpatialCutoff, ConstraintSweepOnDisk) {
  const auto g = Grid<2>::covering(kDisk, 257, 1, 0, 0);
  for (double d : {0.1, 0.05, 0.02}) {
    const double m = build_spatial_cutoff(kDisk, d).max_grad_times_dist(g);
    EXPECT_LE(m, 2.0);
    EXPECT_LE(m, 8.0 / 9.0 + 1e-12);  // sup of 6 s^2 (1 - s)
  }
  const auto csv = cutoff_sweep(g, {0.1, 0.05}).str();
  EXPECT_NE(csv.find("delta,max_grad_times_dist,pass"), std::string::npos);
}

TEST(SpatialCutoff, PointwiseConvergenceToOne) {
  const Point<2> x{0.3, 0.85};  // dist ~ 0.0986
  double prev = -1.0;
  for (double d : {0.4, 0.2, 0.1, 0.05, 0.02}) {
    const double v = build_spatial_cutoff(kDisk, d).value(x);
    EXPECT_GE(v, prev);
    prev = v;
  }
  EXPECT_EQ(prev, 1.0);
}

TEST(SpatialCutoff, DeltaTooLarge) {
  try {
    build_spatial_cutoff(kDisk, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DeltaTooLarge);
  }
}

TEST(TemporalWeight, TrapezoidShape) {
  const auto w = TemporalWeight::trapezoid(0.1, 0.05, 0.8, 1.0);
  EXPECT_EQ(w.value(0.5), 1.0);
  EXPECT_NEAR(w.value(0.125), 0.5, 1e-12);
  EXPECT_EQ(w.value(0.05), 0.0);
  EXPECT_EQ(w.value(0.9), 0.0);
  EXPECT_NEAR(w.value(0.825), 0.5, 1e-12);
  EXPECT_NEAR(w.derivative(0.12), 20.0, 1e-12);
  EXPECT_NEAR(w.derivative(0.83), -20.0, 1e-12);
}

TEST(TemporalWeight, SmoothSupportAndRegularity) {
  const auto w = TemporalWeight::smooth(0.1, 1.0);
  const auto sup = w.support();
  EXPECT_GT(sup[0], 0.1);
  EXPECT_LT(sup[1], 0.9);
  EXPECT_EQ(w.value(0.5), 1.0);
  for (double t = 0.0; t <= 1.0; t += 1e-3) {
    // C^1: derivative against a centered difference
    EXPECT_NEAR(w.derivative(t), (w.value(t + 1e-7) - w.value(t - 1e-7)) / 2e-7, 1e-5);
    if (t < sup[0] || t > sup[1]) { EXPECT_EQ(w.value(t), 0.0); }
  }
}

TEST(TemporalWeight, DerivativeIntegratesToZero) {
  for (const auto& w : {TemporalWeight::smooth(0.1, 1.0), TemporalWeight::trapezoid(0.1, 0.05, 0.8, 1.0)}) {
    const auto t = grid_times(17, 0.0, 1.0 / 16);
    const auto q = w.quadrature(t, true);
    double s = 0.0;
    for (double v : q) s += v;
    EXPECT_NEAR(s, 0.0, 1e-13);
  }
}

TEST(TemporalWeight, QuadratureExactForInterpolant) {
  // int psi(t) t dt for the trapezoid by closed form: linear data is its own interpolant
  const double tau = 0.1, a = 0.05, t0 = 0.8;
  const auto w = TemporalWeight::trapezoid(tau, a, t0, 1.0);
  const auto t = grid_times(13, 0.0, 1.0 / 12);
  const auto q = w.quadrature(t, false);
  double got = 0.0;
  for (std::size_t n = 0; n < t.size(); ++n) got += q[n] * t[n];
  // ramps contribute int ((t - tau)/a) t dt etc.
  const double up = (std::pow(tau + a, 3) - std::pow(tau, 3)) / (3 * a) - tau * ((tau + a) * (tau + a) - tau * tau) / (2 * a);
  const double flat = (t0 * t0 - (tau + a) * (tau + a)) / 2;
  const double down = (t0 + a) * ((t0 + a) * (t0 + a) - t0 * t0) / (2 * a) - (std::pow(t0 + a, 3) - std::pow(t0, 3)) / (3 * a);
  EXPECT_NEAR(got, up + flat + down, 1e-14);
  // derivative weights against linear data: -(avg over rising ramp... ) = (1/a)int_up t - (1/a)int_down t
  const auto qd = w.quadrature(t, true);
  double gd = 0.0;
  for (std::size_t n = 0; n < t.size(); ++n) gd += qd[n] * t[n];
  EXPECT_NEAR(gd, (tau + a / 2) - (t0 + a / 2), 1e-14);
}

TEST(TemporalWeight, RampLimitRecoversPointValue) {
  // (1/alpha) int_{t0}^{t0+alpha} g -> g(t0), monotone error decay
  const double t0 = 0.6;
  auto g = [](double t) { return std::exp(2 * t) + t * t; };
  const auto t = grid_times(4097, 0.0, 1.0 / 4096);
  std::vector<double> samples;
  for (double v : t) samples.push_back(g(v));
  double prev = 1e300;
  for (double a : {0.1, 0.05, 0.025}) {
    const auto w = TemporalWeight::trapezoid(0.1, a, t0, 1.0);
    const auto q = w.quadrature(t, true);
    double down = 0.0;  // minus the falling-ramp average
    for (std::size_t n = 0; n < t.size(); ++n)
      if (t[n] > 0.5) down += q[n] * samples[n];
    const double err = std::abs(-down - g(t0));
    EXPECT_LT(err, prev);
    prev = err;
  }
}

TEST(TemporalWeight, BadWindow) {
  EXPECT_THROW(TemporalWeight::smooth(0.6, 1.0), Error);
  EXPECT_THROW(TemporalWeight::trapezoid(0.1, 0.5, 0.5, 1.0), Error);
  EXPECT_THROW(TemporalWeight::trapezoid(0.1, 0.05, 0.98, 1.0), Error);
}
