#include <gtest/gtest.h>

#include "cnsaudit/commutators.hpp"

using namespace cnsaudit;

namespace {

const auto kDisk = Domain<2>::disk({0.0, 0.0}, 1.0);
const double kInf = kInfinity;

GridPtr<2> static_box(std::size_t n) {
  GridShape<2> s;
  s.n_t = 1;
  s.n = {n, n};
  s.lo = {0.0, 0.0};
  s.hi = {1.0, 1.0};
  return make_grid(Grid<2>::over_box(s));
}

GridPtr<2> moving_box(std::size_t n, std::size_t n_t, double T) {
  GridShape<2> s;
  s.n_t = n_t;
  s.n = {n, n};
  s.t_end = T;
  s.lo = {0.0, 0.0};
  s.hi = {1.0, 1.0};
  return make_grid(Grid<2>::over_box(s));
}

template <class Fn>
SpaceTimeField<2> scalar(const GridPtr<2>& g, Fn fn) {
  return SpaceTimeField<2>::sample(g, 1, [&](const Point<2>& x, double t, std::span<double> o) { o[0] = fn(x, t); });
}

// Second moment int eta z_1^2 of the unit-mass 2-D bump at scale eps, by
// composite Gauss-Legendre in the radius.
double second_moment(double eps) {
  static const double gx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
  static const double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
  double num = 0.0, den = 0.0;
  const int sub = 200;
  for (int a = 0; a < sub; ++a)
    for (int i = 0; i < 4; ++i) {
      const double r = (a + 0.5 + 0.5 * gx[i]) / sub, w = 0.5 * gw[i] / sub;
      const double k = std::exp(-1.0 / (1.0 - r * r));
      num += w * r * r * r * k;
      den += w * r * k;
    }
  return 0.5 * eps * eps * num / den;
}

const auto kInfTriple = ExponentTriple::make(kInf, kInf, kInf);

}  // namespace

TEST(Commutators, ConstantDensityGivesZero) {
  auto g = moving_box(41, 25, 0.6);
  auto rho = scalar(g, [](auto, double) { return 1.7; });
  auto u = SpaceTimeField<2>::sample(g, 2, [](auto x, double t, std::span<double> o) {
    o[0] = std::sin(3 * x[0] + t);
    o[1] = std::cos(2 * x[1] - x[0] * t);
  });
  const auto spec = MollifierSpec::make(0.1);
  const auto exps = ExponentTriple::make(2, 4, 4);
  for (const auto& rep : commutator_interior(rho, u, spec, {Axis::time(), Axis::space(0), Axis::space(1)}, exps)) {
    EXPECT_LE(rep.lhs_norm, 1e-8);
    EXPECT_EQ(rep.rhs_bound, 0.0);
  }
  EXPECT_LE(commutator_product(rho, u, spec, exps).lhs_norm, 1e-8);
}

TEST(Commutators, InteriorMatchesMomentOracle) {
  // rho = x^2, u = x: (x^3)^eps - x^2 x^eps = 3 m2 x, so d_1 of it is 3 m2
  auto g = static_box(161);
  auto rho = scalar(g, [](auto x, double) { return x[0] * x[0]; });
  auto u = scalar(g, [](auto x, double) { return x[0]; });
  const double eps = 0.1;
  const auto reps =
      commutator_interior(rho, u, MollifierSpec::make(eps), {Axis::space(0), Axis::space(1)}, kInfTriple);
  EXPECT_NEAR(reps[0].lhs_norm, 3 * second_moment(eps), 1e-4 * 3 * second_moment(eps));
  EXPECT_LE(reps[1].lhs_norm, 1e-10);
  // rhs = sup|u| sup|d_1 rho| = 1 * 2
  EXPECT_NEAR(reps[0].rhs_bound, 2.0, 1e-12);
}

TEST(Commutators, ProductMatchesMomentOracle) {
  auto g = static_box(161);
  auto x1 = scalar(g, [](auto x, double) { return x[0]; });
  const double eps = 0.1;
  const auto rep = commutator_product(x1, x1, MollifierSpec::make(eps), kInfTriple);
  EXPECT_NEAR(rep.lhs_norm, second_moment(eps), 1e-4 * second_moment(eps));
  EXPECT_NEAR(rep.rhs_bound, 1.0, 1e-12);
}

TEST(Commutators, ShiftedMatchesTranslationOracle) {
  // rho = u = x_1: shifted defect is -s_1 x_1 + const, s the chart translation
  auto g = make_grid(Grid<2>::covering(kDisk, 161, 1, 0, 0));
  BoundaryChart<2> chart;
  chart.index = 3;
  chart.anchor = {std::cos(0.4), std::sin(0.4)};
  chart.radius = 0.6;
  chart.shift = chart.anchor;
  chart.shift_factor = 1.5;
  chart.eps_max = 0.2;
  auto x1 = scalar(g, [](auto x, double) { return x[0]; });
  const double eps = 0.06;
  const auto reps =
      commutator_shifted(x1, x1, MollifierSpec::make(eps), chart, {Axis::space(0), Axis::space(1)}, kInfTriple);
  const double s1 = chart.shift_factor * eps * chart.shift[0];
  EXPECT_NEAR(reps[0].lhs_norm, s1, 1e-3 * s1);
  EXPECT_LE(reps[1].lhs_norm, 1e-3 * s1);
  EXPECT_EQ(reps[0].chart, 3u);
  // rhs: sup|u| (sup|d_1 rho| + sup|grad rho|) = 1 * 2
  EXPECT_NEAR(reps[0].rhs_bound, 2.0, 1e-9);
}

TEST(Commutators, BilinearScaling) {
  auto g = moving_box(33, 17, 0.5);
  auto rho = scalar(g, [](auto x, double t) { return 1 + 0.3 * std::sin(4 * x[0] + 2 * x[1] + t); });
  auto u = scalar(g, [](auto x, double t) { return std::cos(3 * x[1] - t) + x[0]; });
  const auto spec = MollifierSpec::make(0.1);
  const auto exps = ExponentTriple::make(2, 4, 4);
  const auto base = commutator_interior(rho, u, spec, Axis::space(0), exps);
  auto u3 = u;
  for (double& v : u3.values()) v *= -3.0;
  const auto scaled = commutator_interior(rho, u3, spec, Axis::space(0), exps);
  EXPECT_NEAR(scaled.lhs_norm, 3 * base.lhs_norm, 1e-12 * base.lhs_norm);
  EXPECT_NEAR(scaled.ratio, base.ratio, 1e-12 * base.ratio);
  EXPECT_GT(base.lhs_norm, 0.0);
}

TEST(Commutators, SmoothDataDecaysWithScale) {
  auto g = moving_box(97, 49, 0.5);
  auto rho = scalar(g, [](auto x, double t) { return 1 + 0.3 * std::sin(4 * x[0] + 2 * x[1] + t); });
  auto u = SpaceTimeField<2>::sample(g, 2, [](auto x, double t, std::span<double> o) {
    o[0] = std::cos(3 * x[1] - t);
    o[1] = x[0] * x[1];
  });
  const auto exps = ExponentTriple::make(2, 4, 4);
  std::vector<double> lhs;
  for (double eps : {0.16, 0.08, 0.04}) {
    const auto reps = commutator_interior(rho, u, MollifierSpec::make(eps), {Axis::time(), Axis::space(0)}, exps);
    for (const auto& r : reps) EXPECT_LE(r.ratio, 1.0);
    lhs.push_back(reps[1].lhs_norm);
  }
  EXPECT_TRUE(strictly_decreasing(lhs));
  // second order in eps for smooth data
  EXPECT_GT(lhs[1] / lhs[2], 3.0);
}

TEST(Commutators, CsvColumnsAndErrors) {
  CommutatorReport r;
  r.eps = 0.1;
  r.axis = Axis::space(1);
  r.lhs_norm = 1;
  r.rhs_bound = 4;
  r.finish();
  const auto csv = commutator_csv({r}).str();
  EXPECT_NE(csv.find("eps,axis,r,r1,r2,lhs_norm,rhs_bound,ratio"), std::string::npos);
  EXPECT_NE(csv.find("0.1,x2,2,4,4,1,4,0.25"), std::string::npos);

  auto g = static_box(21);
  auto v = SpaceTimeField<2>::sample(g, 2, [](auto, double, std::span<double> o) { o[0] = o[1] = 1; });
  try {
    commutator_product(v, v, MollifierSpec::make(0.2), ExponentTriple{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
  }
}
