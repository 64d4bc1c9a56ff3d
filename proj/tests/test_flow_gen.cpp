#include <gtest/gtest.h>

#include "cnsaudit/flow_gen.hpp"

using namespace cnsaudit;

namespace {

SolverConfig config(InitialCondition ic, std::size_t N, double T) {
  SolverConfig c;
  c.params = FluidParams::make(1.4, 0.01, 0.0);
  c.N = N;
  c.T = T;
  c.initial = ic;
  return c;
}

GridPtr<2> unit_box(std::size_t n, std::size_t n_t, double T) {
  GridShape<2> s;
  s.n_t = n_t;
  s.n = {n, n};
  s.t_end = T;
  s.lo = {0.0, 0.0};
  s.hi = {1.0, 1.0};
  return make_grid(Grid<2>::over_box(s));
}

}  // namespace

TEST(FlowGen, RestIsAFixedPoint) {
  const auto run = solve(config(InitialCondition::Rest, 16, 0.2));
  for (double v : run.rho.values()) EXPECT_EQ(v, 1.0);
  for (double v : run.u.values()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(run.meta.mass_drift, 0.0);
}

TEST(FlowGen, MassIsConservedAndWallsStayAtRest) {
  for (auto ic : {InitialCondition::Swirl, InitialCondition::Bump}) {
    const auto run = solve(config(ic, 32, 0.2));
    EXPECT_LT(run.meta.mass_drift, 1e-10);
    EXPECT_EQ(run.meta.steps % run.meta.outputs, 0u);
    EXPECT_NEAR(run.meta.dt * static_cast<double>(run.meta.steps), 0.2, 1e-12);
    const auto& g = run.u.grid();
    for (std::size_t n = 0; n < g.n_t(); ++n)
      for (std::size_t s = 0; s < g.num_space(); ++s) {
        const auto x = g.point(s);
        if (x[0] == 0.0 || x[1] == 0.0 || x[0] == 1.0 || x[1] == 1.0) {
          EXPECT_EQ(run.u(n, s, 0), 0.0);
          EXPECT_EQ(run.u(n, s, 1), 0.0);
        }
      }
  }
}

TEST(FlowGen, SwirlEnergyDecaysWithoutForcing) {
  auto cfg = config(InitialCondition::Swirl, 32, 0.5);
  const auto run = solve(cfg);
  const auto ledger = energy_and_dissipation(run.rho, run.u, cfg.params);
  // E(0) = 1/2 int |u0|^2 + int rho^gamma / (gamma - 1) = kinetic + 2.5
  EXPECT_GT(ledger.E.front(), 2.5);
  EXPECT_LT(ledger.E.back(), ledger.E.front());
  // E(0) - E(T) tracks the cumulative dissipation on this grid
  const double lost = ledger.E.front() - ledger.E.back();
  EXPECT_NEAR(lost, ledger.D.back(), 0.05 * ledger.D.back());
}

TEST(FlowGen, SwirlEnergyBalanceConvergesUnderRefinement) {
  std::vector<double> hs, defects;
  for (std::size_t N : {32, 64}) {
    auto cfg = config(InitialCondition::Swirl, N, 0.5);
    const auto run = solve(cfg);
    const auto ledger = energy_and_dissipation(run.rho, run.u, cfg.params);
    hs.push_back(1.0 / static_cast<double>(N));
    defects.push_back(std::abs(ledger.E.back() + ledger.D.back() - ledger.E.front()));
  }
  EXPECT_GE(loglog_slope(hs, defects), 0.9);
}

TEST(FlowGen, PackRoundTrip) {
  const auto run = solve(config(InitialCondition::Bump, 8, 0.05));
  const auto packed = pack_flow(run.rho, run.u);
  ASSERT_EQ(packed.components(), 3u);
  const auto [rho, u] = unpack_flow(packed);
  EXPECT_EQ(rho.values(), run.rho.values());
  EXPECT_EQ(u.values(), run.u.values());
  EXPECT_THROW(unpack_flow(run.u), Error);
}

TEST(FlowGen, RejectsUnstableStep) {
  auto cfg = config(InitialCondition::Swirl, 16, 0.1);
  cfg.dt = 10 * stable_step(cfg);
  try {
    solve(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

TEST(FlowGen, DensityFloorAndBlowup) {
  // a strong bump with a floor above its trough
  auto cfg = config(InitialCondition::Bump, 16, 0.3);
  cfg.density_floor = 0.999;
  try {
    solve(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DensityFloorBreach);
  }
  // an inviscid run at the viscous step bound with a huge CFL goes non-finite
  auto wild = config(InitialCondition::Swirl, 16, 2.0);
  wild.cfl = 40.0;
  wild.density_floor = -kInfinity;
  try {
    solve(wild);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Blowup);
  }
}

TEST(FlowGen, ManufacturedFamiliesMatchTheirDerivatives) {
  const auto box = Domain<2>::box({0.0, 0.0}, {1.0, 1.0});
  const Point<2> x{0.31, 0.67};
  const double t = 0.4, h = 1e-6;
  for (std::string id : {"constant", "affine", "trig", "trig(3)", "boundary-bump", "random"}) {
    const auto m = manufactured_family<2>(id, box, 7);
    const auto gr = m.grad_rho(x, t);
    const auto gu = m.grad_u(x, t);
    for (std::size_t k = 0; k < 2; ++k) {
      Point<2> xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      EXPECT_NEAR(gr[k], (m.rho(xp, t) - m.rho(xm, t)) / (2 * h), 1e-6) << id;
      for (std::size_t j = 0; j < 2; ++j)
        EXPECT_NEAR(gu[j][k], (m.u(xp, t)[j] - m.u(xm, t)[j]) / (2 * h), 1e-6) << id;
    }
  }
  EXPECT_EQ(manufactured_family<2>("boundary-bump", box).u({0.0, 0.4}, 0.2)[0], 0.0);
  EXPECT_EQ(manufactured_family<2>("random", box, 3).rho(x, t), manufactured_family<2>("random", box, 3).rho(x, t));
  EXPECT_NE(manufactured_family<2>("random", box, 3).rho(x, t), manufactured_family<2>("random", box, 4).rho(x, t));
  try {
    manufactured_family<2>("spiral", box);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownFamily);
  }
  EXPECT_THROW(manufactured_family<2>("trig(0)", box), Error);
}

TEST(FlowGen, RandomDensityStaysPositive) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto [rho, u] = manufactured_field<2>("random", unit_box(21, 5, 1.0), seed);
    (void)u;
    for (double v : rho.values()) EXPECT_GE(v, 0.5);
  }
}

TEST(FlowGen, GradientOfTrigConvergesAtSecondOrder) {
  std::vector<double> hs, errs;
  for (std::size_t n : {33, 65, 129}) {
    auto g = unit_box(n, 1, 0.0);
    const auto m = manufactured_family<2>("trig", g->domain());
    const auto [rho, u] = manufactured_field<2>("trig", g);
    (void)rho;
    const auto du = gradient(u);
    std::vector<double> sq(g->num_space());
    for (std::size_t s = 0; s < g->num_space(); ++s) {
      const auto exact = m.grad_u(g->point(s), 0.0);
      double e = 0.0;
      for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t k = 0; k < 2; ++k) e = std::max(e, std::abs(du(0, s, j * 2 + k) - exact[j][k]));
      sq[s] = e;
    }
    hs.push_back(1.0 / static_cast<double>(n - 1));
    errs.push_back(pairwise_max(sq));
  }
  EXPECT_GE(loglog_slope(hs, errs), 1.9);
}
