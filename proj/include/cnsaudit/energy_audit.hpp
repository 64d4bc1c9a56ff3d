#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "cnsaudit/csv.hpp"
#include "cnsaudit/cutoffs.hpp"
#include "cnsaudit/mollify.hpp"

namespace cnsaudit {

/// Pressure law P = rho^gamma and viscosities of the isentropic system.
struct FluidParams {
  double gamma = 1.4;
  double mu = 0.01;
  double lambda = 0.0;

  static FluidParams make(double gamma, double mu, double lambda) {
    if (!(gamma > 1.0)) throw Error(ErrorCode::InvalidArgument, "gamma must exceed 1");
    if (!(mu > 0.0)) throw Error(ErrorCode::InvalidArgument, "mu must be positive");
    if (!(lambda + 2.0 / 3.0 * mu >= -1e-14 * mu)) throw Error(ErrorCode::InvalidArgument, "lambda + 2mu/3 must be >= 0");
    return FluidParams{gamma, mu, lambda};
  }

  double pressure(double rho) const { return std::pow(rho, gamma); }
};

namespace detail {

// Negative density beyond round-off is an error; the rest is truncated to 0.
template <std::size_t Dim>
double density_tolerance(const SpaceTimeField<Dim>& rho) {
  double m = 0.0;
  for (double v : rho.values()) m = std::max(m, std::abs(v));
  return 1e-12 * std::max(1.0, m);
}

inline double clamp_density(double r, double tol) {
  if (r < -tol) throw Error(ErrorCode::NegativeDensity, "density " + std::to_string(r) + " is negative");
  return r > 0.0 ? r : 0.0;
}

template <std::size_t Dim>
void require_flow(const SpaceTimeField<Dim>& rho, const SpaceTimeField<Dim>& u) {
  if (rho.components() != 1) throw Error(ErrorCode::ShapeMismatch, "density must be scalar");
  if (u.components() != Dim) throw Error(ErrorCode::ShapeMismatch, "velocity must have Dim components");
  if (rho.grid().num_nodes() != u.grid().num_nodes()) throw Error(ErrorCode::ShapeMismatch, "fields on different grids");
}

// Spatial integrals of one slice: kinetic + internal energy and dissipation rate.
template <std::size_t Dim>
std::array<double, 2> slice_energy(const SpaceTimeField<Dim>& rho, const SpaceTimeField<Dim>& u, std::size_t n,
                                   const FluidParams& prm, double tol) {
  const Grid<Dim>& g = rho.grid();
  const SpaceTimeField<Dim> us = u.slice(n);
  const SpaceTimeField<Dim> gu = gradient(us);
  const SpaceTimeField<Dim> du = divergence(us);
  std::vector<double> e, d;
  e.reserve(g.num_space());
  d.reserve(g.num_space());
  for (std::size_t s = 0; s < g.num_space(); ++s) {
    if (!g.masked(s)) continue;
    const double w = g.weight(s);
    const double r = clamp_density(rho(n, s), tol);
    double u2 = 0.0, g2 = 0.0;
    for (std::size_t a = 0; a < Dim; ++a) u2 += u(n, s, a) * u(n, s, a);
    for (std::size_t c = 0; c < Dim * Dim; ++c) g2 += gu(0, s, c) * gu(0, s, c);
    const double dv = du(0, s);
    e.push_back(w * (0.5 * r * u2 + prm.pressure(r) / (prm.gamma - 1.0)));
    d.push_back(w * (prm.mu * g2 + (prm.mu + prm.lambda) * dv * dv));
  }
  return {pairwise_sum(e), pairwise_sum(d)};
}

}  // namespace detail

/// E(t_n), the dissipation rate d(t_n) and the cumulative D(t_n).
struct EnergyLedger {
  std::vector<double> t;
  std::vector<double> E;
  std::vector<double> rate;
  std::vector<double> D;

  CsvTable csv() const {
    CsvTable out({"t", "E", "D"});
    for (std::size_t n = 0; n < t.size(); ++n) out.row().add(t[n]).add(E[n]).add(D[n]);
    return out;
  }
};

/// Trapezoid in space on the closed mask, cumulative trapezoid in time.
/// Gradients use the same central / one-sided stencils as everywhere else.
template <std::size_t Dim>
EnergyLedger energy_and_dissipation(const SpaceTimeField<Dim>& rho, const SpaceTimeField<Dim>& u,
                                    const FluidParams& prm) {
  detail::require_flow(rho, u);
  const Grid<Dim>& g = rho.grid();
  const double tol = detail::density_tolerance(rho);
  EnergyLedger out;
  for (std::size_t n = 0; n < g.n_t(); ++n) {
    const auto [e, d] = detail::slice_energy(rho, u, n, prm, tol);
    out.t.push_back(g.time(n));
    out.E.push_back(e);
    out.rate.push_back(d);
    out.D.push_back(n == 0 ? 0.0 : out.D.back() + 0.5 * g.dt() * (out.rate[n - 1] + d));
  }
  return out;
}

/// The six tested terms; R is their sum.
struct M3Terms {
  std::array<double, 6> T{};

  double residual() const { return T[0] + T[1] + T[2] + T[3] + T[4] + T[5]; }
  double boundary_production() const { return std::abs(T[1]) + std::abs(T[3]) + std::abs(T[5]); }
};

namespace detail {

template <std::size_t Dim>
struct TestWeights {
  std::vector<double> q;   // int psi  l_n dt
  std::vector<double> dq;  // int psi' l_n dt
  typename SpatialCutoff<Dim>::Samples phi;
};

template <std::size_t Dim>
TestWeights<Dim> test_weights(const Grid<Dim>& g, const SpatialCutoff<Dim>& cutoff, const TemporalWeight& weight) {
  if (g.n_t() < 2) throw Error(ErrorCode::BadWindow, "tested terms need a time axis");
  const auto times = grid_times(g);
  return {weight.quadrature(times, false), weight.quadrature(times, true), cutoff.sample(g)};
}

// T1..T6 with the velocity in the tested slot replaced by v:
//   T1 = -1/2 int psi' phi rho |v|^2        T2 = -1/2 int psi rho (u.grad phi) |v|^2
//   T3 = -int psi phi P div v               T4 = -int psi P v.grad phi
//   T5 = int psi phi (mu |grad v|^2 + (mu+lambda)(div v)^2)
//   T6 = int psi (mu d_k phi v_j d_k v_j + (mu+lambda)(v.grad phi) div v)
// With v = u these are the limit terms; the sum vanishes for a smooth solution.
template <std::size_t Dim>
M3Terms tested_terms(const SpaceTimeField<Dim>& rho, const SpaceTimeField<Dim>& u, const SpaceTimeField<Dim>& v,
                     const FluidParams& prm, const TestWeights<Dim>& tw) {
  const Grid<Dim>& g = rho.grid();
  const double tol = density_tolerance(rho);
  std::array<std::vector<double>, 6> acc;
  for (std::size_t n = 0; n < g.n_t(); ++n) {
    const double q = tw.q[n], dq = tw.dq[n];
    if (q == 0.0 && dq == 0.0) continue;
    const SpaceTimeField<Dim> vs = v.slice(n);
    const SpaceTimeField<Dim> gv = gradient(vs);
    const SpaceTimeField<Dim> dv = divergence(vs);
    for (std::size_t s = 0; s < g.num_space(); ++s) {
      const double w = g.weight(s);
      const double phi = tw.phi.phi[s];
      const Point<Dim>& dphi = tw.phi.grad[s];
      if (w == 0.0 || (phi == 0.0 && norm(dphi) == 0.0)) continue;
      if (!rho.valid(n, s) || !u.valid(n, s) || !vs.valid(0, s) || !gv.valid(0, s))
        throw Error(ErrorCode::IncompatibleScales, "tested field undefined inside the test-function support");
      const double r = clamp_density(rho(n, s), tol);
      const double P = prm.pressure(r);
      double v2 = 0.0, u_dphi = 0.0, v_dphi = 0.0, gv2 = 0.0, flux = 0.0;
      for (std::size_t j = 0; j < Dim; ++j) {
        const double vj = vs(0, s, j);
        v2 += vj * vj;
        u_dphi += u(n, s, j) * dphi[j];
        v_dphi += vj * dphi[j];
        for (std::size_t k = 0; k < Dim; ++k) {
          const double dkvj = gv(0, s, j * Dim + k);
          gv2 += dkvj * dkvj;
          flux += dphi[k] * vj * dkvj;
        }
      }
      const double div = dv(0, s);
      acc[0].push_back(-0.5 * w * dq * phi * r * v2);
      acc[1].push_back(-0.5 * w * q * r * u_dphi * v2);
      acc[2].push_back(-w * q * phi * P * div);
      acc[3].push_back(-w * q * P * v_dphi);
      acc[4].push_back(w * q * phi * (prm.mu * gv2 + (prm.mu + prm.lambda) * div * div));
      acc[5].push_back(w * q * (prm.mu * flux + (prm.mu + prm.lambda) * v_dphi * div));
    }
  }
  M3Terms out;
  for (std::size_t k = 0; k < 6; ++k) out.T[k] = pairwise_sum(acc[k]);
  return out;
}

}  // namespace detail

/// The six limit terms for the test function psi(t) phi_delta(x) u.
template <std::size_t Dim>
M3Terms m3_terms(const SpaceTimeField<Dim>& rho, const SpaceTimeField<Dim>& u, const FluidParams& prm,
                 const SpatialCutoff<Dim>& cutoff, const TemporalWeight& weight) {
  detail::require_flow(rho, u);
  return detail::tested_terms(rho, u, u, prm, detail::test_weights(rho.grid(), cutoff, weight));
}

inline CsvTable m3_csv(const std::vector<double>& deltas, const std::vector<M3Terms>& rows) {
  CsvTable t({"delta", "T1", "T2", "T3", "T4", "T5", "T6", "R", "boundary_production"});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto r = t.row();
    r.add(deltas[i]);
    for (double v : rows[i].T) r.add(v);
    r.add(rows[i].residual()).add(rows[i].boundary_production());
  }
  return t;
}

/// Residual of the mollified momentum equation tested with psi phi [u]^eps:
/// the six terms with v = [u]^eps plus the four remainders
///   I1 = int psi phi v.( sum_i xi_i d_t M_i(rho u) - d_t(rho v) )
///   I2 = int psi phi v.( sum_i xi_i div M_i(rho u x u) - div(rho u x v) )
///   I3 = int psi phi v.( sum_i xi_i grad M_i(P) - grad P )
///   I4 = -int psi phi v.( sum_i xi_i L(M_i u) - L v ),  L = mu Lap + (mu+lambda) grad div
/// where M_0 is the interior mollifier and M_i the shifted chart mollifiers.
struct ResolvedAssembly {
  double eps = 0.0;
  M3Terms terms;
  std::array<double, 4> I{};
  double residual = 0.0;
};

namespace detail {

// Node-wise mixtures sum_i xi_i (.) of the mollified pieces.
template <std::size_t Dim>
struct PieceMixture {
  explicit PieceMixture(const GridPtr<Dim>& g)
      : v(g, Dim), dt_m(g, Dim), div_m(g, Dim), grad_p(g, Dim), visc(g, Dim),
        ok(g->num_nodes(), 1) {}

  SpaceTimeField<Dim> v, dt_m, div_m, grad_p, visc;
  std::vector<std::uint8_t> ok;
};

// Stacked component layout of the mollified input.
template <std::size_t Dim>
struct Layout {
  static constexpr std::size_t u = 0, m = Dim, flux = 2 * Dim, p = 2 * Dim + Dim * Dim, count = p + 1;
};

template <std::size_t Dim>
SpaceTimeField<Dim> viscous_operator(const SpaceTimeField<Dim>& w, const FluidParams& prm) {
  // mu Lap w + (mu+lambda) grad div w, by repeated first differences
  SpaceTimeField<Dim> out(w.grid_ptr(), Dim);
  const SpaceTimeField<Dim> gw = gradient(w);
  const SpaceTimeField<Dim> dv = divergence(w);
  const SpaceTimeField<Dim> gdv = gradient(dv);
  std::vector<std::uint8_t> flags(w.grid().num_nodes(), 1);
  for (std::size_t k = 0; k < Dim; ++k) {
    const SpaceTimeField<Dim> dk = partial(gw, Axis::space(k));
    for (std::size_t i = 0; i < flags.size(); ++i) {
      const std::size_t n = i / w.grid().num_space(), s = i % w.grid().num_space();
      if (!dk.valid(n, s) || !gdv.valid(n, s)) {
        flags[i] = 0;
        continue;
      }
      for (std::size_t j = 0; j < Dim; ++j) {
        out(n, s, j) += prm.mu * dk(n, s, j * Dim + k);
        if (k == 0) out(n, s, j) += (prm.mu + prm.lambda) * gdv(n, s, j);
      }
    }
  }
  out.set_validity(std::move(flags));
  return out;
}

template <std::size_t Dim>
SpaceTimeField<Dim> tensor_divergence(const SpaceTimeField<Dim>& a, std::size_t first) {
  // (div A)_j = sum_k d_k A_kj with A_kj stored at first + k*Dim + j
  SpaceTimeField<Dim> out(a.grid_ptr(), Dim);
  std::vector<std::uint8_t> flags(a.grid().num_nodes(), 1);
  const std::size_t NS = a.grid().num_space();
  for (std::size_t k = 0; k < Dim; ++k) {
    const SpaceTimeField<Dim> dk = partial(components(a, first + k * Dim, Dim), Axis::space(k));
    for (std::size_t i = 0; i < flags.size(); ++i) {
      if (!dk.valid(i / NS, i % NS)) {
        flags[i] = 0;
        continue;
      }
      for (std::size_t j = 0; j < Dim; ++j) out(i / NS, i % NS, j) += dk(i / NS, i % NS, j);
    }
  }
  out.set_validity(std::move(flags));
  return out;
}

template <std::size_t Dim>
void add_piece(PieceMixture<Dim>& mix, const SpaceTimeField<Dim>& piece, const std::vector<double>& xi,
               const FluidParams& prm) {
  using L = Layout<Dim>;
  const Grid<Dim>& g = piece.grid();
  const auto pu = components(piece, L::u, Dim);
  const auto dtm = partial(components(piece, L::m, Dim), Axis::time());
  const auto divf = tensor_divergence(piece, L::flux);
  const auto gp = partial(components(piece, L::p, 1), Axis::space(0));
  std::vector<SpaceTimeField<Dim>> gps{gp};
  for (std::size_t a = 1; a < Dim; ++a) gps.push_back(partial(components(piece, L::p, 1), Axis::space(a)));
  const auto visc = viscous_operator(pu, prm);
  for (std::size_t n = 0; n < g.n_t(); ++n)
    for (std::size_t s = 0; s < g.num_space(); ++s) {
      const double x = xi[s];
      if (x <= 0.0) continue;
      const std::size_t i = n * g.num_space() + s;
      bool ok = pu.valid(n, s) && dtm.valid(n, s) && divf.valid(n, s) && visc.valid(n, s);
      for (const auto& d : gps) ok = ok && d.valid(n, s);
      if (!ok) {
        mix.ok[i] = 0;
        continue;
      }
      for (std::size_t j = 0; j < Dim; ++j) {
        mix.v(n, s, j) += x * pu(n, s, j);
        mix.dt_m(n, s, j) += x * dtm(n, s, j);
        mix.div_m(n, s, j) += x * divf(n, s, j);
        mix.grad_p(n, s, j) += x * gps[j](n, s);
        mix.visc(n, s, j) += x * visc(n, s, j);
      }
    }
}

}  // namespace detail

/// `short_circuit` replaces [u]^eps by u and drops the remainders: the result
/// is then the limit residual through the identical code path.
template <std::size_t Dim>
ResolvedAssembly resolved_assembly(const SpaceTimeField<Dim>& rho, const SpaceTimeField<Dim>& u,
                                   const FluidParams& prm, const MollifierSpec& spec, const Atlas<Dim>& atlas,
                                   const SpatialCutoff<Dim>& cutoff, const TemporalWeight& weight,
                                   bool short_circuit = false) {
  detail::require_flow(rho, u);
  const Grid<Dim>& g = rho.grid();
  const auto tw = detail::test_weights(g, cutoff, weight);
  ResolvedAssembly out;
  out.eps = spec.eps;
  if (short_circuit) {
    out.terms = detail::tested_terms(rho, u, u, prm, tw);
    out.residual = out.terms.residual();
    return out;
  }

  // supp psi must sit where the time-smoothed pieces admit a central d_t
  const double lo = g.t_start() + spec.eps + g.dt(), hi = g.t_end() - spec.eps - g.dt();
  for (std::size_t n = 0; n < g.n_t(); ++n)
    if ((tw.q[n] != 0.0 || tw.dq[n] != 0.0) && (g.time(n) < lo - 1e-12 || g.time(n) > hi + 1e-12))
      throw Error(ErrorCode::IncompatibleScales, "time weight support reaches within eps of the time boundary");
  try {
    detail::require_resolved(g, spec);
    check_scale(atlas, spec);
  } catch (const Error& e) {
    throw Error(ErrorCode::IncompatibleScales, e.what());
  }

  using L = detail::Layout<Dim>;
  const double tol = detail::density_tolerance(rho);
  SpaceTimeField<Dim> stacked(rho.grid_ptr(), L::count);
  for (std::size_t n = 0; n < g.n_t(); ++n)
    for (std::size_t s = 0; s < g.num_space(); ++s) {
      const double r = detail::clamp_density(rho(n, s), tol);
      for (std::size_t j = 0; j < Dim; ++j) {
        stacked(n, s, L::u + j) = u(n, s, j);
        stacked(n, s, L::m + j) = r * u(n, s, j);
        for (std::size_t k = 0; k < Dim; ++k) stacked(n, s, L::flux + k * Dim + j) = r * u(n, s, k) * u(n, s, j);
      }
      stacked(n, s, L::p) = prm.pressure(r);
    }

  const auto xi = atlas.sample(g);
  const SpaceTimeField<Dim> ft = detail::time_smooth(stacked, spec.eps);
  detail::PieceMixture<Dim> mix(rho.grid_ptr());
  detail::add_piece(mix, detail::interior_from_time_smoothed(ft, spec.eps), xi[0], prm);
  for (const auto& chart : atlas.charts())
    detail::add_piece(mix, detail::shifted_from_time_smoothed(ft, spec.eps, chart, atlas.domain(), 2.0 * g.max_spacing()),
                      xi[chart.index], prm);
  mix.v.set_validity(mix.ok);
  const SpaceTimeField<Dim>& v = mix.v;

  out.terms = detail::tested_terms(rho, u, v, prm, tw);

  // references built from v itself
  SpaceTimeField<Dim> rho_v = scale_by(rho, v);
  const auto dt_rv = partial(rho_v, Axis::time());
  SpaceTimeField<Dim> flux_v(rho.grid_ptr(), L::count);
  for (std::size_t n = 0; n < g.n_t(); ++n)
    for (std::size_t s = 0; s < g.num_space(); ++s)
      for (std::size_t k = 0; k < Dim; ++k)
        for (std::size_t j = 0; j < Dim; ++j) flux_v(n, s, L::flux + k * Dim + j) = rho(n, s) * u(n, s, k) * v(n, s, j);
  flux_v.set_validity(mix.ok);
  const auto div_rv = detail::tensor_divergence(flux_v, L::flux);
  const auto grad_p = gradient(components(stacked, L::p, 1));
  const auto visc_v = detail::viscous_operator(v, prm);

  std::array<std::vector<double>, 4> acc;
  for (std::size_t n = 0; n < g.n_t(); ++n) {
    const double q = tw.q[n];
    if (q == 0.0) continue;
    for (std::size_t s = 0; s < g.num_space(); ++s) {
      const double w = g.weight(s), phi = tw.phi.phi[s];
      if (w == 0.0 || phi == 0.0) continue;
      if (!mix.ok[n * g.num_space() + s] || !dt_rv.valid(n, s) || !div_rv.valid(n, s) || !visc_v.valid(n, s))
        throw Error(ErrorCode::IncompatibleScales, "mollified pieces undefined inside the test-function support");
      double a1 = 0.0, a2 = 0.0, a3 = 0.0, a4 = 0.0;
      for (std::size_t j = 0; j < Dim; ++j) {
        const double vj = v(n, s, j);
        a1 += vj * (mix.dt_m(n, s, j) - dt_rv(n, s, j));
        a2 += vj * (mix.div_m(n, s, j) - div_rv(n, s, j));
        a3 += vj * (mix.grad_p(n, s, j) - grad_p(n, s, j));
        a4 -= vj * (mix.visc(n, s, j) - visc_v(n, s, j));
      }
      const double f = w * q * phi;
      acc[0].push_back(f * a1);
      acc[1].push_back(f * a2);
      acc[2].push_back(f * a3);
      acc[3].push_back(f * a4);
    }
  }
  for (std::size_t k = 0; k < 4; ++k) out.I[k] = pairwise_sum(acc[k]);
  out.residual = out.terms.residual() + (out.I[0] + out.I[1] + out.I[2] + out.I[3]);
  return out;
}

/// int psi P div u against (1/(gamma-1)) int psi' P.
struct PressureWork {
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
};

template <std::size_t Dim>
PressureWork pressure_work_identity(const SpaceTimeField<Dim>& rho, const SpaceTimeField<Dim>& u,
                                    const FluidParams& prm, const TemporalWeight& weight) {
  detail::require_flow(rho, u);
  const Grid<Dim>& g = rho.grid();
  const double tol = detail::density_tolerance(rho);
  const auto times = grid_times(g);
  const auto q = weight.quadrature(times, false), dq = weight.quadrature(times, true);
  std::vector<double> l, r;
  for (std::size_t n = 0; n < g.n_t(); ++n) {
    if (q[n] == 0.0 && dq[n] == 0.0) continue;
    const SpaceTimeField<Dim> dv = divergence(u.slice(n));
    for (std::size_t s = 0; s < g.num_space(); ++s) {
      if (!g.masked(s)) continue;
      const double P = prm.pressure(detail::clamp_density(rho(n, s), tol));
      l.push_back(g.weight(s) * q[n] * P * dv(0, s));
      r.push_back(g.weight(s) * dq[n] * P / (prm.gamma - 1.0));
    }
  }
  PressureWork out;
  out.lhs = pairwise_sum(l);
  out.rhs = pairwise_sum(r);
  out.gap = out.lhs - out.rhs;
  return out;
}

/// || f / dist ||_{L^p}; nodes on the wall (where f must vanish) are skipped.
template <std::size_t Dim>
double hardy_norm(const SpaceTimeField<Dim>& f, double p) {
  const Grid<Dim>& g = f.grid();
  const double wall = 1e-9 * g.max_spacing();
  SpaceTimeField<Dim> h(f.grid_ptr(), f.components());
  for (std::size_t n = 0; n < g.n_t(); ++n)
    for (std::size_t s = 0; s < g.num_space(); ++s) {
      const double d = g.signed_distance(s);
      if (!g.masked(s) || d <= wall) continue;
      for (std::size_t c = 0; c < f.components(); ++c) h(n, s, c) = f(n, s, c) / d;
    }
  h.set_validity(f.validity());
  return mixed_norm(h, p, p);
}

/// hardy_norm over the W^{1,p} norm of f; 0 for f = 0.
template <std::size_t Dim>
double hardy_ratio(const SpaceTimeField<Dim>& f, double p) {
  const double den = sobolev_norm(f, p);
  return den > 0.0 ? hardy_norm(f, p) / den : 0.0;
}

/// Smooth bump exp(1 - 1/(1 - |x-c|^2/r^2)) with compact support in B(c, r).
template <std::size_t Dim>
struct Bump {
  Point<Dim> center{};
  double radius = 1.0;

  double operator()(const Point<Dim>& x) const {
    const Point<Dim> d = x - center;
    const double s = dot(d, d) / (radius * radius);
    return s < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s)) : 0.0;
  }
};

/// Bumps marching toward the wall of a disk or ball: centre radius
/// 0.5 + 0.04 k of the domain radius, support ending 10% of the remaining gap
/// short of the wall, rotating direction.
template <std::size_t Dim>
std::vector<Bump<Dim>> hardy_bump_family(const Domain<Dim>& domain, std::size_t count = 10) {
  if (domain.kind() != ShapeKind::Disk && domain.kind() != ShapeKind::Ball)
    throw Error(ErrorCode::InvalidArgument, "bump family is defined on disks and balls");
  const double R = domain.outer_radius();
  std::vector<Bump<Dim>> out;
  for (std::size_t k = 0; k < count; ++k) {
    const double c = (0.5 + 0.04 * static_cast<double>(k)) * R;
    const double th = 2.399963229728653 * static_cast<double>(k);
    Point<Dim> dir{};
    dir[0] = std::cos(th);
    dir[1] = std::sin(th);
    Bump<Dim> b;
    b.center = domain.center() + c * dir;
    b.radius = 0.9 * (R - c);
    out.push_back(b);
  }
  return out;
}

/// Norms and flags of the energy-equality criterion.
struct CriterionReport {
  double p = 0.0, q = 0.0, q0 = 0.0;
  double inf_rho = 0.0;
  double sup_rho = 0.0;
  double grad_sqrt_rho = 0.0;  // L^inf_t L^2_x
  double u_norm = 0.0;         // L^p_t L^q_x
  double u0_norm = 0.0;        // L^q0_x
  bool bounded_density = false;  // 0 <= rho <= sup < inf, grad sqrt(rho) in L^inf L^2
  bool integrability = false;    // p >= 4, q >= 6
  bool initial_datum = false;    // q0 > 3
  bool relaxed = false;          // 2/p + 3/(2q) <= 3/4, q >= 6

  static bool relaxed_holds(double p, double q) {
    return q >= 6.0 && 2.0 * reciprocal_exponent(p) + 1.5 * reciprocal_exponent(q) <= 0.75 + 1e-12;
  }

  CsvTable csv() const {
    CsvTable t({"p", "q", "q0", "inf_rho", "sup_rho", "grad_sqrt_rho_linf_l2", "u_lp_lq", "u0_lq0", "flag_bounded_density",
                "flag_integrability", "flag_initial_datum", "flag_relaxed"});
    t.row().add(p).add(q).add(q0).add(inf_rho).add(sup_rho).add(grad_sqrt_rho).add(u_norm).add(u0_norm)
        .add(bounded_density).add(integrability).add(initial_datum).add(relaxed);
    return t;
  }
};

template <std::size_t Dim>
CriterionReport criterion_check(const SpaceTimeField<Dim>& rho, const SpaceTimeField<Dim>& u,
                                const SpaceTimeField<Dim>& u0, double p, double q, double q0) {
  detail::require_flow(rho, u);
  for (double e : {p, q, q0})
    if (!(e >= 1.0)) throw Error(ErrorCode::InvalidArgument, "exponents must lie in [1, inf]");
  const Grid<Dim>& g = rho.grid();
  CriterionReport r;
  r.p = p;
  r.q = q;
  r.q0 = q0;
  r.inf_rho = kInfinity;
  r.sup_rho = -kInfinity;
  SpaceTimeField<Dim> root(rho.grid_ptr(), 1);
  for (std::size_t n = 0; n < g.n_t(); ++n)
    for (std::size_t s = 0; s < g.num_space(); ++s) {
      if (!g.masked(s) || !rho.valid(n, s)) continue;
      r.inf_rho = std::min(r.inf_rho, rho(n, s));
      r.sup_rho = std::max(r.sup_rho, rho(n, s));
      root(n, s) = std::sqrt(std::max(rho(n, s), 0.0));
    }
  root.set_validity(rho.validity());
  r.grad_sqrt_rho = mixed_norm(gradient(root), kInfinity, 2.0);
  r.u_norm = mixed_norm(u, p, q);
  r.u0_norm = mixed_norm(u0, q0, q0);
  r.bounded_density = r.inf_rho >= 0.0 && std::isfinite(r.sup_rho) && std::isfinite(r.grad_sqrt_rho);
  r.integrability = p >= 4.0 && q >= 6.0 && std::isfinite(r.u_norm);
  r.initial_datum = q0 > 3.0 && std::isfinite(r.u0_norm);
  r.relaxed = CriterionReport::relaxed_holds(p, q) && std::isfinite(r.u_norm);
  return r;
}

/// Trapezoid-tested energy balance: E-gap = int psi' E, D-gap = int psi d.
/// For E' = -d the two agree, so the defect measures the imbalance.
struct WindowIdentity {
  double e_start = 0.0;  // ramp average of E over [tau, tau + alpha]
  double e_end = 0.0;    // ramp average of E over [t0, t0 + alpha]
  double e_gap = 0.0;
  double d_gap = 0.0;
  double defect = 0.0;
};

inline WindowIdentity window_from_ledger(const EnergyLedger& led, const TemporalWeight& w) {
  const auto q = w.quadrature(led.t, false), dq = w.quadrature(led.t, true);
  std::vector<double> up, down, d;
  for (std::size_t n = 0; n < led.t.size(); ++n) {
    (led.t[n] <= w.tau() + w.alpha() ? up : down).push_back(dq[n] * led.E[n]);
    d.push_back(q[n] * led.rate[n]);
  }
  WindowIdentity out;
  out.e_start = pairwise_sum(up);
  out.e_end = -pairwise_sum(down);
  out.e_gap = out.e_start - out.e_end;
  out.d_gap = pairwise_sum(d);
  out.defect = out.e_gap - out.d_gap;
  return out;
}

template <std::size_t Dim>
WindowIdentity window_identity(const SpaceTimeField<Dim>& rho, const SpaceTimeField<Dim>& u, const FluidParams& prm,
                               double tau, double alpha, double t0) {
  const Grid<Dim>& g = rho.grid();
  const auto w = TemporalWeight::trapezoid(tau, alpha, t0, g.t_end(), g.t_start());
  return window_from_ledger(energy_and_dissipation(rho, u, prm), w);
}

/// Adjacent-slice moduli ||rho^gamma(t_{n+1}) - rho^gamma(t_n)||_{L^1} and
/// ||(sqrt(rho) u)(t_{n+1}) - (sqrt(rho) u)(t_n)||_{L^2}.
struct ContinuityReport {
  std::vector<double> t;
  std::vector<double> pressure_jump;
  std::vector<double> momentum_jump;

  double max_pressure_jump() const { return pairwise_max(pressure_jump); }
  double max_momentum_jump() const { return pairwise_max(momentum_jump); }

  CsvTable csv() const {
    CsvTable out({"t", "rho_gamma_l1_jump", "sqrt_rho_u_l2_jump"});
    for (std::size_t n = 0; n < t.size(); ++n) out.row().add(t[n]).add(pressure_jump[n]).add(momentum_jump[n]);
    return out;
  }
};

template <std::size_t Dim>
ContinuityReport time_continuity_report(const SpaceTimeField<Dim>& rho, const SpaceTimeField<Dim>& u, double gamma) {
  detail::require_flow(rho, u);
  const Grid<Dim>& g = rho.grid();
  const double tol = detail::density_tolerance(rho);
  ContinuityReport out;
  for (std::size_t n = 0; n + 1 < g.n_t(); ++n) {
    std::vector<double> a, b;
    for (std::size_t s = 0; s < g.num_space(); ++s) {
      if (!g.masked(s)) continue;
      const double r0 = detail::clamp_density(rho(n, s), tol), r1 = detail::clamp_density(rho(n + 1, s), tol);
      a.push_back(g.weight(s) * std::abs(std::pow(r1, gamma) - std::pow(r0, gamma)));
      double m2 = 0.0;
      for (std::size_t j = 0; j < Dim; ++j) {
        const double dm = std::sqrt(r1) * u(n + 1, s, j) - std::sqrt(r0) * u(n, s, j);
        m2 += dm * dm;
      }
      b.push_back(g.weight(s) * m2);
    }
    out.t.push_back(g.time(n));
    out.pressure_jump.push_back(pairwise_sum(a));
    out.momentum_jump.push_back(std::sqrt(pairwise_sum(b)));
  }
  return out;
}

}  // namespace cnsaudit
