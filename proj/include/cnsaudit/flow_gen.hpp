#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cnsaudit/csv.hpp"
#include "cnsaudit/energy_audit.hpp"
#include "cnsaudit/fields.hpp"

namespace cnsaudit {

enum class InitialCondition { Rest, Swirl, Bump };

inline InitialCondition parse_initial_condition(const std::string& id) {
  if (id == "rest") return InitialCondition::Rest;
  if (id == "swirl") return InitialCondition::Swirl;
  if (id == "bump") return InitialCondition::Bump;
  throw Error(ErrorCode::UnknownFamily, "unknown initial condition '" + id + "' (rest, swirl, bump)");
}

inline std::string to_string(InitialCondition ic) {
  switch (ic) {
    case InitialCondition::Rest: return "rest";
    case InitialCondition::Swirl: return "swirl";
    case InitialCondition::Bump: return "bump";
  }
  return "?";
}

/// Unit-square run: N cells per side (N + 1 nodes), `outputs` stored
/// intervals over [0, T]. dt <= 0 selects the largest stable step.
struct SolverConfig {
  FluidParams params;
  std::size_t N = 64;
  double dt = 0.0;
  double T = 0.5;
  InitialCondition initial = InitialCondition::Swirl;
  double cfl = 0.4;
  std::size_t outputs = 0;  // 0: N / 2
  double density_floor = 1e-6;
};

struct RunMetadata {
  std::size_t N = 0;
  double dt = 0.0;
  double T = 0.0;
  std::size_t steps = 0;
  std::size_t outputs = 0;
  double mass_drift = 0.0;  // max relative |M(t) - M(0)| / M(0) over stored slices
  double min_density = 0.0;

  CsvTable csv() const {
    CsvTable t({"N", "dt", "T", "steps", "outputs", "mass_drift", "min_density"});
    t.row().add(N).add(dt).add(T).add(steps).add(outputs).add(mass_drift).add(min_density);
    return t;
  }
};

struct FlowRun {
  SpaceTimeField<2> rho;
  SpaceTimeField<2> u;
  RunMetadata meta;
};

namespace detail {

// Node-wise state on the (N+1)^2 lattice; u vanishes on wall nodes.
struct FlowState {
  std::vector<double> r, ux, uy;
};

class FlowOperator {
 public:
  FlowOperator(std::size_t N, const FluidParams& prm) : N_(N), n_(N + 1), h_(1.0 / static_cast<double>(N)), prm_(prm) {
    m_x_.resize(n_ * n_);
    m_y_.resize(n_ * n_);
    p_.resize(n_ * n_);
  }

  std::size_t idx(std::size_t i, std::size_t j) const { return i * n_ + j; }
  bool wall(std::size_t i, std::size_t j) const { return i == 0 || j == 0 || i == N_ || j == N_; }

  // Continuity: conservative flux with the summation-by-parts first
  // derivative (central inside, one-sided on the wall rows), so the
  // trapezoid mass telescopes to the (zero) wall flux.
  // Momentum: non-conservative velocity form with central differences on
  // interior nodes.
  void apply(const FlowState& s, FlowState& out) {
    const std::size_t total = n_ * n_;
    out.r.assign(total, 0.0);
    out.ux.assign(total, 0.0);
    out.uy.assign(total, 0.0);
    for (std::size_t k = 0; k < total; ++k) {
      m_x_[k] = s.r[k] * s.ux[k];
      m_y_[k] = s.r[k] * s.uy[k];
      p_[k] = std::pow(s.r[k], prm_.gamma);
    }
    const double ih = 1.0 / h_, i2h = 0.5 / h_, ih2 = 1.0 / (h_ * h_), i4h2 = 0.25 / (h_ * h_);
    const double mu = prm_.mu, ml = prm_.mu + prm_.lambda;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) {
        const std::size_t c = idx(i, j);
        const double dmx = i == 0 ? (m_x_[c + n_] - m_x_[c]) * ih
                           : i == N_ ? (m_x_[c] - m_x_[c - n_]) * ih
                                     : (m_x_[c + n_] - m_x_[c - n_]) * i2h;
        const double dmy = j == 0 ? (m_y_[c + 1] - m_y_[c]) * ih
                           : j == N_ ? (m_y_[c] - m_y_[c - 1]) * ih
                                     : (m_y_[c + 1] - m_y_[c - 1]) * i2h;
        out.r[c] = -(dmx + dmy);
        if (wall(i, j)) continue;
        const std::size_t e = c + n_, w = c - n_, nn = c + 1, so = c - 1;
        const double ux = s.ux[c], uy = s.uy[c], r = s.r[c];
        const double ux_x = (s.ux[e] - s.ux[w]) * i2h, ux_y = (s.ux[nn] - s.ux[so]) * i2h;
        const double uy_x = (s.uy[e] - s.uy[w]) * i2h, uy_y = (s.uy[nn] - s.uy[so]) * i2h;
        const double ux_xx = (s.ux[e] - 2 * ux + s.ux[w]) * ih2, ux_yy = (s.ux[nn] - 2 * ux + s.ux[so]) * ih2;
        const double uy_xx = (s.uy[e] - 2 * uy + s.uy[w]) * ih2, uy_yy = (s.uy[nn] - 2 * uy + s.uy[so]) * ih2;
        const double ux_xy = (s.ux[e + 1] - s.ux[e - 1] - s.ux[w + 1] + s.ux[w - 1]) * i4h2;
        const double uy_xy = (s.uy[e + 1] - s.uy[e - 1] - s.uy[w + 1] + s.uy[w - 1]) * i4h2;
        const double px = (p_[e] - p_[w]) * i2h, py = (p_[nn] - p_[so]) * i2h;
        out.ux[c] = -(ux * ux_x + uy * ux_y) + (-px + mu * (ux_xx + ux_yy) + ml * (ux_xx + uy_xy)) / r;
        out.uy[c] = -(ux * uy_x + uy * uy_y) + (-py + mu * (uy_xx + uy_yy) + ml * (ux_xy + uy_yy)) / r;
      }
  }

 private:
  std::size_t N_, n_;
  double h_;
  FluidParams prm_;
  std::vector<double> m_x_, m_y_, p_;
};

inline FlowState initial_state(std::size_t N, InitialCondition ic) {
  const std::size_t n = N + 1;
  const double h = 1.0 / static_cast<double>(N);
  FlowState s{std::vector<double>(n * n, 1.0), std::vector<double>(n * n, 0.0), std::vector<double>(n * n, 0.0)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double x = static_cast<double>(i) * h, y = static_cast<double>(j) * h;
      const std::size_t c = i * n + j;
      if (ic == InitialCondition::Swirl) {
        // u = (d_y psi, -d_x psi), psi = 0.05 sin^2(pi x) sin^2(2 pi y)
        const double sx = std::sin(M_PI * x), sy = std::sin(2 * M_PI * y);
        s.ux[c] = 0.05 * sx * sx * 2 * M_PI * std::sin(4 * M_PI * y);
        s.uy[c] = -0.05 * M_PI * std::sin(2 * M_PI * x) * sy * sy;
      } else if (ic == InitialCondition::Bump) {
        const double dx = x - 0.5, dy = y - 0.5;
        s.r[c] = 1.0 + 0.2 * std::exp(-(dx * dx + dy * dy) / 0.01);
      }
      if (i == 0 || j == 0 || i == N || j == N) s.ux[c] = s.uy[c] = 0.0;
    }
  return s;
}

inline double wave_speed(const FlowState& s, double gamma) {
  double m = 0.0;
  for (std::size_t k = 0; k < s.r.size(); ++k) {
    const double c = std::sqrt(gamma * std::pow(s.r[k], gamma - 1.0));
    m = std::max(m, std::hypot(s.ux[k], s.uy[k]) + c);
  }
  return m;
}

}  // namespace detail

/// Largest admissible step: cfl * min(h^2 rho_min / (4 (2 mu + |lambda|)),
/// h / max(|u| + c)) evaluated on the initial state.
inline double stable_step(const SolverConfig& cfg) {
  const auto s = detail::initial_state(cfg.N, cfg.initial);
  const double h = 1.0 / static_cast<double>(cfg.N);
  const double rmin = *std::min_element(s.r.begin(), s.r.end());
  const double visc = h * h * rmin / (4.0 * (2.0 * cfg.params.mu + std::abs(cfg.params.lambda)));
  return cfg.cfl * std::min(visc, h / detail::wave_speed(s, cfg.params.gamma));
}

/// Explicit Heun integration of the isentropic compressible Navier-Stokes
/// system on the unit square with no-slip walls.
inline FlowRun solve(const SolverConfig& cfg) {
  if (cfg.N < 4) throw Error(ErrorCode::InvalidArgument, "solver needs N >= 4");
  if (!(cfg.T > 0.0)) throw Error(ErrorCode::InvalidArgument, "end time must be positive");
  const std::size_t outputs = cfg.outputs ? cfg.outputs : std::max<std::size_t>(1, cfg.N / 2);
  const double bound = stable_step(cfg);
  if (cfg.dt > bound * (1 + 1e-12))
    throw Error(ErrorCode::InvalidArgument, "dt exceeds the stability bound " + format_number(bound));
  const double target = cfg.dt > 0.0 ? cfg.dt : bound;
  const auto per_output =
      static_cast<std::size_t>(std::ceil(cfg.T / (target * static_cast<double>(outputs)) - 1e-9));
  const std::size_t steps = per_output * outputs;
  const double dt = cfg.T / static_cast<double>(steps);

  GridShape<2> shape;
  shape.n_t = outputs + 1;
  shape.n = {cfg.N + 1, cfg.N + 1};
  shape.t_end = cfg.T;
  shape.lo = {0.0, 0.0};
  shape.hi = {1.0, 1.0};
  auto grid = make_grid(Grid<2>::over_box(shape));
  FlowRun run{SpaceTimeField<2>(grid, 1), SpaceTimeField<2>(grid, 2), {}};

  detail::FlowState s = detail::initial_state(cfg.N, cfg.initial);
  detail::FlowOperator op(cfg.N, cfg.params);
  const std::size_t NS = s.r.size();
  auto mass = [&](const std::vector<double>& r) {
    std::vector<double> m(NS);
    for (std::size_t k = 0; k < NS; ++k) m[k] = grid->weight(k) * r[k];
    return pairwise_sum(m);
  };
  const double m0 = mass(s.r);
  double drift = 0.0, rmin = kInfinity;
  auto store = [&](std::size_t n) {
    for (std::size_t k = 0; k < NS; ++k) {
      run.rho(n, k) = s.r[k];
      run.u(n, k, 0) = s.ux[k];
      run.u(n, k, 1) = s.uy[k];
    }
    drift = std::max(drift, std::abs(mass(s.r) - m0) / m0);
  };
  store(0);

  detail::FlowState k1, k2, mid;
  for (std::size_t step = 1; step <= steps; ++step) {
    op.apply(s, k1);
    mid = s;
    for (std::size_t k = 0; k < NS; ++k) {
      mid.r[k] += dt * k1.r[k];
      mid.ux[k] += dt * k1.ux[k];
      mid.uy[k] += dt * k1.uy[k];
    }
    op.apply(mid, k2);
    for (std::size_t k = 0; k < NS; ++k) {
      s.r[k] += 0.5 * dt * (k1.r[k] + k2.r[k]);
      s.ux[k] += 0.5 * dt * (k1.ux[k] + k2.ux[k]);
      s.uy[k] += 0.5 * dt * (k1.uy[k] + k2.uy[k]);
      if (!std::isfinite(s.r[k]) || !std::isfinite(s.ux[k]) || !std::isfinite(s.uy[k]))
        throw Error(ErrorCode::Blowup, "non-finite state at t = " + format_number(dt * static_cast<double>(step)));
      if (s.r[k] < cfg.density_floor)
        throw Error(ErrorCode::DensityFloorBreach,
                    "density " + format_number(s.r[k]) + " below floor at t = " + format_number(dt * static_cast<double>(step)));
      rmin = std::min(rmin, s.r[k]);
    }
    if (step % per_output == 0) store(step / per_output);
  }
  run.meta = {cfg.N, dt, cfg.T, steps, outputs, drift, std::min(rmin, *std::min_element(run.rho.values().begin(), run.rho.values().end()))};
  return run;
}

/// [rho, u1, u2] in one three-component field, the layout of run files.
inline SpaceTimeField<2> pack_flow(const SpaceTimeField<2>& rho, const SpaceTimeField<2>& u) {
  return stack(rho, u);
}

inline std::pair<SpaceTimeField<2>, SpaceTimeField<2>> unpack_flow(const SpaceTimeField<2>& f) {
  if (f.components() != 3) throw Error(ErrorCode::ShapeMismatch, "flow files hold three components (rho, u1, u2)");
  return {components(f, 0, 1), components(f, 1, 2)};
}

/// Closed-form density and velocity with derivatives, for exact-answer tests.
template <std::size_t Dim>
struct Manufactured {
  using Grad = std::array<Point<Dim>, Dim>;  // [j][k] = d_k u_j

  std::string id;
  std::function<double(const Point<Dim>&, double)> rho;
  std::function<Point<Dim>(const Point<Dim>&, double)> grad_rho;
  std::function<Point<Dim>(const Point<Dim>&, double)> u;
  std::function<Grad(const Point<Dim>&, double)> grad_u;
};

namespace detail {

// trig(k) -> k, trig -> 1; anything else -> 0.
inline int trig_order(const std::string& id) {
  if (id == "trig") return 1;
  if (id.size() > 6 && id.rfind("trig(", 0) == 0 && id.back() == ')') {
    try {
      const int k = std::stoi(id.substr(5, id.size() - 6));
      return k > 0 ? k : 0;
    } catch (const std::exception&) {
      return 0;
    }
  }
  return 0;
}

}  // namespace detail

/// Families: constant, affine, trig(k), boundary-bump, random (seeded).
template <std::size_t Dim>
Manufactured<Dim> manufactured_family(const std::string& id, const Domain<Dim>& domain, std::uint64_t seed = 0) {
  using M = Manufactured<Dim>;
  M m;
  m.id = id;
  if (id == "constant") {
    m.rho = [](const Point<Dim>&, double) { return 1.0; };
    m.grad_rho = [](const Point<Dim>&, double) { return Point<Dim>{}; };
    m.u = [](const Point<Dim>&, double) { return Point<Dim>{}; };
    m.grad_u = [](const Point<Dim>&, double) { return typename M::Grad{}; };
    return m;
  }
  if (id == "affine") {
    // rho = 1 + 0.2 x1 + 0.05 t, u_j = 0.1 (j+1) + 0.3 x_{j+1 mod Dim} + 0.1 t
    m.rho = [](const Point<Dim>& x, double t) { return 1.0 + 0.2 * x[0] + 0.05 * t; };
    m.grad_rho = [](const Point<Dim>&, double) {
      Point<Dim> g{};
      g[0] = 0.2;
      return g;
    };
    m.u = [](const Point<Dim>& x, double t) {
      Point<Dim> v{};
      for (std::size_t j = 0; j < Dim; ++j) v[j] = 0.1 * static_cast<double>(j + 1) + 0.3 * x[(j + 1) % Dim] + 0.1 * t;
      return v;
    };
    m.grad_u = [](const Point<Dim>&, double) {
      typename M::Grad g{};
      for (std::size_t j = 0; j < Dim; ++j) g[j][(j + 1) % Dim] = 0.3;
      return g;
    };
    return m;
  }
  if (const int k = detail::trig_order(id)) {
    // S = prod_a sin(k pi x_a); u_1 = S sin(pi t), u_j = S cos(pi t) (j > 1),
    // rho = 1 + 0.2 S cos(pi t)
    const double w = k * M_PI;
    auto S = [w](const Point<Dim>& x) {
      double s = 1.0;
      for (std::size_t a = 0; a < Dim; ++a) s *= std::sin(w * x[a]);
      return s;
    };
    auto dS = [w](const Point<Dim>& x) {
      Point<Dim> g{};
      for (std::size_t a = 0; a < Dim; ++a) {
        double p = w * std::cos(w * x[a]);
        for (std::size_t b = 0; b < Dim; ++b)
          if (b != a) p *= std::sin(w * x[b]);
        g[a] = p;
      }
      return g;
    };
    auto amp = [](std::size_t j, double t) { return j == 0 ? std::sin(M_PI * t) : std::cos(M_PI * t); };
    m.rho = [S](const Point<Dim>& x, double t) { return 1.0 + 0.2 * S(x) * std::cos(M_PI * t); };
    m.grad_rho = [dS](const Point<Dim>& x, double t) { return (0.2 * std::cos(M_PI * t)) * dS(x); };
    m.u = [S, amp](const Point<Dim>& x, double t) {
      Point<Dim> v{};
      for (std::size_t j = 0; j < Dim; ++j) v[j] = S(x) * amp(j, t);
      return v;
    };
    m.grad_u = [dS, amp](const Point<Dim>& x, double t) {
      typename M::Grad g{};
      for (std::size_t j = 0; j < Dim; ++j) g[j] = amp(j, t) * dS(x);
      return g;
    };
    return m;
  }
  if (id == "boundary-bump") {
    // b = boundary weight (zero on the wall); u_j = b (1 + 0.5 x_j) cos(t), rho = 1 + 0.3 b
    m.rho = [domain](const Point<Dim>& x, double) { return 1.0 + 0.3 * domain.boundary_weight(x); };
    m.grad_rho = [domain](const Point<Dim>& x, double) { return 0.3 * domain.boundary_weight_gradient(x); };
    m.u = [domain](const Point<Dim>& x, double t) {
      Point<Dim> v{};
      const double b = domain.boundary_weight(x);
      for (std::size_t j = 0; j < Dim; ++j) v[j] = b * (1.0 + 0.5 * x[j]) * std::cos(t);
      return v;
    };
    m.grad_u = [domain](const Point<Dim>& x, double t) {
      typename M::Grad g{};
      const double b = domain.boundary_weight(x);
      const Point<Dim> db = domain.boundary_weight_gradient(x);
      for (std::size_t j = 0; j < Dim; ++j) {
        g[j] = ((1.0 + 0.5 * x[j]) * std::cos(t)) * db;
        g[j][j] += 0.5 * b * std::cos(t);
      }
      return g;
    };
    return m;
  }
  if (id == "random") {
    // four Fourier modes per field with seeded wave vectors, phases and amplitudes
    struct Mode {
      Point<Dim> k{};
      double omega = 0.0, phase = 0.0, amp = 0.0;
    };
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<int> wave(-3, 3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto draw = [&](double total) {
      std::vector<Mode> modes(4);
      for (auto& md : modes) {
        for (std::size_t a = 0; a < Dim; ++a) md.k[a] = M_PI * static_cast<double>(wave(gen));
        md.omega = 0.5 + 1.5 * unit(gen);
        md.phase = 2 * M_PI * unit(gen);
        md.amp = total / 4.0 * (0.5 + 0.5 * unit(gen));
      }
      return modes;
    };
    const auto mr = draw(0.4);
    std::vector<std::vector<Mode>> mu;
    for (std::size_t j = 0; j < Dim; ++j) mu.push_back(draw(1.0));
    auto eval = [](const std::vector<Mode>& ms, const Point<Dim>& x, double t) {
      double v = 0.0;
      for (const auto& md : ms) v += md.amp * std::sin(dot(md.k, x) + md.omega * t + md.phase);
      return v;
    };
    auto grad = [](const std::vector<Mode>& ms, const Point<Dim>& x, double t) {
      Point<Dim> g{};
      for (const auto& md : ms) g = g + (md.amp * std::cos(dot(md.k, x) + md.omega * t + md.phase)) * md.k;
      return g;
    };
    m.rho = [mr, eval](const Point<Dim>& x, double t) { return 1.0 + eval(mr, x, t); };
    m.grad_rho = [mr, grad](const Point<Dim>& x, double t) { return grad(mr, x, t); };
    m.u = [mu, eval](const Point<Dim>& x, double t) {
      Point<Dim> v{};
      for (std::size_t j = 0; j < Dim; ++j) v[j] = eval(mu[j], x, t);
      return v;
    };
    m.grad_u = [mu, grad](const Point<Dim>& x, double t) {
      typename M::Grad g{};
      for (std::size_t j = 0; j < Dim; ++j) g[j] = grad(mu[j], x, t);
      return g;
    };
    return m;
  }
  throw Error(ErrorCode::UnknownFamily,
              "unknown family '" + id + "' (constant, affine, trig(k), boundary-bump, random)");
}

/// (rho, u) of a family sampled on every node of `grid`.
template <std::size_t Dim>
std::pair<SpaceTimeField<Dim>, SpaceTimeField<Dim>> manufactured_field(const std::string& id, const GridPtr<Dim>& grid,
                                                                       std::uint64_t seed = 0) {
  const auto m = manufactured_family(id, grid->domain(), seed);
  auto rho = SpaceTimeField<Dim>::sample(grid, 1, [&](const Point<Dim>& x, double t, std::span<double> o) { o[0] = m.rho(x, t); });
  auto u = SpaceTimeField<Dim>::sample(grid, Dim, [&](const Point<Dim>& x, double t, std::span<double> o) {
    const auto v = m.u(x, t);
    for (std::size_t j = 0; j < Dim; ++j) o[j] = v[j];
  });
  return {std::move(rho), std::move(u)};
}

}  // namespace cnsaudit
