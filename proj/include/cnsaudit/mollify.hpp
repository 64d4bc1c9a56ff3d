#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "cnsaudit/atlas.hpp"
#include "cnsaudit/csv.hpp"
#include "cnsaudit/fields.hpp"

namespace cnsaudit {

namespace detail {

// Unnormalized bump exp(-1/(1 - s)) as a function of s = |z|^2.
inline double bump_profile(double s) { return s < 1.0 ? std::exp(-1.0 / (1.0 - s)) : 0.0; }

// Integral of the bump over the unit ball in `dim` dimensions (radial
// trapezoid; the integrand is flat to all orders at both ends).
inline double bump_mass(int dim) {
  constexpr int n = 20000;
  double s = dim == 1 ? 0.5 * bump_profile(0.0) : 0.0;
  for (int i = 1; i < n; ++i) {
    const double r = static_cast<double>(i) / n;
    s += std::pow(r, dim - 1) * bump_profile(r * r);
  }
  s /= n;
  const double pi = std::numbers::pi;
  switch (dim) {
    case 1: return 2.0 * s;
    case 2: return 2.0 * pi * s;
    default: return 4.0 * pi * s;
  }
}

}  // namespace detail

/// Space-time mollifier eta_eps(x, t) = eps^-(d+1) eta_x(x/eps) eta_t(t/eps),
/// each factor the standard bump normalized to unit mass. One scale governs
/// space and time; the support is the cylinder B(0, eps) x (-eps, eps).
struct MollifierSpec {
  double eps = 0.0;

  static MollifierSpec make(double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw Error(ErrorCode::InvalidArgument, "mollifier scale must be positive");
    return MollifierSpec{eps};
  }

  static double space_constant(int dim) {
    static const double c2 = detail::bump_mass(2), c3 = detail::bump_mass(3);
    return dim == 2 ? c2 : c3;
  }
  static double time_constant() {
    static const double c1 = detail::bump_mass(1);
    return c1;
  }

  /// Normalized continuous kernel value.
  template <std::size_t Dim>
  double kernel(const Point<Dim>& x, double t) const {
    const double sx = dot(x, x) / (eps * eps);
    const double st = t * t / (eps * eps);
    return detail::bump_profile(sx) * detail::bump_profile(st) /
           (space_constant(static_cast<int>(Dim)) * time_constant() * std::pow(eps, static_cast<double>(Dim + 1)));
  }
};

namespace detail {

template <std::size_t Dim>
void require_resolved(const Grid<Dim>& g, const MollifierSpec& spec) {
  double h = g.max_spacing();
  if (g.n_t() > 1) h = std::max(h, g.dt());
  if (spec.eps < 2.0 * h * (1.0 - 1e-12))
    throw Error(ErrorCode::ScaleTooSmall, "eps=" + std::to_string(spec.eps) + " is below twice the grid spacing");
}

// Time pass: convolution with the normalized discrete time bump. Nodes whose
// window [t - eps, t + eps] leaves the interval, or touches an invalid
// sample, are invalid. Static fields pass through unchanged.
template <std::size_t Dim>
SpaceTimeField<Dim> time_smooth(const SpaceTimeField<Dim>& f, double eps) {
  const Grid<Dim>& g = f.grid();
  if (g.n_t() == 1) return f;
  const std::size_t C = f.components();
  const std::size_t NS = g.num_space();
  const long long m = static_cast<long long>(std::floor(eps / g.dt()));
  std::vector<double> w;
  double mass = 0.0;
  for (long long j = -m; j <= m; ++j) {
    const double s = static_cast<double>(j) * g.dt() / eps;
    w.push_back(bump_profile(s * s));
    mass += w.back();
  }
  for (double& v : w) v /= mass;
  const double tol = 1e-12 * (g.t_end() - g.t_start());
  SpaceTimeField<Dim> out(f.grid_ptr(), C);
  std::vector<std::uint8_t> flags(g.num_nodes(), 0);
  for (std::size_t n = 0; n < g.n_t(); ++n) {
    const double t = g.time(n);
    if (t - eps < g.t_start() - tol || t + eps > g.t_end() + tol) continue;
    if (static_cast<long long>(n) < m || n + m >= g.n_t()) continue;
    for (std::size_t s = 0; s < NS; ++s) {
      bool ok = true;
      for (long long j = -m; j <= m && ok; ++j) ok = f.valid(static_cast<std::size_t>(static_cast<long long>(n) + j), s);
      if (!ok) continue;
      flags[n * NS + s] = 1;
      for (std::size_t c = 0; c < C; ++c) {
        double acc = 0.0;
        for (long long j = -m; j <= m; ++j)
          acc += w[static_cast<std::size_t>(j + m)] * f(static_cast<std::size_t>(static_cast<long long>(n) + j), s, c);
        out(n, s, c) = acc;
      }
    }
  }
  out.set_validity(std::move(flags));
  return out;
}

// Off-grid centres see a lopsided node set, so the sampled bump has a
// small first moment. Tilting the weights by (1 + a.(y - c)) with
// a = -S^{-1} M1 cancels it, so affine fields are reproduced exactly. The
// tilt is skipped if it would make any weight non-positive.
template <std::size_t Dim>
void correct_first_moment(const Grid<Dim>& g, const Point<Dim>& center, const std::vector<std::size_t>& idx,
                          std::vector<double>& w) {
  Point<Dim> m1{};
  std::array<std::array<double, Dim>, Dim> S{};
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const Point<Dim> d = g.point(idx[j]) - center;
    for (std::size_t a = 0; a < Dim; ++a) {
      m1[a] += w[j] * d[a];
      for (std::size_t b = 0; b < Dim; ++b) S[a][b] += w[j] * d[a] * d[b];
    }
  }
  Point<Dim> a{};
  if constexpr (Dim == 2) {
    const double det = S[0][0] * S[1][1] - S[0][1] * S[1][0];
    if (!(std::abs(det) > 0.0)) return;
    a[0] = -(S[1][1] * m1[0] - S[0][1] * m1[1]) / det;
    a[1] = -(-S[1][0] * m1[0] + S[0][0] * m1[1]) / det;
  } else {
    // Cramer's rule for the 3x3 system S a = -m1
    auto det3 = [](const std::array<std::array<double, Dim>, Dim>& M) {
      return M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) - M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
             M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
    };
    const double det = det3(S);
    if (!(std::abs(det) > 0.0)) return;
    for (std::size_t c = 0; c < Dim; ++c) {
      auto M = S;
      for (std::size_t r = 0; r < Dim; ++r) M[r][c] = -m1[r];
      a[c] = det3(M) / det;
    }
  }
  std::vector<double> tilted(w.size());
  double mass = 0.0;
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const double f = 1.0 + dot(a, g.point(idx[j]) - center);
    if (!(f > 0.0)) return;
    tilted[j] = w[j] * f;
    mass += tilted[j];
  }
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = tilted[j] / mass;
}

// Grid nodes strictly inside B(center, eps) with normalized bump weights.
// Returns false if the ball reaches a node off the grid or outside the mask.
template <std::size_t Dim>
bool gather_ball(const Grid<Dim>& g, const Point<Dim>& center, double eps, std::vector<std::size_t>& idx,
                 std::vector<double>& w) {
  idx.clear();
  w.clear();
  std::array<long long, Dim> lo{}, hi{};
  for (std::size_t k = 0; k < Dim; ++k) {
    const double origin = g.shape().lo[k];
    lo[k] = static_cast<long long>(std::ceil((center[k] - eps - origin) / g.spacing(k)));
    hi[k] = static_cast<long long>(std::floor((center[k] + eps - origin) / g.spacing(k)));
  }
  std::array<long long, Dim> i = lo;
  double mass = 0.0;
  while (true) {
    double r2 = 0.0;
    std::size_t flat = 0;
    bool on_grid = true;
    for (std::size_t k = 0; k < Dim; ++k) {
      const double d = g.shape().lo[k] + static_cast<double>(i[k]) * g.spacing(k) - center[k];
      r2 += d * d;
      if (i[k] < 0 || i[k] >= static_cast<long long>(g.count(k))) on_grid = false;
      else flat += static_cast<std::size_t>(i[k]) * g.stride(k);
    }
    const double s = r2 / (eps * eps);
    if (s < 1.0) {
      if (!on_grid || !g.masked(flat)) return false;
      const double v = bump_profile(s);
      idx.push_back(flat);
      w.push_back(v);
      mass += v;
    }
    std::size_t k = 0;
    while (k < Dim && ++i[k] > hi[k]) {
      i[k] = lo[k];
      ++k;
    }
    if (k == Dim) break;
  }
  if (!(mass > 0.0)) return false;
  for (double& v : w) v /= mass;
  correct_first_moment(g, center, idx, w);
  return true;
}

// Spatial pass at node s, convolving the time-smoothed field `ft` around
// `center`. Writes every valid time slice into `out`, flags into `flags`.
template <std::size_t Dim>
void space_pass_at(const SpaceTimeField<Dim>& ft, std::size_t s, const std::vector<std::size_t>& idx,
                   const std::vector<double>& w, SpaceTimeField<Dim>& out, std::vector<std::uint8_t>& flags) {
  const Grid<Dim>& g = ft.grid();
  const std::size_t C = ft.components();
  for (std::size_t n = 0; n < g.n_t(); ++n) {
    bool ok = true;
    for (std::size_t j = 0; j < idx.size() && ok; ++j) ok = ft.valid(n, idx[j]);
    if (!ok) continue;
    flags[n * g.num_space() + s] = 1;
    for (std::size_t c = 0; c < C; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < idx.size(); ++j) acc += w[j] * ft(n, idx[j], c);
      out(n, s, c) = acc;
    }
  }
}

template <std::size_t Dim>
SpaceTimeField<Dim> interior_from_time_smoothed(const SpaceTimeField<Dim>& ft, double eps) {
  const Grid<Dim>& g = ft.grid();
  SpaceTimeField<Dim> out(ft.grid_ptr(), ft.components());
  std::vector<std::uint8_t> flags(g.num_nodes(), 0);
  std::vector<std::size_t> idx;
  std::vector<double> w;
  for (std::size_t s = 0; s < g.num_space(); ++s) {
    if (!g.masked(s) || g.signed_distance(s) < eps * (1.0 - 1e-12)) continue;
    if (!gather_ball(g, g.point(s), eps, idx, w)) continue;
    space_pass_at(ft, s, idx, w, out, flags);
  }
  out.set_validity(std::move(flags));
  return out;
}

template <std::size_t Dim>
SpaceTimeField<Dim> shifted_from_time_smoothed(const SpaceTimeField<Dim>& ft, double eps, const BoundaryChart<Dim>& chart,
                                               const Domain<Dim>& domain, double reach) {
  const Grid<Dim>& g = ft.grid();
  SpaceTimeField<Dim> out(ft.grid_ptr(), ft.components());
  std::vector<std::uint8_t> flags(g.num_nodes(), 0);
  std::vector<std::size_t> idx;
  std::vector<double> w;
  for (std::size_t s = 0; s < g.num_space(); ++s) {
    if (!g.masked(s)) continue;
    const Point<Dim> x = g.point(s);
    if (norm(x - chart.anchor) >= 0.5 * chart.radius + reach) continue;
    const Point<Dim> xs = chart.shifted(x, eps);
    if (domain.signed_distance(xs) < eps * (1.0 - 1e-12)) continue;
    if (!gather_ball(g, xs, eps, idx, w)) continue;
    space_pass_at(ft, s, idx, w, out, flags);
  }
  out.set_validity(std::move(flags));
  return out;
}

}  // namespace detail

/// Interior mollification f^eps. Valid where dist(x) >= eps and the time
/// window fits inside [t_start, t_end]; zero and flagged invalid elsewhere.
template <std::size_t Dim>
SpaceTimeField<Dim> mollify_interior(const SpaceTimeField<Dim>& f, const MollifierSpec& spec) {
  detail::require_resolved(f.grid(), spec);
  return detail::interior_from_time_smoothed(detail::time_smooth(f, spec.eps), spec.eps);
}

/// Shifted mollification on chart i: the interior convolution evaluated at
/// x - lambda_i eps nu_i, for nodes of V_i (widened by `reach`).
template <std::size_t Dim>
SpaceTimeField<Dim> mollify_shifted(const SpaceTimeField<Dim>& f, const MollifierSpec& spec,
                                    const BoundaryChart<Dim>& chart, double reach = 0.0) {
  detail::require_resolved(f.grid(), spec);
  if (spec.eps > chart.eps_max)
    throw Error(ErrorCode::ShiftUnsafe, "eps exceeds eps_max of chart " + std::to_string(chart.index));
  return detail::shifted_from_time_smoothed(detail::time_smooth(f, spec.eps), spec.eps, chart, f.grid().domain(),
                                            reach);
}

/// Pointwise sum_i xi_i piece_i; a node is valid when every piece carrying
/// positive weight there is valid.
template <std::size_t Dim>
SpaceTimeField<Dim> glue(const SpaceTimeField<Dim>& interior, const std::vector<SpaceTimeField<Dim>>& charts,
                         const std::vector<std::vector<double>>& xi) {
  const Grid<Dim>& g = interior.grid();
  const std::size_t C = interior.components();
  SpaceTimeField<Dim> out(interior.grid_ptr(), C);
  std::vector<std::uint8_t> flags(g.num_nodes(), 0);
  for (std::size_t n = 0; n < g.n_t(); ++n)
    for (std::size_t s = 0; s < g.num_space(); ++s) {
      if (!g.masked(s)) continue;
      bool ok = true;
      for (std::size_t i = 0; i <= charts.size() && ok; ++i) {
        if (xi[i][s] <= 0.0) continue;
        ok = i == 0 ? interior.valid(n, s) : charts[i - 1].valid(n, s);
      }
      if (!ok) continue;
      flags[n * g.num_space() + s] = 1;
      for (std::size_t c = 0; c < C; ++c) {
        double acc = 0.0;
        for (std::size_t i = 0; i <= charts.size(); ++i) {
          if (xi[i][s] <= 0.0) continue;
          acc += xi[i][s] * (i == 0 ? interior(n, s, c) : charts[i - 1](n, s, c));
        }
        out(n, s, c) = acc;
      }
    }
  out.set_validity(std::move(flags));
  return out;
}

/// All pieces of the glued mollification, kept for gap diagnostics.
template <std::size_t Dim>
struct GlobalMollification {
  SpaceTimeField<Dim> glued;
  SpaceTimeField<Dim> interior;
  std::vector<SpaceTimeField<Dim>> charts;
  std::vector<std::vector<double>> xi;  // xi[i][s], i = 0 interior
};

template <std::size_t Dim>
void check_scale(const Atlas<Dim>& atlas, const MollifierSpec& spec) {
  if (spec.eps > atlas.min_eps_max())
    throw Error(ErrorCode::ShiftUnsafe, "eps exceeds the smallest chart eps_max");
  if (spec.eps > atlas.interior_offset())
    throw Error(ErrorCode::ShiftUnsafe, "eps exceeds the interior offset of the partition of unity");
}

/// [f]^eps = xi_0 f^eps + sum_i xi_i f~_i^eps, with the chart pieces computed
/// on V_i widened by `reach`.
template <std::size_t Dim>
GlobalMollification<Dim> mollify_global_parts(const SpaceTimeField<Dim>& f, const MollifierSpec& spec,
                                              const Atlas<Dim>& atlas, double reach = 0.0) {
  const Grid<Dim>& g = f.grid();
  detail::require_resolved(g, spec);
  check_scale(atlas, spec);
  const SpaceTimeField<Dim> ft = detail::time_smooth(f, spec.eps);
  GlobalMollification<Dim> out;
  out.xi = atlas.sample(g);
  out.interior = detail::interior_from_time_smoothed(ft, spec.eps);
  for (const auto& chart : atlas.charts())
    out.charts.push_back(detail::shifted_from_time_smoothed(ft, spec.eps, chart, atlas.domain(), reach));
  out.glued = glue(out.interior, out.charts, out.xi);
  return out;
}

template <std::size_t Dim>
SpaceTimeField<Dim> mollify_global(const SpaceTimeField<Dim>& f, const MollifierSpec& spec, const Atlas<Dim>& atlas) {
  return mollify_global_parts(f, spec, atlas).glued;
}

struct ConvergenceRow {
  double eps = 0.0;
  double err_global_w1p = 0.0;
  double err_interior_gap = 0.0;
  double err_chart_gap_max = 0.0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double observed_order = 0.0;

  std::vector<double> column(double ConvergenceRow::*member) const {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r.*member);
    return v;
  }

  CsvTable csv() const {
    CsvTable t({"eps", "err_global_w1p", "err_interior_gap", "err_chart_gap_max", "observed_order"});
    for (const auto& r : rows)
      t.row().add(r.eps).add(r.err_global_w1p).add(r.err_interior_gap).add(r.err_chart_gap_max).add(observed_order);
    return t;
  }
};

/// Errors of the glued mollification in L^p(W^{1,p}) over the common time
/// window (max eps, T - max eps), plus the interior and chart gaps, for a
/// strictly decreasing ladder of scales.
template <std::size_t Dim>
ConvergenceTable convergence_study(const SpaceTimeField<Dim>& f, double p, const std::vector<double>& scales,
                                   const Atlas<Dim>& atlas) {
  if (scales.size() < 3) throw Error(ErrorCode::InvalidArgument, "convergence_study needs at least 3 scales");
  if (!strictly_decreasing(scales)) throw Error(ErrorCode::InvalidArgument, "scales must be strictly decreasing");
  const Grid<Dim>& g = f.grid();
  const double emax = scales.front();
  const double tol = 1e-12 * std::max(1.0, g.t_end() - g.t_start());
  auto in_window = [&](std::size_t n) {
    if (g.n_t() == 1) return true;
    const double t = g.time(n);
    return t >= g.t_start() + emax - tol && t <= g.t_end() - emax + tol;
  };
  const Domain<Dim>& dom = atlas.domain();
  auto zero_if_empty = [](auto&& fn) {
    try {
      return fn();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::EmptyRegion) return 0.0;
      throw;
    }
  };

  ConvergenceTable table;
  for (double eps : scales) {
    const auto parts = mollify_global_parts(f, MollifierSpec::make(eps), atlas, 2.0 * g.max_spacing());
    ConvergenceRow row;
    row.eps = eps;
    const Region window = [&](std::size_t n, std::size_t) { return in_window(n); };
    row.err_global_w1p = sobolev_norm(subtract(parts.glued, f), p, window);

    const Region v0 = [&](std::size_t n, std::size_t s) {
      return in_window(n) && g.signed_distance(s) > atlas.interior_offset();
    };
    row.err_interior_gap = zero_if_empty([&] { return sobolev_norm(subtract(parts.interior, parts.glued), p, v0); });

    for (std::size_t i = 0; i < atlas.size(); ++i) {
      const auto& chart = atlas.charts()[i];
      const Region vi = [&](std::size_t n, std::size_t s) {
        return in_window(n) && chart.in_chart_set(g.point(s), dom);
      };
      const double gap = zero_if_empty([&] { return sobolev_norm(subtract(parts.charts[i], parts.glued), p, vi); });
      row.err_chart_gap_max = std::max(row.err_chart_gap_max, gap);
    }
    table.rows.push_back(row);
  }
  const auto errs = table.column(&ConvergenceRow::err_global_w1p);
  table.observed_order = loglog_slope(scales, errs);
  return table;
}

}  // namespace cnsaudit
