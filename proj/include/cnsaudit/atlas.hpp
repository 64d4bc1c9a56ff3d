#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "cnsaudit/csv.hpp"
#include "cnsaudit/fields.hpp"
#include "cnsaudit/geometry.hpp"

namespace cnsaudit {

/// Boundary chart: anchor x_i on the wall, radius r_i, unit outward shift
/// direction nu_i, and the shift factor lambda_i. The shifted evaluation point
/// is x - lambda_i * eps * nu_i, which moves into the domain.
///
/// The chart set is V_i = Omega ∩ B(x_i, r_i/2); convolutions at shifted
/// points stay inside B(x_i, r_i) ∩ Omega for every eps <= eps_max.
template <std::size_t Dim>
struct BoundaryChart {
  std::size_t index = 0;
  Point<Dim> anchor{};
  double radius = 0.0;
  Point<Dim> shift{};
  double shift_factor = 1.0;
  double eps_max = 0.0;

  Point<Dim> shifted(const Point<Dim>& x, double eps) const { return x - (shift_factor * eps) * shift; }
  bool in_chart_set(const Point<Dim>& x, const Domain<Dim>& domain) const {
    return norm(x - anchor) < 0.5 * radius && domain.signed_distance(x) >= 0.0;
  }
};

struct AtlasOptions {
  std::vector<double> shift_factors{1.0, 1.25, 1.5, 2.0, 2.5, 3.0};
  double safety = 0.95;
  // chart half-radius as a multiple of the anchor spacing on a ring
  double cover_factor = 0.6;
  std::size_t samples_per_axis = 48;
};

namespace detail {

// Sample points of closure(V_i): a lattice over the chart ball plus the wall
// projections of lattice points close to the wall.
template <std::size_t Dim>
std::vector<Point<Dim>> chart_samples(const Domain<Dim>& domain, const Point<Dim>& anchor, double half,
                                      std::size_t m) {
  std::vector<Point<Dim>> pts;
  const double step = 2.0 * half / static_cast<double>(m - 1);
  std::array<std::size_t, Dim> idx{};
  while (true) {
    Point<Dim> x{};
    for (std::size_t k = 0; k < Dim; ++k) x[k] = anchor[k] - half + step * static_cast<double>(idx[k]);
    if (norm(x - anchor) <= half) {
      const double sd = domain.signed_distance(x);
      if (sd >= 0.0) pts.push_back(x);
      if (std::abs(sd) < 2.0 * step) {
        const Point<Dim> xb = domain.closest_point(x);
        if (norm(xb - anchor) <= half) pts.push_back(xb);
      }
    }
    std::size_t k = 0;
    while (k < Dim && ++idx[k] == m) idx[k++] = 0;
    if (k == Dim) break;
  }
  pts.push_back(anchor);
  return pts;
}

template <std::size_t Dim>
bool shift_safe(const Domain<Dim>& domain, const std::vector<Point<Dim>>& pts, const Point<Dim>& anchor,
                double radius, const Point<Dim>& nu, double lambda, double eps) {
  for (const auto& x : pts) {
    const Point<Dim> y = x - (lambda * eps) * nu;
    if (domain.signed_distance(y) < eps) return false;
    if (norm(y - anchor) + eps > radius) return false;
  }
  return true;
}

// Largest eps such that every eps' in (0, eps] is shift-safe on the samples.
template <std::size_t Dim>
double max_safe_shift(const Domain<Dim>& domain, const std::vector<Point<Dim>>& pts, const Point<Dim>& anchor,
                      double radius, const Point<Dim>& nu, double lambda) {
  constexpr int kScan = 100;
  const double de = radius / kScan;
  double ok = 0.0;
  double bad = radius;
  for (int j = 1; j <= kScan; ++j) {
    const double e = de * j;
    if (!shift_safe(domain, pts, anchor, radius, nu, lambda, e)) {
      bad = e;
      break;
    }
    ok = e;
  }
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (ok + bad);
    if (shift_safe(domain, pts, anchor, radius, nu, lambda, mid))
      ok = mid;
    else
      bad = mid;
  }
  return ok;
}

}  // namespace detail

/// Boundary charts plus the smooth partition of unity subordinate to
/// {V_0, V_1, ..., V_k}, where V_0 = { dist > interior_offset }.
///
/// Unnormalized bumps are b_i = Q(1 - |x - x_i| / (r_i/2)) for charts and
/// b_0 = Q((dist - d_a)/d_a) for the interior, Q the quintic smoothstep;
/// xi_i = b_i / sum_j b_j.
template <std::size_t Dim>
class Atlas {
 public:
  Atlas(Domain<Dim> domain, std::vector<BoundaryChart<Dim>> charts, double interior_offset)
      : domain_(std::move(domain)), charts_(std::move(charts)), offset_(interior_offset) {}

  const Domain<Dim>& domain() const { return domain_; }
  const std::vector<BoundaryChart<Dim>>& charts() const { return charts_; }
  std::size_t size() const { return charts_.size(); }
  double interior_offset() const { return offset_; }

  double min_eps_max() const {
    double m = kInfinity;
    for (const auto& c : charts_) m = std::min(m, c.eps_max);
    return m;
  }

  /// Largest scale at which both the shifted charts and the interior
  /// mollifier on supp xi_0 are defined.
  double max_scale() const { return std::min(min_eps_max(), offset_); }

  double chart_bump(std::size_t i, const Point<Dim>& x) const {
    const auto& c = charts_[i];
    return quintic_step(1.0 - norm(x - c.anchor) / (0.5 * c.radius));
  }

  double interior_bump(const Point<Dim>& x) const {
    return quintic_step((domain_.signed_distance(x) - offset_) / offset_);
  }

  double bump_sum(const Point<Dim>& x) const {
    double s = interior_bump(x);
    for (std::size_t i = 0; i < charts_.size(); ++i) s += chart_bump(i, x);
    return s;
  }

  /// (xi_0, xi_1, ..., xi_k) at x. Throws CoverageFailure where no bump is active.
  std::vector<double> weights(const Point<Dim>& x) const {
    std::vector<double> w(charts_.size() + 1);
    w[0] = interior_bump(x);
    for (std::size_t i = 0; i < charts_.size(); ++i) w[i + 1] = chart_bump(i, x);
    double s = 0.0;
    for (double v : w) s += v;
    if (!(s > 0.0)) throw Error(ErrorCode::CoverageFailure, "point lies in no chart and not in V_0");
    for (double& v : w) v /= s;
    return w;
  }

  /// xi_i sampled at every spatial node of `grid`; row i holds xi_i, zero
  /// outside the mask.
  std::vector<std::vector<double>> sample(const Grid<Dim>& grid) const {
    std::vector<std::vector<double>> out(charts_.size() + 1, std::vector<double>(grid.num_space(), 0.0));
    for (std::size_t s = 0; s < grid.num_space(); ++s) {
      if (!grid.masked(s)) continue;
      const auto w = weights(grid.point(s));
      for (std::size_t i = 0; i < w.size(); ++i) out[i][s] = w[i];
    }
    return out;
  }

  CsvTable summary() const {
    const char* axes[] = {"x", "y", "z"};
    std::vector<std::string> cols{"chart_index"};
    for (std::size_t a = 0; a < Dim; ++a) cols.push_back(std::string("anchor_") + axes[a]);
    cols.push_back("radius");
    for (std::size_t a = 0; a < Dim; ++a) cols.push_back(std::string("shift_") + axes[a]);
    cols.push_back("eps_max");
    cols.push_back("shift_factor");
    CsvTable t(cols);
    t.comment("domain", domain_.describe());
    t.comment("interior_offset", offset_);
    for (const auto& c : charts_) {
      auto r = t.row();
      r.add(c.index);
      for (double v : c.anchor) r.add(v);
      r.add(c.radius);
      for (double v : c.shift) r.add(v);
      r.add(c.eps_max).add(c.shift_factor);
    }
    return t;
  }

 private:
  Domain<Dim> domain_;
  std::vector<BoundaryChart<Dim>> charts_;
  double offset_;
};

namespace detail {

template <std::size_t Dim>
void push_chart(std::vector<BoundaryChart<Dim>>& charts, const Domain<Dim>& domain, const Point<Dim>& anchor,
                double half_radius, const Point<Dim>& nu, const AtlasOptions& opt) {
  BoundaryChart<Dim> c;
  c.index = charts.size() + 1;
  c.anchor = anchor;
  c.radius = 2.0 * half_radius;
  c.shift = nu;
  const auto pts = chart_samples(domain, anchor, half_radius, opt.samples_per_axis);
  double best = -1.0;
  for (double lambda : opt.shift_factors) {
    const double e = max_safe_shift(domain, pts, anchor, c.radius, nu, lambda);
    if (e > best) {
      best = e;
      c.shift_factor = lambda;
    }
  }
  c.eps_max = opt.safety * best;
  if (!(c.eps_max > 0.0)) throw Error(ErrorCode::ShiftUnsafe, "no admissible shift for chart " + std::to_string(c.index));
  charts.push_back(c);
}

template <std::size_t Dim>
void ring_charts(std::vector<BoundaryChart<Dim>>& charts, const Domain<Dim>& domain, double radius, std::size_t k,
                 double orientation, double half_cap, const AtlasOptions& opt) {
  const double pi = std::numbers::pi;
  // a capped radius needs denser anchors to keep neighbouring charts overlapping
  const double c = 2.0 * opt.cover_factor * radius;
  double half = c * std::sin(pi / static_cast<double>(k));
  if (half > half_cap) {
    const double spacing = half_cap / 1.6;
    if (spacing < radius) k = std::max(k, static_cast<std::size_t>(std::ceil(pi / std::asin(spacing / radius))));
    half = half_cap;
  }
  for (std::size_t i = 0; i < k; ++i) {
    const double th = 2.0 * pi * static_cast<double>(i) / static_cast<double>(k);
    Point<Dim> dir{};
    dir[0] = std::cos(th);
    dir[1] = std::sin(th);
    const Point<Dim> anchor = domain.center() + radius * dir;
    push_chart(charts, domain, anchor, half, orientation * dir, opt);
  }
}

}  // namespace detail

/// Builds boundary charts and the partition of unity for a domain.
///
/// disk: k equally spaced charts; annulus: at least k charts split over both
/// circles (more when the ring width caps the chart radius); square: 4
/// side charts plus 4 corner charts (k must be 8); ball: k Fibonacci points.
/// Coverage of the closed domain is verified on a sampling lattice.
template <std::size_t Dim>
Atlas<Dim> build_atlas(const Domain<Dim>& domain, std::size_t k, const AtlasOptions& opt = {}) {
  if (k < 4) throw Error(ErrorCode::InvalidArgument, "build_atlas needs at least 4 charts");
  std::vector<BoundaryChart<Dim>> charts;
  const double pi = std::numbers::pi;
  switch (domain.kind()) {
    case ShapeKind::Disk:
      detail::ring_charts(charts, domain, domain.outer_radius(), k, 1.0, kInfinity, opt);
      break;
    case ShapeKind::Annulus: {
      if (k < 8) throw Error(ErrorCode::InvalidArgument, "annulus atlas needs at least 8 charts");
      const double ri = domain.inner_radius(), ro = domain.outer_radius();
      std::size_t k_in = std::max<std::size_t>(4, static_cast<std::size_t>(std::lround(k * ri / (ri + ro))));
      if (k - k_in < 4) k_in = k - 4;
      const double cap = 0.45 * (ro - ri);
      detail::ring_charts(charts, domain, ro, k - k_in, 1.0, cap, opt);
      detail::ring_charts(charts, domain, ri, k_in, -1.0, cap, opt);
      break;
    }
    case ShapeKind::Box: {
      if constexpr (Dim != 2) {
        throw Error(ErrorCode::InvalidArgument, "box atlases are only built in 2-D");
      } else {
        if (k != 8) throw Error(ErrorCode::InvalidArgument, "square atlas uses exactly 8 charts");
        const auto lo = domain.box_lo(), hi = domain.box_hi();
        const double half = 0.3 * std::min(hi[0] - lo[0], hi[1] - lo[1]);
        const double mx = 0.5 * (lo[0] + hi[0]), my = 0.5 * (lo[1] + hi[1]);
        const Point<2> sides[4][2] = {{{mx, lo[1]}, {0, -1}}, {{hi[0], my}, {1, 0}},
                                      {{mx, hi[1]}, {0, 1}}, {{lo[0], my}, {-1, 0}}};
        for (const auto& s : sides) detail::push_chart(charts, domain, s[0], half, s[1], opt);
        const double r2 = std::sqrt(0.5);
        const Point<2> corners[4][2] = {{{lo[0], lo[1]}, {-r2, -r2}}, {{hi[0], lo[1]}, {r2, -r2}},
                                        {{hi[0], hi[1]}, {r2, r2}}, {{lo[0], hi[1]}, {-r2, r2}}};
        for (const auto& c : corners) detail::push_chart(charts, domain, c[0], half, c[1], opt);
      }
      break;
    }
    case ShapeKind::Ball: {
      if constexpr (Dim != 3) {
        throw Error(ErrorCode::InvalidArgument, "ball atlases are 3-D");
      } else {
        const double R = domain.outer_radius();
        const double half = 0.9 * std::sqrt(4.0 * pi / static_cast<double>(k)) * R;
        const double golden = pi * (3.0 - std::sqrt(5.0));
        for (std::size_t i = 0; i < k; ++i) {
          const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(k);
          const double rr = std::sqrt(1.0 - z * z);
          const double th = golden * static_cast<double>(i);
          const Point<3> dir{rr * std::cos(th), rr * std::sin(th), z};
          detail::push_chart(charts, domain, domain.center() + R * dir, half, dir, opt);
        }
      }
      break;
    }
  }

  double min_half = kInfinity;
  for (const auto& c : charts) min_half = std::min(min_half, 0.5 * c.radius);
  Atlas<Dim> atlas(domain, std::move(charts), 0.4 * min_half);

  // Coverage: every sampled point of the closed domain must see a bump.
  const std::size_t m = Dim == 2 ? 201 : 41;
  const auto lo = domain.bbox_lo(), hi = domain.bbox_hi();
  std::array<std::size_t, Dim> idx{};
  while (true) {
    Point<Dim> x{};
    for (std::size_t a = 0; a < Dim; ++a)
      x[a] = lo[a] + (hi[a] - lo[a]) * static_cast<double>(idx[a]) / static_cast<double>(m - 1);
    const double sd = domain.signed_distance(x);
    if (sd >= 0.0 && !(atlas.bump_sum(x) > 1e-9)) throw Error(ErrorCode::CoverageFailure, "uncovered point near the wall");
    if (std::abs(sd) < 0.5 * (hi[0] - lo[0]) / static_cast<double>(m - 1)) {
      const Point<Dim> xb = domain.closest_point(x);
      if (!(atlas.bump_sum(xb) > 1e-9)) throw Error(ErrorCode::CoverageFailure, "uncovered boundary point");
    }
    std::size_t a = 0;
    while (a < Dim && ++idx[a] == m) idx[a++] = 0;
    if (a == Dim) break;
  }
  return atlas;
}

}  // namespace cnsaudit
