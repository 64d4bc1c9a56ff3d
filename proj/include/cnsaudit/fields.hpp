#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cnsaudit/core.hpp"
#include "cnsaudit/geometry.hpp"

namespace cnsaudit {

/// Node counts and extents of a uniform space-time grid.
template <std::size_t Dim>
struct GridShape {
  std::size_t n_t = 1;
  std::array<std::size_t, Dim> n{};
  double t_start = 0.0;
  double t_end = 0.0;
  Point<Dim> lo{};
  Point<Dim> hi{};
};

/// Uniform space-time grid with an inside-mask derived from a domain.
///
/// Spatial nodes are flattened row-major with axis 0 slowest. A node is in the
/// mask when its signed distance is non-negative (up to round-off), so nodes
/// lying on the wall take part in the quadrature with halved weights.
template <std::size_t Dim>
class Grid {
 public:
  Grid(const GridShape<Dim>& shape, const Domain<Dim>& domain) : shape_(shape), domain_(domain) {
    for (std::size_t k = 0; k < Dim; ++k) {
      if (shape_.n[k] < 2) throw Error(ErrorCode::InvalidArgument, "grid needs at least 2 nodes per axis");
      if (!(shape_.hi[k] > shape_.lo[k])) throw Error(ErrorCode::InvalidArgument, "grid box has no extent");
      h_[k] = (shape_.hi[k] - shape_.lo[k]) / static_cast<double>(shape_.n[k] - 1);
    }
    if (shape_.n_t == 0) throw Error(ErrorCode::InvalidArgument, "grid needs at least one time node");
    if (shape_.n_t > 1) {
      if (!(shape_.t_end > shape_.t_start)) throw Error(ErrorCode::InvalidArgument, "time interval is empty");
      dt_ = (shape_.t_end - shape_.t_start) / static_cast<double>(shape_.n_t - 1);
    }
    stride_[Dim - 1] = 1;
    for (std::size_t k = Dim - 1; k > 0; --k) stride_[k - 1] = stride_[k] * shape_.n[k];
    num_space_ = stride_[0] * shape_.n[0];

    double hmax = 0.0;
    for (double h : h_) hmax = std::max(hmax, h);
    const double tol = 1e-10 * hmax;

    index_.resize(num_space_);
    sd_.resize(num_space_);
    mask_.resize(num_space_);
    for (std::size_t s = 0; s < num_space_; ++s) {
      std::size_t rem = s;
      for (std::size_t k = 0; k < Dim; ++k) {
        index_[s][k] = static_cast<std::uint32_t>(rem / stride_[k]);
        rem %= stride_[k];
      }
      sd_[s] = domain_.signed_distance(point(s));
      mask_[s] = sd_[s] >= -tol ? 1 : 0;
    }

    double cell = 1.0;
    for (double h : h_) cell *= h;
    weight_.assign(num_space_, 0.0);
    for (std::size_t s = 0; s < num_space_; ++s) {
      if (!mask_[s]) continue;
      double w = cell;
      for (std::size_t k = 0; k < Dim; ++k) {
        const bool lo_in = neighbor(s, k, -1).has_value() && mask_[*neighbor(s, k, -1)];
        const bool hi_in = neighbor(s, k, +1).has_value() && mask_[*neighbor(s, k, +1)];
        if (!lo_in || !hi_in) w *= 0.5;
      }
      weight_[s] = w;
    }

    time_weight_.assign(shape_.n_t, dt_);
    if (shape_.n_t == 1) {
      time_weight_[0] = 1.0;
    } else {
      time_weight_.front() *= 0.5;
      time_weight_.back() *= 0.5;
    }
  }

  /// Grid whose domain is its own bounding box (e.g. fields read from disk).
  static Grid over_box(const GridShape<Dim>& shape) { return Grid(shape, Domain<Dim>::box(shape.lo, shape.hi)); }

  /// Grid on the bounding box of `domain` with `nodes` nodes per axis.
  static Grid covering(const Domain<Dim>& domain, std::size_t nodes, std::size_t n_t, double t_start,
                       double t_end) {
    GridShape<Dim> shape;
    shape.n_t = n_t;
    shape.n.fill(nodes);
    shape.t_start = t_start;
    shape.t_end = t_end;
    shape.lo = domain.bbox_lo();
    shape.hi = domain.bbox_hi();
    return Grid(shape, domain);
  }

  const GridShape<Dim>& shape() const { return shape_; }
  const Domain<Dim>& domain() const { return domain_; }
  std::size_t n_t() const { return shape_.n_t; }
  std::size_t num_space() const { return num_space_; }
  std::size_t num_nodes() const { return num_space_ * shape_.n_t; }
  std::size_t count(std::size_t axis) const { return shape_.n[axis]; }
  std::size_t stride(std::size_t axis) const { return stride_[axis]; }
  double spacing(std::size_t axis) const { return h_[axis]; }
  double max_spacing() const { return *std::max_element(h_.begin(), h_.end()); }
  double dt() const { return dt_; }
  double t_start() const { return shape_.t_start; }
  double t_end() const { return shape_.t_end; }
  double time(std::size_t n) const { return shape_.t_start + static_cast<double>(n) * dt_; }

  Point<Dim> point(std::size_t s) const {
    Point<Dim> x{};
    for (std::size_t k = 0; k < Dim; ++k) x[k] = shape_.lo[k] + static_cast<double>(index_[s][k]) * h_[k];
    return x;
  }

  std::uint32_t index(std::size_t s, std::size_t axis) const { return index_[s][axis]; }

  std::optional<std::size_t> neighbor(std::size_t s, std::size_t axis, int delta) const {
    const long long i = static_cast<long long>(index_[s][axis]) + delta;
    if (i < 0 || i >= static_cast<long long>(shape_.n[axis])) return std::nullopt;
    return static_cast<std::size_t>(static_cast<long long>(s) + delta * static_cast<long long>(stride_[axis]));
  }

  bool masked(std::size_t s) const { return mask_[s] != 0; }
  double signed_distance(std::size_t s) const { return sd_[s]; }
  double weight(std::size_t s) const { return weight_[s]; }
  double time_weight(std::size_t n) const { return time_weight_[n]; }
  const std::vector<double>& weights() const { return weight_; }

  /// Quadrature measure of the masked region.
  double masked_measure() const { return pairwise_sum(weight_); }

 private:
  GridShape<Dim> shape_;
  Domain<Dim> domain_;
  std::array<double, Dim> h_{};
  double dt_ = 0.0;
  std::array<std::size_t, Dim> stride_{};
  std::size_t num_space_ = 0;
  std::vector<std::array<std::uint32_t, Dim>> index_;
  std::vector<double> sd_;
  std::vector<std::uint8_t> mask_;
  std::vector<double> weight_;
  std::vector<double> time_weight_;
};

template <std::size_t Dim>
using GridPtr = std::shared_ptr<const Grid<Dim>>;

template <std::size_t Dim>
GridPtr<Dim> make_grid(const Grid<Dim>& g) {
  return std::make_shared<const Grid<Dim>>(g);
}

/// Scalar or vector samples on a space-time grid.
///
/// Values are laid out time-major, then spatial node, then component. Nodes
/// outside the mask, or explicitly flagged invalid (e.g. where a mollifier is
/// not defined), hold 0 and are skipped by every reduction and stencil.
template <std::size_t Dim>
class SpaceTimeField {
 public:
  SpaceTimeField() = default;

  SpaceTimeField(GridPtr<Dim> grid, std::size_t components)
      : grid_(std::move(grid)), comps_(components), values_(grid_->num_nodes() * components, 0.0) {
    if (components == 0) throw Error(ErrorCode::InvalidArgument, "field needs at least one component");
  }

  /// Samples `fn(x, t, out)` at every masked node.
  template <class Fn>
  static SpaceTimeField sample(GridPtr<Dim> grid, std::size_t components, Fn&& fn) {
    SpaceTimeField f(std::move(grid), components);
    std::vector<double> buf(components);
    for (std::size_t n = 0; n < f.grid_->n_t(); ++n) {
      const double t = f.grid_->time(n);
      for (std::size_t s = 0; s < f.grid_->num_space(); ++s) {
        if (!f.grid_->masked(s)) continue;
        fn(f.grid_->point(s), t, std::span<double>(buf));
        for (std::size_t c = 0; c < components; ++c) f.values_[f.index(n, s, c)] = buf[c];
      }
    }
    return f;
  }

  const Grid<Dim>& grid() const { return *grid_; }
  const GridPtr<Dim>& grid_ptr() const { return grid_; }
  std::size_t components() const { return comps_; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  std::size_t index(std::size_t n, std::size_t s, std::size_t c = 0) const {
    return (n * grid_->num_space() + s) * comps_ + c;
  }
  double operator()(std::size_t n, std::size_t s, std::size_t c = 0) const { return values_[index(n, s, c)]; }
  double& operator()(std::size_t n, std::size_t s, std::size_t c = 0) { return values_[index(n, s, c)]; }

  bool has_validity() const { return !validity_.empty(); }
  bool valid(std::size_t n, std::size_t s) const {
    return grid_->masked(s) && (validity_.empty() || validity_[n * grid_->num_space() + s] != 0);
  }
  void set_validity(std::vector<std::uint8_t> flags) {
    if (!flags.empty() && flags.size() != grid_->num_nodes())
      throw Error(ErrorCode::ShapeMismatch, "validity flags do not match the grid");
    validity_ = std::move(flags);
    zero_invalid();
  }
  const std::vector<std::uint8_t>& validity() const { return validity_; }

  /// Euclidean magnitude over components at one node.
  double magnitude(std::size_t n, std::size_t s) const {
    if (comps_ == 1) return std::abs(values_[index(n, s)]);
    double m = 0.0;
    for (std::size_t c = 0; c < comps_; ++c) {
      const double v = values_[index(n, s, c)];
      m += v * v;
    }
    return std::sqrt(m);
  }

  std::size_t count_valid() const {
    std::size_t k = 0;
    for (std::size_t n = 0; n < grid_->n_t(); ++n)
      for (std::size_t s = 0; s < grid_->num_space(); ++s) k += valid(n, s) ? 1 : 0;
    return k;
  }

  /// Throws NonFiniteValue if any valid sample is NaN or infinite.
  void check_finite() const {
    for (std::size_t n = 0; n < grid_->n_t(); ++n)
      for (std::size_t s = 0; s < grid_->num_space(); ++s) {
        if (!valid(n, s)) continue;
        for (std::size_t c = 0; c < comps_; ++c)
          if (!std::isfinite(values_[index(n, s, c)]))
            throw Error(ErrorCode::NonFiniteValue, "field holds a non-finite sample");
      }
  }

  void zero_invalid() {
    for (std::size_t n = 0; n < grid_->n_t(); ++n)
      for (std::size_t s = 0; s < grid_->num_space(); ++s)
        if (!valid(n, s))
          for (std::size_t c = 0; c < comps_; ++c) values_[index(n, s, c)] = 0.0;
  }

  SpaceTimeField component(std::size_t c) const {
    SpaceTimeField out(grid_, 1);
    for (std::size_t i = 0; i < grid_->num_nodes(); ++i) out.values_[i] = values_[i * comps_ + c];
    out.validity_ = validity_;
    return out;
  }

  /// Single time slice as a static field (one time node).
  SpaceTimeField slice(std::size_t n) const {
    GridShape<Dim> shape = grid_->shape();
    shape.n_t = 1;
    shape.t_start = shape.t_end = grid_->time(n);
    auto g = std::make_shared<const Grid<Dim>>(shape, grid_->domain());
    SpaceTimeField out(g, comps_);
    const std::size_t len = grid_->num_space() * comps_;
    std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(n * len), len, out.values_.begin());
    if (!validity_.empty())
      out.validity_.assign(validity_.begin() + static_cast<std::ptrdiff_t>(n * grid_->num_space()),
                           validity_.begin() + static_cast<std::ptrdiff_t>((n + 1) * grid_->num_space()));
    return out;
  }

  /// Same samples on a grid carrying a different domain (same node layout).
  SpaceTimeField with_domain(const Domain<Dim>& domain) const {
    auto g = std::make_shared<const Grid<Dim>>(grid_->shape(), domain);
    SpaceTimeField out(g, comps_);
    out.values_ = values_;
    out.validity_ = validity_;
    out.zero_invalid();
    return out;
  }

 private:
  GridPtr<Dim> grid_;
  std::size_t comps_ = 0;
  std::vector<double> values_;
  std::vector<std::uint8_t> validity_;
};

/// Hölder exponent triple with 1/r1 + 1/r2 = 1/r.
struct ExponentTriple {
  double r = 2.0;
  double r1 = 4.0;
  double r2 = 4.0;

  static ExponentTriple make(double r, double r1, double r2) {
    for (double e : {r, r1, r2})
      if (!(e >= 1.0)) throw Error(ErrorCode::InvalidArgument, "exponents must lie in [1, inf]");
    if (std::abs(reciprocal_exponent(r1) + reciprocal_exponent(r2) - reciprocal_exponent(r)) > 1e-12)
      throw Error(ErrorCode::InvalidArgument, "exponents violate 1/r1 + 1/r2 = 1/r");
    return ExponentTriple{r, r1, r2};
  }
};

/// Derivative direction for commutators and finite differences.
struct Axis {
  enum class Kind { None, Time, Space };
  Kind kind = Kind::None;
  std::size_t index = 0;

  static Axis none() { return {Kind::None, 0}; }
  static Axis time() { return {Kind::Time, 0}; }
  static Axis space(std::size_t j) { return {Kind::Space, j}; }

  std::string name() const {
    switch (kind) {
      case Kind::None: return "none";
      case Kind::Time: return "t";
      case Kind::Space: return "x" + std::to_string(index + 1);
    }
    return "?";
  }
};

/// Node predicate (time index, spatial index).
using Region = std::function<bool(std::size_t, std::size_t)>;

/// Mixed Lebesgue norm ( int ( int |f|^q dx )^{p/q} dt )^{1/p} by trapezoid
/// quadrature over valid nodes (optionally restricted to `region`), with max
/// semantics for infinite exponents. Fields with a single time node are
/// treated as static: the time measure is a unit point mass.
template <std::size_t Dim>
double mixed_norm(const SpaceTimeField<Dim>& f, double p, double q, const Region& region = {}) {
  if (!(p >= 1.0) || !(q >= 1.0)) throw Error(ErrorCode::InvalidArgument, "norm exponents must lie in [1, inf]");
  const Grid<Dim>& g = f.grid();
  const bool q_inf = is_infinite_exponent(q);
  const bool p_inf = is_infinite_exponent(p);
  std::vector<double> slice_terms;
  std::vector<double> node_terms;
  slice_terms.reserve(g.n_t());
  bool any = false;
  for (std::size_t n = 0; n < g.n_t(); ++n) {
    node_terms.clear();
    double slice_max = 0.0;
    bool slice_any = false;
    for (std::size_t s = 0; s < g.num_space(); ++s) {
      if (!f.valid(n, s)) continue;
      if (region && !region(n, s)) continue;
      slice_any = true;
      const double m = f.magnitude(n, s);
      if (q_inf)
        slice_max = std::max(slice_max, m);
      else
        node_terms.push_back(g.weight(s) * std::pow(m, q));
    }
    if (!slice_any) continue;
    any = true;
    const double inner = q_inf ? slice_max : std::pow(pairwise_sum(node_terms), 1.0 / q);
    if (p_inf)
      slice_terms.push_back(inner);
    else
      slice_terms.push_back(g.time_weight(n) * std::pow(inner, p));
  }
  if (!any) throw Error(ErrorCode::EmptyRegion, "mixed_norm: no valid node in region");
  if (p_inf) return pairwise_max(slice_terms);
  return std::pow(pairwise_sum(slice_terms), 1.0 / p);
}

namespace detail {

// Second-order one-dimensional difference at position i of a line whose
// samples are reached through `value(i)` and `ok(i)`. Returns false when no
// stencil with at least one valid neighbour exists.
template <class Value, class Ok>
bool line_derivative(long long i, long long count, double h, Value&& value, Ok&& ok, double& out) {
  auto in = [&](long long j) { return j >= 0 && j < count && ok(j); };
  const double f0 = value(i);
  const bool m1 = in(i - 1), p1 = in(i + 1);
  if (m1 && p1) {
    out = (value(i + 1) - value(i - 1)) / (2.0 * h);
    return true;
  }
  if (p1 && in(i + 2)) {
    out = (4.0 * (value(i + 1) - f0) - (value(i + 2) - f0)) / (2.0 * h);
    return true;
  }
  if (m1 && in(i - 2)) {
    out = (-4.0 * (value(i - 1) - f0) + (value(i - 2) - f0)) / (2.0 * h);
    return true;
  }
  if (p1) {
    out = (value(i + 1) - f0) / h;
    return true;
  }
  if (m1) {
    out = (f0 - value(i - 1)) / h;
    return true;
  }
  return false;
}

}  // namespace detail

/// Derivative of every component along one axis: central differences where
/// both neighbours are valid, second-order one-sided next to the edge of the
/// valid set.
template <std::size_t Dim>
SpaceTimeField<Dim> partial(const SpaceTimeField<Dim>& f, Axis axis) {
  if (axis.kind == Axis::Kind::None) throw Error(ErrorCode::InvalidArgument, "partial: axis must be set");
  const Grid<Dim>& g = f.grid();
  const std::size_t C = f.components();
  const std::size_t NS = g.num_space();
  SpaceTimeField<Dim> out(f.grid_ptr(), C);
  std::vector<std::uint8_t> flags(g.num_nodes(), 0);
  for (std::size_t n = 0; n < g.n_t(); ++n) {
    for (std::size_t s = 0; s < NS; ++s) {
      if (!f.valid(n, s)) continue;
      bool ok_all = true;
      for (std::size_t c = 0; c < C; ++c) {
        double d = 0.0;
        bool ok = false;
        if (axis.kind == Axis::Kind::Time) {
          if (g.n_t() < 2) break;
          ok = detail::line_derivative(
              static_cast<long long>(n), static_cast<long long>(g.n_t()), g.dt(),
              [&](long long m) { return f(static_cast<std::size_t>(m), s, c); },
              [&](long long m) { return f.valid(static_cast<std::size_t>(m), s); }, d);
        } else {
          const std::size_t a = axis.index;
          const long long i0 = g.index(s, a);
          const long long stride = static_cast<long long>(g.stride(a));
          const long long base = static_cast<long long>(s) - i0 * stride;
          ok = detail::line_derivative(
              i0, static_cast<long long>(g.count(a)), g.spacing(a),
              [&](long long i) { return f(n, static_cast<std::size_t>(base + i * stride), c); },
              [&](long long i) { return f.valid(n, static_cast<std::size_t>(base + i * stride)); }, d);
        }
        if (!ok) {
          ok_all = false;
          break;
        }
        out(n, s, c) = d;
      }
      if (ok_all && (axis.kind == Axis::Kind::Space || g.n_t() >= 2)) flags[n * NS + s] = 1;
    }
  }
  out.set_validity(std::move(flags));
  return out;
}

/// Spatial gradient; component c of the input maps to outputs c*Dim + axis.
template <std::size_t Dim>
SpaceTimeField<Dim> gradient(const SpaceTimeField<Dim>& f) {
  const Grid<Dim>& g = f.grid();
  const std::size_t C = f.components();
  SpaceTimeField<Dim> out(f.grid_ptr(), C * Dim);
  std::vector<std::uint8_t> flags(g.num_nodes(), 1);
  for (std::size_t a = 0; a < Dim; ++a) {
    const SpaceTimeField<Dim> d = partial(f, Axis::space(a));
    for (std::size_t n = 0; n < g.n_t(); ++n)
      for (std::size_t s = 0; s < g.num_space(); ++s) {
        if (!d.valid(n, s)) {
          flags[n * g.num_space() + s] = 0;
          continue;
        }
        for (std::size_t c = 0; c < C; ++c) out(n, s, c * Dim + a) = d(n, s, c);
      }
  }
  out.set_validity(std::move(flags));
  return out;
}

template <std::size_t Dim>
SpaceTimeField<Dim> divergence(const SpaceTimeField<Dim>& u) {
  if (u.components() != Dim) throw Error(ErrorCode::ShapeMismatch, "divergence needs a Dim-component field");
  const Grid<Dim>& g = u.grid();
  SpaceTimeField<Dim> out(u.grid_ptr(), 1);
  std::vector<std::uint8_t> flags(g.num_nodes(), 1);
  for (std::size_t a = 0; a < Dim; ++a) {
    const SpaceTimeField<Dim> d = partial(u, Axis::space(a));
    for (std::size_t n = 0; n < g.n_t(); ++n)
      for (std::size_t s = 0; s < g.num_space(); ++s) {
        if (!d.valid(n, s)) {
          flags[n * g.num_space() + s] = 0;
          continue;
        }
        out(n, s) += d(n, s, a);
      }
  }
  out.set_validity(std::move(flags));
  return out;
}

template <std::size_t Dim>
SpaceTimeField<Dim> time_derivative(const SpaceTimeField<Dim>& f) {
  return partial(f, Axis::time());
}

/// Valid nodes whose neighbours along `axis` are valid too (one stencil width
/// inside the valid set).
template <std::size_t Dim>
Region central_region(const SpaceTimeField<Dim>& f, Axis axis) {
  return [&f, axis](std::size_t n, std::size_t s) {
    const Grid<Dim>& g = f.grid();
    if (!f.valid(n, s)) return false;
    if (axis.kind == Axis::Kind::Time) return n > 0 && n + 1 < g.n_t() && f.valid(n - 1, s) && f.valid(n + 1, s);
    if (axis.kind == Axis::Kind::Space) {
      const auto lo = g.neighbor(s, axis.index, -1);
      const auto hi = g.neighbor(s, axis.index, +1);
      return lo && hi && f.valid(n, *lo) && f.valid(n, *hi);
    }
    return true;
  };
}

/// Pointwise a - b (same grid and component count); valid where both are.
template <std::size_t Dim>
SpaceTimeField<Dim> subtract(const SpaceTimeField<Dim>& a, const SpaceTimeField<Dim>& b) {
  if (a.components() != b.components() || a.grid().num_nodes() != b.grid().num_nodes())
    throw Error(ErrorCode::ShapeMismatch, "subtract: shape mismatch");
  SpaceTimeField<Dim> out(a.grid_ptr(), a.components());
  const Grid<Dim>& g = a.grid();
  std::vector<std::uint8_t> flags(g.num_nodes(), 0);
  for (std::size_t n = 0; n < g.n_t(); ++n)
    for (std::size_t s = 0; s < g.num_space(); ++s) {
      if (!a.valid(n, s) || !b.valid(n, s)) continue;
      flags[n * g.num_space() + s] = 1;
      for (std::size_t c = 0; c < a.components(); ++c) out(n, s, c) = a(n, s, c) - b(n, s, c);
    }
  out.set_validity(std::move(flags));
  return out;
}

/// Scalar field times each component of `v`; valid where both are.
template <std::size_t Dim>
SpaceTimeField<Dim> scale_by(const SpaceTimeField<Dim>& scalar, const SpaceTimeField<Dim>& v) {
  if (scalar.components() != 1 || scalar.grid().num_nodes() != v.grid().num_nodes())
    throw Error(ErrorCode::ShapeMismatch, "scale_by: shape mismatch");
  SpaceTimeField<Dim> out(v.grid_ptr(), v.components());
  const Grid<Dim>& g = v.grid();
  std::vector<std::uint8_t> flags(g.num_nodes(), 0);
  for (std::size_t n = 0; n < g.n_t(); ++n)
    for (std::size_t s = 0; s < g.num_space(); ++s) {
      if (!scalar.valid(n, s) || !v.valid(n, s)) continue;
      flags[n * g.num_space() + s] = 1;
      const double a = scalar(n, s);
      for (std::size_t c = 0; c < v.components(); ++c) out(n, s, c) = a * v(n, s, c);
    }
  out.set_validity(std::move(flags));
  return out;
}

/// Concatenates the gradient and the values into a W^{1,p} style norm
/// ( ||f||_p^p + ||grad f||_p^p )^{1/p} with the same exponent in time and space.
template <std::size_t Dim>
double sobolev_norm(const SpaceTimeField<Dim>& f, double p, const Region& region = {}) {
  const SpaceTimeField<Dim> grad = gradient(f);
  auto pow_or_zero = [&](const SpaceTimeField<Dim>& h) {
    try {
      return std::pow(mixed_norm(h, p, p, region), p);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::EmptyRegion) return 0.0;
      throw;
    }
  };
  const double a = pow_or_zero(f);
  const double b = pow_or_zero(grad);
  return std::pow(a + b, 1.0 / p);
}

/// Components [a..., b...] of two fields on the same grid; valid where both are.
template <std::size_t Dim>
SpaceTimeField<Dim> stack(const SpaceTimeField<Dim>& a, const SpaceTimeField<Dim>& b) {
  const Grid<Dim>& g = a.grid();
  const std::size_t ca = a.components(), cb = b.components();
  SpaceTimeField<Dim> out(a.grid_ptr(), ca + cb);
  std::vector<std::uint8_t> flags(g.num_nodes(), 0);
  for (std::size_t n = 0; n < g.n_t(); ++n)
    for (std::size_t s = 0; s < g.num_space(); ++s) {
      if (!a.valid(n, s) || !b.valid(n, s)) continue;
      flags[n * g.num_space() + s] = 1;
      for (std::size_t c = 0; c < ca; ++c) out(n, s, c) = a(n, s, c);
      for (std::size_t c = 0; c < cb; ++c) out(n, s, ca + c) = b(n, s, c);
    }
  out.set_validity(std::move(flags));
  return out;
}

/// Components [first, first + count) of f.
template <std::size_t Dim>
SpaceTimeField<Dim> components(const SpaceTimeField<Dim>& f, std::size_t first, std::size_t count) {
  SpaceTimeField<Dim> out(f.grid_ptr(), count);
  const std::size_t C = f.components();
  for (std::size_t i = 0; i < f.grid().num_nodes(); ++i)
    for (std::size_t c = 0; c < count; ++c) out.values()[i * count + c] = f.values()[i * C + first + c];
  out.set_validity(f.validity());
  return out;
}

}  // namespace cnsaudit
