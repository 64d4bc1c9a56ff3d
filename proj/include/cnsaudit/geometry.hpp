#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "cnsaudit/core.hpp"

namespace cnsaudit {

enum class ShapeKind { Disk, Annulus, Box, Ball };

inline const char* to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Disk: return "disk";
    case ShapeKind::Annulus: return "annulus";
    case ShapeKind::Box: return "box";
    case ShapeKind::Ball: return "ball";
  }
  return "?";
}

/// Bounded domain with an analytic signed distance (positive inside).
///
/// Disks and annuli live in 2-D, balls in 3-D, boxes in either. A square is a
/// box with equal sides; its corners are only C^0, so normal queries there
/// raise NonSmoothPoint.
template <std::size_t Dim>
class Domain {
  static_assert(Dim == 2 || Dim == 3, "spatial dimension must be 2 or 3");

 public:
  static Domain disk(const Point<Dim>& center, double radius) {
    static_assert(Dim == 2);
    require(radius > 0.0, "disk radius must be positive");
    Domain d(ShapeKind::Disk);
    d.center_ = center;
    d.r_out_ = radius;
    return d;
  }

  static Domain annulus(const Point<Dim>& center, double r_in, double r_out) {
    static_assert(Dim == 2);
    require(r_in > 0.0 && r_out > r_in, "annulus needs 0 < r_in < r_out");
    Domain d(ShapeKind::Annulus);
    d.center_ = center;
    d.r_in_ = r_in;
    d.r_out_ = r_out;
    return d;
  }

  static Domain square(const Point<Dim>& corner, double side) {
    require(side > 0.0, "square side must be positive");
    Point<Dim> hi{};
    for (std::size_t k = 0; k < Dim; ++k) hi[k] = corner[k] + side;
    return box(corner, hi);
  }

  static Domain box(const Point<Dim>& lo, const Point<Dim>& hi) {
    for (std::size_t k = 0; k < Dim; ++k) require(hi[k] > lo[k], "box must have positive extent");
    Domain d(ShapeKind::Box);
    d.lo_ = lo;
    d.hi_ = hi;
    return d;
  }

  static Domain ball(const Point<Dim>& center, double radius) {
    static_assert(Dim == 3);
    require(radius > 0.0, "ball radius must be positive");
    Domain d(ShapeKind::Ball);
    d.center_ = center;
    d.r_out_ = radius;
    return d;
  }

  ShapeKind kind() const { return kind_; }
  const Point<Dim>& center() const { return center_; }
  double inner_radius() const { return r_in_; }
  double outer_radius() const { return r_out_; }
  const Point<Dim>& box_lo() const { return lo_; }
  const Point<Dim>& box_hi() const { return hi_; }

  double signed_distance(const Point<Dim>& x) const {
    switch (kind_) {
      case ShapeKind::Disk:
      case ShapeKind::Ball:
        return r_out_ - norm(x - center_);
      case ShapeKind::Annulus: {
        const double r = norm(x - center_);
        return std::min(r - r_in_, r_out_ - r);
      }
      case ShapeKind::Box: {
        // Standard box distance: inside, distance to the nearest face; outside,
        // Euclidean distance to the box.
        double inside = kHuge;
        double outside_sq = 0.0;
        bool is_inside = true;
        for (std::size_t k = 0; k < Dim; ++k) {
          const double below = lo_[k] - x[k];
          const double above = x[k] - hi_[k];
          const double excess = std::max(below, above);
          if (excess > 0.0) {
            is_inside = false;
            outside_sq += excess * excess;
          }
          inside = std::min(inside, std::min(x[k] - lo_[k], hi_[k] - x[k]));
        }
        return is_inside ? inside : -std::sqrt(outside_sq);
      }
    }
    return 0.0;
  }

  /// Gradient of the signed distance (unit length wherever it exists). At
  /// points where the distance is not differentiable (centre of a disk, medial
  /// axis of a box) one of the one-sided gradients is returned.
  Point<Dim> distance_gradient(const Point<Dim>& x) const {
    Point<Dim> g{};
    switch (kind_) {
      case ShapeKind::Disk:
      case ShapeKind::Ball: {
        const Point<Dim> rel = x - center_;
        const double r = norm(rel);
        if (r == 0.0) {
          g[0] = -1.0;
          return g;
        }
        return (-1.0 / r) * rel;
      }
      case ShapeKind::Annulus: {
        const Point<Dim> rel = x - center_;
        const double r = norm(rel);
        if (r == 0.0) {
          g[0] = 1.0;
          return g;
        }
        const double sign = (r - r_in_ <= r_out_ - r) ? 1.0 : -1.0;
        return (sign / r) * rel;
      }
      case ShapeKind::Box: {
        if (signed_distance(x) < 0.0) {
          // Outside: gradient points toward the box.
          Point<Dim> p = closest_point(x);
          Point<Dim> rel = p - x;
          const double len = norm(rel);
          return len > 0.0 ? (1.0 / len) * rel : g;
        }
        std::size_t best_axis = 0;
        double best = kHuge;
        double sign = 1.0;
        for (std::size_t k = 0; k < Dim; ++k) {
          const double a = x[k] - lo_[k];
          const double b = hi_[k] - x[k];
          if (a < best) {
            best = a;
            best_axis = k;
            sign = 1.0;
          }
          if (b < best) {
            best = b;
            best_axis = k;
            sign = -1.0;
          }
        }
        g[best_axis] = sign;
        return g;
      }
    }
    return g;
  }

  /// Closest point on the boundary.
  Point<Dim> closest_point(const Point<Dim>& x) const {
    switch (kind_) {
      case ShapeKind::Disk:
      case ShapeKind::Ball:
      case ShapeKind::Annulus: {
        const Point<Dim> rel = x - center_;
        double r = norm(rel);
        Point<Dim> dir{};
        if (r == 0.0) {
          dir[0] = 1.0;
          r = 0.0;
        } else {
          dir = (1.0 / r) * rel;
        }
        double target = r_out_;
        if (kind_ == ShapeKind::Annulus && std::abs(r - r_in_) < std::abs(r_out_ - r)) target = r_in_;
        return center_ + target * dir;
      }
      case ShapeKind::Box: {
        Point<Dim> p = x;
        bool inside = true;
        for (std::size_t k = 0; k < Dim; ++k) {
          if (p[k] < lo_[k] || p[k] > hi_[k]) inside = false;
          p[k] = std::clamp(p[k], lo_[k], hi_[k]);
        }
        if (!inside) return p;
        // Inside: project onto the nearest face.
        std::size_t best_axis = 0;
        double best = kHuge;
        double value = lo_[0];
        for (std::size_t k = 0; k < Dim; ++k) {
          if (x[k] - lo_[k] < best) {
            best = x[k] - lo_[k];
            best_axis = k;
            value = lo_[k];
          }
          if (hi_[k] - x[k] < best) {
            best = hi_[k] - x[k];
            best_axis = k;
            value = hi_[k];
          }
        }
        p = x;
        p[best_axis] = value;
        return p;
      }
    }
    return x;
  }

  /// Unit outward normal at a boundary point.
  Point<Dim> outward_normal(const Point<Dim>& xb, double tolerance = 1e-9) const {
    if (std::abs(signed_distance(xb)) > tolerance)
      throw Error(ErrorCode::InvalidArgument, "outward_normal: point is not on the boundary");
    switch (kind_) {
      case ShapeKind::Disk:
      case ShapeKind::Ball:
      case ShapeKind::Annulus: {
        const Point<Dim> rel = xb - center_;
        const double r = norm(rel);
        const double sign =
            (kind_ == ShapeKind::Annulus && std::abs(r - r_in_) < std::abs(r_out_ - r)) ? -1.0 : 1.0;
        return (sign / r) * rel;
      }
      case ShapeKind::Box: {
        Point<Dim> n{};
        std::size_t active = 0;
        for (std::size_t k = 0; k < Dim; ++k) {
          if (std::abs(xb[k] - lo_[k]) <= tolerance) {
            n[k] = -1.0;
            ++active;
          } else if (std::abs(xb[k] - hi_[k]) <= tolerance) {
            n[k] = 1.0;
            ++active;
          }
        }
        if (active != 1)
          throw Error(ErrorCode::NonSmoothPoint, "outward_normal: point is at a box corner or edge");
        return n;
      }
    }
    return Point<Dim>{};
  }

  /// Largest inscribed-ball radius.
  double inradius() const {
    switch (kind_) {
      case ShapeKind::Disk:
      case ShapeKind::Ball:
        return r_out_;
      case ShapeKind::Annulus:
        return 0.5 * (r_out_ - r_in_);
      case ShapeKind::Box: {
        double m = kHuge;
        for (std::size_t k = 0; k < Dim; ++k) m = std::min(m, 0.5 * (hi_[k] - lo_[k]));
        return m;
      }
    }
    return 0.0;
  }

  /// Exact Lebesgue measure.
  double measure() const {
    constexpr double pi = 3.14159265358979323846;
    switch (kind_) {
      case ShapeKind::Disk: return pi * r_out_ * r_out_;
      case ShapeKind::Annulus: return pi * (r_out_ * r_out_ - r_in_ * r_in_);
      case ShapeKind::Ball: return 4.0 / 3.0 * pi * r_out_ * r_out_ * r_out_;
      case ShapeKind::Box: {
        double v = 1.0;
        for (std::size_t k = 0; k < Dim; ++k) v *= hi_[k] - lo_[k];
        return v;
      }
    }
    return 0.0;
  }

  Point<Dim> bbox_lo() const {
    if (kind_ == ShapeKind::Box) return lo_;
    Point<Dim> p{};
    for (std::size_t k = 0; k < Dim; ++k) p[k] = center_[k] - r_out_;
    return p;
  }

  Point<Dim> bbox_hi() const {
    if (kind_ == ShapeKind::Box) return hi_;
    Point<Dim> p{};
    for (std::size_t k = 0; k < Dim; ++k) p[k] = center_[k] + r_out_;
    return p;
  }

  /// Smooth nonnegative polynomial that vanishes exactly on the boundary and
  /// is positive inside, scaled to O(1). Used for no-slip manufactured fields.
  double boundary_weight(const Point<Dim>& x) const {
    switch (kind_) {
      case ShapeKind::Disk:
      case ShapeKind::Ball: {
        const Point<Dim> rel = x - center_;
        return (r_out_ * r_out_ - dot(rel, rel)) / (r_out_ * r_out_);
      }
      case ShapeKind::Annulus: {
        const Point<Dim> rel = x - center_;
        const double r2 = dot(rel, rel);
        return (r2 - r_in_ * r_in_) * (r_out_ * r_out_ - r2) / (r_out_ * r_out_ * r_out_ * r_out_);
      }
      case ShapeKind::Box: {
        double w = 1.0;
        for (std::size_t k = 0; k < Dim; ++k) {
          const double len = hi_[k] - lo_[k];
          w *= 4.0 * (x[k] - lo_[k]) * (hi_[k] - x[k]) / (len * len);
        }
        return w;
      }
    }
    return 0.0;
  }

  Point<Dim> boundary_weight_gradient(const Point<Dim>& x) const {
    Point<Dim> g{};
    switch (kind_) {
      case ShapeKind::Disk:
      case ShapeKind::Ball: {
        const Point<Dim> rel = x - center_;
        return (-2.0 / (r_out_ * r_out_)) * rel;
      }
      case ShapeKind::Annulus: {
        const Point<Dim> rel = x - center_;
        const double r2 = dot(rel, rel);
        const double s = r_out_ * r_out_ * r_out_ * r_out_;
        const double dr2 = ((r_out_ * r_out_ - r2) - (r2 - r_in_ * r_in_)) / s;
        return (2.0 * dr2) * rel;
      }
      case ShapeKind::Box: {
        for (std::size_t j = 0; j < Dim; ++j) {
          double prod = 1.0;
          for (std::size_t k = 0; k < Dim; ++k) {
            const double len = hi_[k] - lo_[k];
            if (k == j)
              prod *= 4.0 * ((hi_[k] - x[k]) - (x[k] - lo_[k])) / (len * len);
            else
              prod *= 4.0 * (x[k] - lo_[k]) * (hi_[k] - x[k]) / (len * len);
          }
          g[j] = prod;
        }
        return g;
      }
    }
    return g;
  }

  std::string describe() const {
    std::string s = to_string(kind_);
    auto fmt = [](double v) { return std::to_string(v); };
    switch (kind_) {
      case ShapeKind::Disk:
      case ShapeKind::Ball:
        s += "(r=" + fmt(r_out_) + ")";
        break;
      case ShapeKind::Annulus:
        s += "(r_in=" + fmt(r_in_) + ",r_out=" + fmt(r_out_) + ")";
        break;
      case ShapeKind::Box:
        s += "(lo0=" + fmt(lo_[0]) + ",hi0=" + fmt(hi_[0]) + ")";
        break;
    }
    return s;
  }

 private:
  static constexpr double kHuge = std::numeric_limits<double>::max();

  explicit Domain(ShapeKind kind) : kind_(kind) {}

  static void require(bool ok, const char* msg) {
    if (!ok) throw Error(ErrorCode::InvalidArgument, msg);
  }

  ShapeKind kind_;
  Point<Dim> center_{};
  double r_in_ = 0.0;
  double r_out_ = 0.0;
  Point<Dim> lo_{};
  Point<Dim> hi_{};
};

}  // namespace cnsaudit
