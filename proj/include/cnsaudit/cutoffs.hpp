#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "cnsaudit/csv.hpp"
#include "cnsaudit/fields.hpp"

namespace cnsaudit {

/// Boundary cut-off phi_delta(x) = chi(dist(x)/delta), chi the cubic
/// smoothstep. Value and gradient come from the signed distance directly,
/// never from differencing samples.
template <std::size_t Dim>
class SpatialCutoff {
 public:
  SpatialCutoff(const Domain<Dim>& domain, double delta) : domain_(domain), delta_(delta) {
    if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must be positive");
    if (!(delta < domain.inradius())) throw Error(ErrorCode::DeltaTooLarge, "delta must be below the inradius");
  }

  double delta() const { return delta_; }
  const Domain<Dim>& domain() const { return domain_; }

  double value(const Point<Dim>& x) const { return cubic_step(domain_.signed_distance(x) / delta_); }

  Point<Dim> gradient(const Point<Dim>& x) const {
    const double s = domain_.signed_distance(x) / delta_;
    const double d = cubic_step_derivative(s) / delta_;
    if (d == 0.0) return Point<Dim>{};
    return d * domain_.distance_gradient(x);
  }

  /// phi and grad phi at every spatial node (zero outside the mask).
  struct Samples {
    std::vector<double> phi;
    std::vector<Point<Dim>> grad;
  };

  Samples sample(const Grid<Dim>& g) const {
    Samples out{std::vector<double>(g.num_space(), 0.0), std::vector<Point<Dim>>(g.num_space(), Point<Dim>{})};
    for (std::size_t s = 0; s < g.num_space(); ++s) {
      if (!g.masked(s)) continue;
      out.phi[s] = value(g.point(s));
      out.grad[s] = gradient(g.point(s));
    }
    return out;
  }

  /// max over interior nodes of |grad phi| * dist.
  double max_grad_times_dist(const Grid<Dim>& g) const {
    double m = 0.0;
    for (std::size_t s = 0; s < g.num_space(); ++s) {
      const double sd = g.signed_distance(s);
      if (!g.masked(s) || sd <= 0.0) continue;
      m = std::max(m, norm(gradient(g.point(s))) * sd);
    }
    return m;
  }

 private:
  Domain<Dim> domain_;
  double delta_;
};

template <std::size_t Dim>
SpatialCutoff<Dim> build_spatial_cutoff(const Domain<Dim>& domain, double delta) {
  return SpatialCutoff<Dim>(domain, delta);
}

/// Constraint sweep over a ladder of delta values on one grid.
template <std::size_t Dim>
CsvTable cutoff_sweep(const Grid<Dim>& g, const std::vector<double>& deltas, double bound = 2.0) {
  CsvTable t({"delta", "max_grad_times_dist", "pass"});
  for (double d : deltas) {
    const double m = build_spatial_cutoff(g.domain(), d).max_grad_times_dist(g);
    t.row().add(d).add(m).add(m <= bound);
  }
  return t;
}

/// Temporal test weight on [t_lo, t_hi].
///
/// smooth(tau): C^1 bump made of two cubic-smoothstep ramps, compactly
/// supported in (tau, T - tau). trapezoid(tau, alpha, t0): 0 before tau, ramps
/// up over [tau, tau + alpha], 1 until t0, ramps down over [t0, t0 + alpha].
class TemporalWeight {
 public:
  enum class Kind { Smooth, Trapezoid };

  static TemporalWeight smooth(double tau, double t_hi, double t_lo = 0.0) {
    const double T = t_hi - t_lo;
    if (!(tau > 0.0) || !(2.0 * tau < T)) throw Error(ErrorCode::BadWindow, "smooth weight needs 0 < tau < T/2");
    TemporalWeight w(Kind::Smooth, t_lo, t_hi);
    w.tau_ = tau;
    const double span = T - 2.0 * tau;
    w.ramp_start_ = t_lo + tau + 0.05 * span;
    w.ramp_width_ = 0.25 * span;
    return w;
  }

  static TemporalWeight trapezoid(double tau, double alpha, double t0, double t_hi, double t_lo = 0.0) {
    if (!(alpha > 0.0) || !(tau >= t_lo) || !(tau + alpha < t0) || !(t0 + alpha <= t_hi + 1e-12))
      throw Error(ErrorCode::BadWindow, "trapezoid needs tau + alpha < t0 and t0 + alpha <= T");
    TemporalWeight w(Kind::Trapezoid, t_lo, t_hi);
    w.tau_ = tau;
    w.alpha_ = alpha;
    w.t0_ = t0;
    return w;
  }

  Kind kind() const { return kind_; }
  double tau() const { return tau_; }
  double alpha() const { return alpha_; }
  double t0() const { return t0_; }

  double value(double t) const {
    if (kind_ == Kind::Trapezoid) {
      if (t <= tau_ || t >= t0_ + alpha_) return 0.0;
      if (t < tau_ + alpha_) return (t - tau_) / alpha_;
      if (t <= t0_) return 1.0;
      return (t0_ + alpha_ - t) / alpha_;
    }
    const double a = ramp_start_, w = ramp_width_;
    return cubic_step((t - a) / w) * cubic_step((t_hi_ + t_lo_ - a - t) / w);
  }

  double derivative(double t) const {
    if (kind_ == Kind::Trapezoid) {
      if (t <= tau_ || t >= t0_ + alpha_) return 0.0;
      if (t < tau_ + alpha_) return 1.0 / alpha_;
      if (t <= t0_) return 0.0;
      return -1.0 / alpha_;
    }
    const double a = ramp_start_, w = ramp_width_;
    const double up = (t - a) / w, down = (t_hi_ + t_lo_ - a - t) / w;
    return (cubic_step_derivative(up) * cubic_step(down) - cubic_step(up) * cubic_step_derivative(down)) / w;
  }

  /// Closed interval outside which the weight vanishes.
  std::array<double, 2> support() const {
    if (kind_ == Kind::Trapezoid) return {tau_, t0_ + alpha_};
    return {ramp_start_, t_hi_ + t_lo_ - ramp_start_};
  }

  /// Points where the weight or its derivative has a kink.
  std::vector<double> breakpoints() const {
    if (kind_ == Kind::Trapezoid) return {tau_, tau_ + alpha_, t0_, t0_ + alpha_};
    const double a = ramp_start_, w = ramp_width_, b = t_hi_ + t_lo_ - a;
    return {a, a + w, b - w, b};
  }

  /// Weights q_n with sum_n q_n g_n = int w(t) I[g](t) dt, where I[g] is the
  /// piecewise-linear interpolant of samples g_n at `times` and w is the
  /// weight (or its derivative). Exact: each cell is split at the
  /// breakpoints and integrated by 3-point Gauss-Legendre.
  std::vector<double> quadrature(const std::vector<double>& times, bool use_derivative) const {
    static const double gx[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
    static const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    std::vector<double> q(times.size(), 0.0);
    const auto bps = breakpoints();
    for (std::size_t n = 0; n + 1 < times.size(); ++n) {
      const double a = times[n], b = times[n + 1];
      std::vector<double> cuts{a};
      for (double p : bps)
        if (p > a && p < b) cuts.push_back(p);
      cuts.push_back(b);
      for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
        const double lo = cuts[j], hi = cuts[j + 1], half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
        for (int k = 0; k < 3; ++k) {
          const double t = mid + half * gx[k];
          const double v = (use_derivative ? derivative(t) : value(t)) * gw[k] * half;
          const double theta = (t - a) / (b - a);
          q[n] += v * (1.0 - theta);
          q[n + 1] += v * theta;
        }
      }
    }
    return q;
  }

 private:
  TemporalWeight(Kind kind, double t_lo, double t_hi) : kind_(kind), t_lo_(t_lo), t_hi_(t_hi) {}

  Kind kind_;
  double t_lo_;
  double t_hi_;
  double tau_ = 0.0;
  double alpha_ = 0.0;
  double t0_ = 0.0;
  double ramp_start_ = 0.0;
  double ramp_width_ = 0.0;
};

inline std::vector<double> grid_times(std::size_t n_t, double t_start, double dt) {
  std::vector<double> t(n_t);
  for (std::size_t n = 0; n < n_t; ++n) t[n] = t_start + static_cast<double>(n) * dt;
  return t;
}

template <std::size_t Dim>
std::vector<double> grid_times(const Grid<Dim>& g) {
  return grid_times(g.n_t(), g.t_start(), g.dt());
}

}  // namespace cnsaudit
