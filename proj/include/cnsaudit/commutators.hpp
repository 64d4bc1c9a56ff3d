#pragma once

#include <string>
#include <vector>

#include "cnsaudit/csv.hpp"
#include "cnsaudit/mollify.hpp"

namespace cnsaudit {

struct CommutatorReport {
  double eps = 0.0;
  Axis axis = Axis::none();
  ExponentTriple exps;
  double lhs_norm = 0.0;
  double rhs_bound = 0.0;
  double ratio = 0.0;
  std::size_t chart = 0;  // 0 for interior and product reports

  void finish() { ratio = rhs_bound > 0.0 ? lhs_norm / rhs_bound : 0.0; }
};

inline CsvTable commutator_csv(const std::vector<CommutatorReport>& reports) {
  CsvTable t({"eps", "axis", "r", "r1", "r2", "lhs_norm", "rhs_bound", "ratio", "chart"});
  for (const auto& r : reports)
    t.row().add(r.eps).add(r.axis.name()).add(r.exps.r).add(r.exps.r1).add(r.exps.r2).add(r.lhs_norm).add(r.rhs_bound)
        .add(r.ratio).add(r.chart);
  return t;
}

namespace detail {

template <std::size_t Dim>
double norm_or_zero(const SpaceTimeField<Dim>& f, double p, const Region& region = {}) {
  try {
    return mixed_norm(f, p, p, region);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::EmptyRegion) return 0.0;
    throw;
  }
}

// Norm of the gradient magnitude of a scalar field.
template <std::size_t Dim>
double grad_norm(const SpaceTimeField<Dim>& rho, double p) {
  return norm_or_zero(gradient(rho), p);
}

template <std::size_t Dim>
std::vector<CommutatorReport> derivative_reports(const SpaceTimeField<Dim>& defect, const SpaceTimeField<Dim>& rho,
                                                 const SpaceTimeField<Dim>& u, double eps, const std::vector<Axis>& axes,
                                                 const ExponentTriple& exps, const Region& restrict_to,
                                                 bool add_gradient, std::size_t chart) {
  std::vector<CommutatorReport> out;
  const double u_norm = norm_or_zero(u, exps.r2);
  const double grad_rho = add_gradient ? grad_norm(rho, exps.r1) : 0.0;
  for (const Axis& axis : axes) {
    CommutatorReport rep;
    rep.eps = eps;
    rep.axis = axis;
    rep.exps = exps;
    rep.chart = chart;
    const SpaceTimeField<Dim> d = partial(defect, axis);
    const Region central = central_region(defect, axis);
    const Region region = [&](std::size_t n, std::size_t s) {
      return central(n, s) && (!restrict_to || restrict_to(n, s));
    };
    rep.lhs_norm = norm_or_zero(d, exps.r, region);
    rep.rhs_bound = u_norm * (norm_or_zero(partial(rho, axis), exps.r1) + grad_rho);
    rep.finish();
    out.push_back(rep);
  }
  return out;
}

template <std::size_t Dim>
void require_scalar_and_shape(const SpaceTimeField<Dim>& rho, const SpaceTimeField<Dim>& u) {
  if (rho.components() != 1) throw Error(ErrorCode::ShapeMismatch, "density must be scalar");
  if (rho.grid().num_nodes() != u.grid().num_nodes()) throw Error(ErrorCode::ShapeMismatch, "fields on different grids");
}

}  // namespace detail

/// Interior commutator d((rho u)^eps) - d(rho u^eps) for each axis, on the
/// mollifier-valid region shrunk by one stencil width along the axis.
/// rhs_bound = ||u||_{r2} ||d rho||_{r1} over the whole grid. A non-empty
/// `restrict_to` further limits the lhs region, e.g. to compare a ladder on
/// one common set.
template <std::size_t Dim>
std::vector<CommutatorReport> commutator_interior(const SpaceTimeField<Dim>& rho, const SpaceTimeField<Dim>& u,
                                                  const MollifierSpec& spec, const std::vector<Axis>& axes,
                                                  const ExponentTriple& exps, const Region& restrict_to = {}) {
  detail::require_scalar_and_shape(rho, u);
  const std::size_t C = u.components();
  const auto both = mollify_interior(stack(scale_by(rho, u), u), spec);
  const auto defect = subtract(components(both, 0, C), scale_by(rho, components(both, C, C)));
  return detail::derivative_reports(defect, rho, u, spec.eps, axes, exps, restrict_to, false, 0);
}

template <std::size_t Dim>
CommutatorReport commutator_interior(const SpaceTimeField<Dim>& rho, const SpaceTimeField<Dim>& u,
                                     const MollifierSpec& spec, Axis axis, const ExponentTriple& exps) {
  return commutator_interior(rho, u, spec, std::vector<Axis>{axis}, exps).front();
}

/// Shifted-chart commutator d((rho u)~_i^eps - rho u~_i^eps) on V_i.
/// rhs_bound = ||u||_{r2} (||d rho||_{r1} + ||grad rho||_{r1}); no constant
/// is asserted, the ratio is only reported.
template <std::size_t Dim>
std::vector<CommutatorReport> commutator_shifted(const SpaceTimeField<Dim>& rho, const SpaceTimeField<Dim>& u,
                                                 const MollifierSpec& spec, const BoundaryChart<Dim>& chart,
                                                 const std::vector<Axis>& axes, const ExponentTriple& exps,
                                                 const Region& restrict_to = {}) {
  detail::require_scalar_and_shape(rho, u);
  const std::size_t C = u.components();
  const Grid<Dim>& g = u.grid();
  const auto both = mollify_shifted(stack(scale_by(rho, u), u), spec, chart, 2.0 * g.max_spacing());
  const auto defect = subtract(components(both, 0, C), scale_by(rho, components(both, C, C)));
  const Region in_chart = [&](std::size_t n, std::size_t s) {
    return chart.in_chart_set(g.point(s), g.domain()) && (!restrict_to || restrict_to(n, s));
  };
  return detail::derivative_reports(defect, rho, u, spec.eps, axes, exps, in_chart, true, chart.index);
}

/// Product commutator (f g)^eps - f g^eps without a derivative, on the
/// mollifier-valid region; rhs_bound = ||f||_{r1} ||g||_{r2}.
template <std::size_t Dim>
CommutatorReport commutator_product(const SpaceTimeField<Dim>& f, const SpaceTimeField<Dim>& g,
                                    const MollifierSpec& spec, const ExponentTriple& exps,
                                    const Region& restrict_to = {}) {
  detail::require_scalar_and_shape(f, g);
  const std::size_t C = g.components();
  const auto both = mollify_interior(stack(scale_by(f, g), g), spec);
  const auto defect = subtract(components(both, 0, C), scale_by(f, components(both, C, C)));
  CommutatorReport rep;
  rep.eps = spec.eps;
  rep.exps = exps;
  rep.lhs_norm = detail::norm_or_zero(defect, exps.r, restrict_to);
  rep.rhs_bound = detail::norm_or_zero(f, exps.r1) * detail::norm_or_zero(g, exps.r2);
  rep.finish();
  return rep;
}

}  // namespace cnsaudit
