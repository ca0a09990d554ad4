#include "deform/deform.hpp"

#include <algorithm>
#include <limits>

namespace morphopt::deform {

DeformationState init_deformation(std::shared_ptr<const fem::FeSpace> space, const mesh::BoundaryGeometry& geometry) {
  if (!space || space->components() != 2) throw InvalidArgument("deformation needs a vector space");
  DeformationState st;
  st.space = space;
  st.f = fem::identity_coefficients(*space);
  const int nv = space->mesh().num_nodes();
  for (const auto& [tag, circle] : geometry) {
    if (!space->mesh().has_tag(tag)) throw InvalidArgument("geometry refers to unknown boundary tag '" + tag + "'");
    for (int i : space->boundary_dofs(tag)) {
      if (i < nv) continue;
      const Point2 p = circle.project(space->dof_coord(i));
      st.f[2 * i] = p.x();
      st.f[2 * i + 1] = p.y();
    }
  }
  st.f0 = st.f;
  return st;
}

SparseMatrix build_interpolation_matrix(const spline::SplineSpace& spline, const fem::FeSpace& space) {
  if (space.components() != 2) throw InvalidArgument("interpolation target must be a vector space");
  std::vector<Triplet> trip;
  for (int i = 0; i < space.num_scalar_dofs(); ++i) {
    spline.for_each_active(space.dof_coord(i), [&](int a, const spline::BasisValue& bv) {
      if (bv.value == 0.0) return;
      trip.emplace_back(2 * i, 2 * a, bv.value);
      trip.emplace_back(2 * i + 1, 2 * a + 1, bv.value);
    });
  }
  SparseMatrix I(space.num_dofs(), spline.dim());
  I.setFromTriplets(trip.begin(), trip.end());
  return I;
}

DeformationState apply_update(const DeformationState& state, const SparseMatrix& interp, const Vector& dt, double s) {
  if (dt.size() != interp.cols() || interp.rows() != state.f.size()) {
    throw InvalidArgument("apply_update: dimension mismatch");
  }
  DeformationState out = state;
  if (s != 0.0) out.f += s * (interp * dt);
  return out;
}

double min_det(const DeformationState& state, int quad_degree) {
  const fem::FeSpace& g = *state.space;
  const auto& rule = fem::triangle_rule(quad_degree);
  std::vector<Point2> pts = rule.points;
  for (const Point2& v : fem::reference_nodes(1)) pts.push_back(v);
  const fem::GeometryView view = state.view();
  double m = std::numeric_limits<double>::infinity();
  for (int c = 0; c < g.mesh().num_cells(); ++c) {
    const double detB = mesh::affine_map(g.mesh(), c).det();
    for (const Point2& xh : pts) m = std::min(m, fem::physical_geometry(view, c, xh).det / detB);
  }
  return m;
}

double min_det(const DeformationState& state, const SparseMatrix& interp, const Vector& dt, double s, int quad_degree) {
  return min_det(apply_update(state, interp, dt, s), quad_degree);
}

}  // namespace morphopt::deform
