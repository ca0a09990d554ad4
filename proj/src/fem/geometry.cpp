#include "fem/geometry.hpp"

namespace morphopt::fem {

Vector identity_coefficients(const FeSpace& space) {
  if (space.components() != 2) throw InvalidArgument("geometry space must have 2 components");
  Vector f(space.num_dofs());
  for (int i = 0; i < space.num_scalar_dofs(); ++i) {
    f[2 * i] = space.dof_coord(i).x();
    f[2 * i + 1] = space.dof_coord(i).y();
  }
  return f;
}

GeometryPoint physical_geometry(const GeometryView& geo, int cell, const Point2& xhat) {
  const RefBasis b = reference_basis(geo.space.degree(), xhat);
  const auto dofs = geo.space.cell_dofs(cell);
  GeometryPoint g;
  g.x.setZero();
  g.J.setZero();
  for (int a = 0; a < b.n; ++a) {
    const Vec2 fa(geo.coeffs[2 * dofs[a]], geo.coeffs[2 * dofs[a] + 1]);
    g.x += b.values[a] * fa;
    g.J += fa * b.grads[a].transpose();
  }
  g.det = g.J.determinant();
  return g;
}

std::vector<Point2> mapped_dof_coords(const FeSpace& space, const GeometryView& geo) {
  if (space.mesh_ptr() != geo.space.mesh_ptr()) throw InvalidArgument("spaces live on different meshes");
  if (space.degree() == geo.space.degree()) {
    std::vector<Point2> out(space.num_scalar_dofs());
    for (int i = 0; i < space.num_scalar_dofs(); ++i) out[i] = Point2(geo.coeffs[2 * i], geo.coeffs[2 * i + 1]);
    return out;
  }
  const auto& nodes = reference_nodes(space.degree());
  std::vector<Point2> out(space.num_scalar_dofs());
  for (int i = 0; i < space.num_scalar_dofs(); ++i) {
    const auto [cell, local] = space.dof_support(i);
    out[i] = physical_geometry(geo, cell, nodes[local]).x;
  }
  return out;
}

CellValues::CellValues(const GeometryView& geo, int quad_degree)
    : gspace_(geo.space), f_(geo.coeffs), rule_(triangle_rule(quad_degree)) {
  if (gspace_.components() != 2) throw InvalidArgument("geometry space must have 2 components");
  if (f_.size() != gspace_.num_dofs()) throw InvalidArgument("geometry coefficient length mismatch");
  const int nq = num_points();
  for (int d = 0; d < 2; ++d) {
    ref_[d].resize(nq);
    for (int q = 0; q < nq; ++q) ref_[d][q] = reference_basis(d + 1, rule_.points[q]);
    grad_[d].resize(static_cast<std::size_t>(nq) * 6);
  }
  x_.resize(nq);
  J_.resize(nq);
  det_.resize(nq);
  jxw_.resize(nq);
}

void CellValues::reinit(int cell) {
  cell_ = cell;
  const auto dofs = gspace_.cell_dofs(cell);
  const auto& gref = ref_[gspace_.degree() - 1];
  for (int q = 0; q < num_points(); ++q) {
    Point2 x = Point2::Zero();
    Mat2 J = Mat2::Zero();
    const RefBasis& b = gref[q];
    for (int a = 0; a < b.n; ++a) {
      const Vec2 fa(f_[2 * dofs[a]], f_[2 * dofs[a] + 1]);
      x += b.values[a] * fa;
      J += fa * b.grads[a].transpose();
    }
    const double det = J.determinant();
    if (!(det > 0.0)) throw InvertedElement(cell, det);
    x_[q] = x;
    J_[q] = J;
    det_[q] = det;
    jxw_[q] = rule_.weights[q] * det;
    // Inverse transpose of J for the gradient pullback.
    Mat2 Jit;
    Jit << J(1, 1), -J(1, 0), -J(0, 1), J(0, 0);
    Jit /= det;
    for (int d = 0; d < 2; ++d) {
      const RefBasis& r = ref_[d][q];
      for (int i = 0; i < r.n; ++i) grad_[d][q * 6 + i] = Jit * r.grads[i];
    }
  }
}

}  // namespace morphopt::fem
