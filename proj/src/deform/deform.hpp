#pragma once

#include "fem/fe_space.hpp"
#include "fem/geometry.hpp"
#include "mesh/mesh.hpp"
#include "spline/spline.hpp"

#include <memory>

namespace morphopt::deform {

/// Coefficients of the current geometry map F^(k) and of F^(0) on a vector
/// Lagrange space over the initial mesh.
struct DeformationState {
  std::shared_ptr<const fem::FeSpace> space;
  Vector f;
  Vector f0;

  fem::GeometryView view() const { return {*space, f}; }
};

/// F^(0): the identity, with the non-vertex dofs of boundary edges whose tag has
/// an analytic curve in `geometry` projected onto that curve.
DeformationState init_deformation(std::shared_ptr<const fem::FeSpace> space, const mesh::BoundaryGeometry& geometry);

/// I_h: row 2i+c, column 2a+c holds q_a(x_i) for the initial dof coordinate x_i.
/// Rows of dofs outside the box are empty.
SparseMatrix build_interpolation_matrix(const spline::SplineSpace& spline, const fem::FeSpace& space);

/// f' = f + s * I_h dt.
DeformationState apply_update(const DeformationState& state, const SparseMatrix& interp, const Vector& dt, double s);

/// Minimum over cells of det D(F o G_K) / det B_K, sampled at the points of
/// the degree-`quad_degree` rule and at the cell vertices.
double min_det(const DeformationState& state, int quad_degree);
double min_det(const DeformationState& state, const SparseMatrix& interp, const Vector& dt, double s, int quad_degree);

}  // namespace morphopt::deform
