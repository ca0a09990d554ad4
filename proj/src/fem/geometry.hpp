#pragma once

#include "fem/fe_space.hpp"
#include "fem/quadrature.hpp"

namespace morphopt::fem {

/// Geometry map F given by its coefficients on a vector Lagrange space.
struct GeometryView {
  const FeSpace& space;
  const Vector& coeffs;
};

/// Coefficients of the identity map on a vector space (the dof coordinates).
Vector identity_coefficients(const FeSpace& vector_space);

struct GeometryPoint {
  Point2 x;
  Mat2 J;  // D(F o G_K), row = component
  double det = 0.0;
};

/// F o G_K at reference point xhat of a cell. Does not check the sign of det.
GeometryPoint physical_geometry(const GeometryView& geo, int cell, const Point2& xhat);

/// Positions F(x_i) of the dofs of `space` (any degree) under the geometry map.
std::vector<Point2> mapped_dof_coords(const FeSpace& space, const GeometryView& geo);

/// Per-cell values at the points of a quadrature rule: physical points,
/// Jacobians, JxW and physical gradients of the P1 and P2 bases.
class CellValues {
 public:
  CellValues(const GeometryView& geo, int quad_degree);

  /// Throws InvertedElement if det J <= 0 at a quadrature point.
  void reinit(int cell);

  int cell() const { return cell_; }
  int num_points() const { return static_cast<int>(rule_.points.size()); }
  const QuadratureRule& rule() const { return rule_; }
  const Point2& point(int q) const { return x_[q]; }
  const Mat2& jacobian(int q) const { return J_[q]; }
  double det(int q) const { return det_[q]; }
  double JxW(int q) const { return jxw_[q]; }

  double shape(int degree, int i, int q) const { return ref_[degree - 1][q].values[i]; }
  const Vec2& grad(int degree, int i, int q) const { return grad_[degree - 1][q * 6 + i]; }

 private:
  const FeSpace& gspace_;
  const Vector& f_;
  const QuadratureRule& rule_;
  std::array<std::vector<RefBasis>, 2> ref_;
  int cell_ = -1;
  std::vector<Point2> x_;
  std::vector<Mat2> J_;
  std::vector<double> det_, jxw_;
  std::array<std::vector<Vec2>, 2> grad_;
};

}  // namespace morphopt::fem
