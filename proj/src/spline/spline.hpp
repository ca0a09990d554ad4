#pragma once

#include "common/types.hpp"
#include "mesh/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

namespace morphopt::spline {

/// Uniform grid over the hold-all box carrying cardinal B-splines of one degree.
struct SplineGrid {
  mesh::Rect box;
  int nx = 4;
  int ny = 4;
  int degree = 2;

  double hx() const { return box.width() / nx; }
  double hy() const { return box.height() / ny; }
};

/// Cardinal B-spline of degree p on the integer knots 0..p+1, Cox–de Boor
/// recursion. At a knot the degree-0 piece takes the mean of its one-sided
/// values, which makes the derivative of the linear hat vanish at its peak.
double cardinal_bspline(int p, double t);
double cardinal_bspline_derivative(int p, double t);

struct BasisValue {
  double value = 0.0;
  Vec2 gradient = Vec2::Zero();
};

/// Tensor-product spline space restricted to the basis functions whose support
/// lies inside the closed box, so every member vanishes on the box boundary.
/// Active scalar function a sits at grid index (ix, iy) with a = iy*(nx-p)+ix;
/// vector coefficient k = 2a + c for component c.
class SplineSpace {
 public:
  explicit SplineSpace(const SplineGrid& grid);

  const SplineGrid& grid() const { return grid_; }
  int degree() const { return grid_.degree; }
  int active_x() const { return grid_.nx - grid_.degree; }
  int active_y() const { return grid_.ny - grid_.degree; }
  int num_active() const { return active_x() * active_y(); }
  /// Vector dimension N = 2 * num_active().
  int dim() const { return 2 * num_active(); }

  std::array<int, 2> active_index(int a) const { return {a % active_x(), a / active_x()}; }

  BasisValue eval_basis(int a, const Point2& x) const;

  /// Any tensor basis function of the full (unrestricted) space; ix, iy may
  /// range over -p..n-1.
  BasisValue eval_full_basis(int ix, int iy, const Point2& x) const;

  /// Calls f(a, BasisValue) for every active function that is nonzero (or has
  /// nonzero gradient) at x. Points outside the closed box see none.
  template <class F>
  void for_each_active(const Point2& x, F&& f) const;

  /// Vector field sum_k coeffs[k] q_k(x); optional Jacobian (row = component).
  Vec2 eval_field(const Vector& coeffs, const Point2& x, Mat2* jacobian = nullptr) const;

 private:
  SplineGrid grid_;
};

SplineSpace build_spline_space(const SplineGrid& grid);

/// H1(D) Gram matrix of the vector space: integral of grad q_k : grad q_l + q_k . q_l,
/// (p+1)^2-point tensor Gauss per grid cell. Components do not couple.
SparseMatrix gram_h1(const SplineSpace& space);

template <class F>
void SplineSpace::for_each_active(const Point2& x, F&& f) const {
  const auto& box = grid_.box;
  if (!box.contains(x)) return;
  const int p = grid_.degree;
  const double hx = grid_.hx(), hy = grid_.hy();
  const double tx = (x.x() - box.xmin) / hx, ty = (x.y() - box.ymin) / hy;
  const int cx = static_cast<int>(std::floor(tx)), cy = static_cast<int>(std::floor(ty));
  // One extra index on each side catches one-sided gradients on knot lines.
  const int ix0 = std::max(0, cx - p - 1), ix1 = std::min(active_x() - 1, cx + 1);
  const int iy0 = std::max(0, cy - p - 1), iy1 = std::min(active_y() - 1, cy + 1);
  for (int iy = iy0; iy <= iy1; ++iy) {
    const double vy = cardinal_bspline(p, ty - iy), dy = cardinal_bspline_derivative(p, ty - iy) / hy;
    if (vy == 0.0 && dy == 0.0) continue;
    for (int ix = ix0; ix <= ix1; ++ix) {
      const double vx = cardinal_bspline(p, tx - ix), dx = cardinal_bspline_derivative(p, tx - ix) / hx;
      if (vx == 0.0 && dx == 0.0) continue;
      BasisValue bv;
      bv.value = vx * vy;
      bv.gradient = Vec2(dx * vy, vx * dy);
      if (bv.value == 0.0 && bv.gradient.isZero(0.0)) continue;
      f(iy * active_x() + ix, bv);
    }
  }
}

}  // namespace morphopt::spline
