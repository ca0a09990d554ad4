#include "spline/spline.hpp"

#include "common/gauss.hpp"

namespace morphopt::spline {

namespace {

double bspline0(double t) {
  if (t > 0.0 && t < 1.0) return 1.0;
  if (t == 0.0 || t == 1.0) return 0.5;
  return 0.0;
}

}  // namespace

double cardinal_bspline(int p, double t) {
  if (p == 0) return bspline0(t);
  if (t < 0.0 || t > p + 1.0) return 0.0;
  return (t * cardinal_bspline(p - 1, t) + (p + 1.0 - t) * cardinal_bspline(p - 1, t - 1.0)) / p;
}

double cardinal_bspline_derivative(int p, double t) {
  if (p == 0) return 0.0;
  if (t < 0.0 || t > p + 1.0) return 0.0;
  return cardinal_bspline(p - 1, t) - cardinal_bspline(p - 1, t - 1.0);
}

SplineSpace::SplineSpace(const SplineGrid& grid) : grid_(grid) {
  const int p = grid.degree;
  if (p < 1 || p > 3) throw InvalidArgument("spline degree must be 1, 2 or 3");
  if (grid.nx <= p || grid.ny <= p) {
    throw InvalidArgument("spline grid needs more than p cells per axis (got " + std::to_string(grid.nx) + "x" +
                          std::to_string(grid.ny) + " for degree " + std::to_string(p) + ")");
  }
  if (!(grid.box.width() > 0.0 && grid.box.height() > 0.0)) throw InvalidArgument("empty spline box");
}

BasisValue SplineSpace::eval_full_basis(int ix, int iy, const Point2& x) const {
  const int p = grid_.degree;
  const double hx = grid_.hx(), hy = grid_.hy();
  const double tx = (x.x() - grid_.box.xmin) / hx - ix, ty = (x.y() - grid_.box.ymin) / hy - iy;
  const double vx = cardinal_bspline(p, tx), vy = cardinal_bspline(p, ty);
  BasisValue bv;
  bv.value = vx * vy;
  bv.gradient = Vec2(cardinal_bspline_derivative(p, tx) / hx * vy, vx * cardinal_bspline_derivative(p, ty) / hy);
  return bv;
}

BasisValue SplineSpace::eval_basis(int a, const Point2& x) const {
  if (a < 0 || a >= num_active()) throw InvalidArgument("active spline index out of range");
  if (!grid_.box.contains(x)) return {};
  const auto [ix, iy] = active_index(a);
  return eval_full_basis(ix, iy, x);
}

Vec2 SplineSpace::eval_field(const Vector& coeffs, const Point2& x, Mat2* jacobian) const {
  if (static_cast<int>(coeffs.size()) != dim()) {
    throw InvalidArgument("eval_field: expected " + std::to_string(dim()) + " coefficients, got " +
                          std::to_string(coeffs.size()));
  }
  Vec2 v = Vec2::Zero();
  Mat2 J = Mat2::Zero();
  for_each_active(x, [&](int a, const BasisValue& bv) {
    for (int c = 0; c < 2; ++c) {
      const double w = coeffs[2 * a + c];
      v[c] += w * bv.value;
      J.row(c) += w * bv.gradient.transpose();
    }
  });
  if (jacobian) *jacobian = J;
  return v;
}

SplineSpace build_spline_space(const SplineGrid& grid) { return SplineSpace(grid); }

SparseMatrix gram_h1(const SplineSpace& space) {
  const auto& g = space.grid();
  const int p = g.degree;
  const double hx = g.hx(), hy = g.hy();
  const GaussRule1D rule = gauss_legendre(p + 1);
  const int nq = static_cast<int>(rule.points.size());
  const int ax = space.active_x(), ay = space.active_y();

  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(g.nx) * g.ny * (p + 1) * (p + 1) * (p + 1) * (p + 1) * 2);

  // Univariate values/derivatives at the Gauss points of one cell, for the
  // p+1 basis functions overlapping it: local j <-> index cx - p + j.
  std::vector<double> val(nq * (p + 1)), der(nq * (p + 1));
  for (int q = 0; q < nq; ++q) {
    for (int j = 0; j <= p; ++j) {
      const double t = rule.points[q] + (p - j);
      val[q * (p + 1) + j] = cardinal_bspline(p, t);
      der[q * (p + 1) + j] = cardinal_bspline_derivative(p, t);
    }
  }

  const int nloc = (p + 1) * (p + 1);
  std::vector<double> local(nloc * nloc);
  std::vector<int> ids(nloc);
  for (int cy = 0; cy < g.ny; ++cy) {
    for (int cx = 0; cx < g.nx; ++cx) {
      std::fill(local.begin(), local.end(), 0.0);
      for (int jy = 0; jy <= p; ++jy) {
        for (int jx = 0; jx <= p; ++jx) {
          const int ix = cx - p + jx, iy = cy - p + jy;
          ids[jy * (p + 1) + jx] = (ix >= 0 && ix < ax && iy >= 0 && iy < ay) ? iy * ax + ix : -1;
        }
      }
      for (int qy = 0; qy < nq; ++qy) {
        for (int qx = 0; qx < nq; ++qx) {
          const double w = rule.weights[qx] * rule.weights[qy] * hx * hy;
          for (int i = 0; i < nloc; ++i) {
            if (ids[i] < 0) continue;
            const int ix = i % (p + 1), iy = i / (p + 1);
            const double vi = val[qx * (p + 1) + ix] * val[qy * (p + 1) + iy];
            const double gxi = der[qx * (p + 1) + ix] / hx * val[qy * (p + 1) + iy];
            const double gyi = val[qx * (p + 1) + ix] * der[qy * (p + 1) + iy] / hy;
            for (int j = 0; j < nloc; ++j) {
              if (ids[j] < 0) continue;
              const int jx = j % (p + 1), jy = j / (p + 1);
              const double vj = val[qx * (p + 1) + jx] * val[qy * (p + 1) + jy];
              const double gxj = der[qx * (p + 1) + jx] / hx * val[qy * (p + 1) + jy];
              const double gyj = val[qx * (p + 1) + jx] * der[qy * (p + 1) + jy] / hy;
              local[i * nloc + j] += w * (gxi * gxj + gyi * gyj + vi * vj);
            }
          }
        }
      }
      for (int i = 0; i < nloc; ++i) {
        if (ids[i] < 0) continue;
        for (int j = 0; j < nloc; ++j) {
          if (ids[j] < 0) continue;
          for (int c = 0; c < 2; ++c) triplets.emplace_back(2 * ids[i] + c, 2 * ids[j] + c, local[i * nloc + j]);
        }
      }
    }
  }
  SparseMatrix K(space.dim(), space.dim());
  K.setFromTriplets(triplets.begin(), triplets.end());
  return K;
}

}  // namespace morphopt::spline
