#pragma once

#include "common/types.hpp"

#include <array>
#include <vector>

namespace morphopt::fem {

/// Symmetric rule on the reference triangle (0,0),(1,0),(0,1); weights sum to 1/2.
struct QuadratureRule {
  std::vector<Point2> points;
  std::vector<double> weights;
  int degree = 0;
};

/// Smallest available rule exact for polynomials of total degree `degree`
/// (available: 1, 2, 4, 6, 8).
const QuadratureRule& triangle_rule(int degree);

/// Values and reference gradients of the P1 (3) or P2 (6) Lagrange basis.
/// P2 numbering: vertices 0,1,2 then midpoints of edges (0,1), (1,2), (2,0).
struct RefBasis {
  int n = 0;
  std::array<double, 6> values{};
  std::array<Vec2, 6> grads{};
};

RefBasis reference_basis(int degree, const Point2& xhat);

/// Reference coordinates of the Lagrange nodes in local order.
const std::vector<Point2>& reference_nodes(int degree);

}  // namespace morphopt::fem
