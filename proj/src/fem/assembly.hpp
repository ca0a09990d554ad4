#pragma once

#include "fem/fe_space.hpp"
#include "fem/geometry.hpp"

#include <functional>

namespace morphopt::fem {

using ScalarFunction = std::function<double(const Point2&)>;
using VectorFunction = std::function<Vec2(const Point2&)>;

/// Quadrature degree used for a state space of degree p: 2p + 2.
inline int quadrature_degree(int p) { return 2 * p + 2; }

/// a * (grad u, grad v) + b * (u, v) on a scalar space, or componentwise on a
/// vector space.
SparseMatrix assemble_diffusion_reaction(const FeSpace& space, const GeometryView& geo, double a, double b);

inline SparseMatrix assemble_laplace(const FeSpace& space, const GeometryView& geo) {
  return assemble_diffusion_reaction(space, geo, 1.0, 0.0);
}
inline SparseMatrix assemble_mass(const FeSpace& space, const GeometryView& geo) {
  return assemble_diffusion_reaction(space, geo, 0.0, 1.0);
}

/// (2 mu e(u) + lambda tr e(u) I) : e(v) on a vector space.
SparseMatrix assemble_elasticity(const FeSpace& space, const GeometryView& geo, double lambda, double mu);

/// Symmetric Stokes block system for unknowns [u; p; m]:
///   [ A   -B^T  0 ]
///   [ -B   0    c ]
///   [ 0    c^T  0 ]
/// with A the vector Laplacian, B_{q,v} = (q, div v) and c_q = (q, 1); the
/// last row enforces zero mean pressure. Without `zero_mean` the system is
/// the leading [u; p] block (pressure fixed by a natural boundary).
SparseMatrix assemble_stokes(const FeSpace& velocity, const FeSpace& pressure, const GeometryView& geo,
                             bool zero_mean = true);

/// (f, v) on a scalar space.
Vector assemble_load(const FeSpace& space, const GeometryView& geo, const ScalarFunction& f);

/// (g, v) over the boundary edges carrying `tag`, 3-point Gauss per edge on the
/// mapped (possibly curved) edge. Scalar or vector space (g per component).
Vector assemble_boundary_load(const FeSpace& space, const GeometryView& geo, const VectorFunction& g,
                              const std::string& tag);

}  // namespace morphopt::fem
