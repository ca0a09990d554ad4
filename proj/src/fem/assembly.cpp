#include "fem/assembly.hpp"

#include "common/gauss.hpp"

namespace morphopt::fem {

namespace {

void check_compatible(const FeSpace& space, const GeometryView& geo) {
  if (space.mesh_ptr() != geo.space.mesh_ptr()) throw InvalidArgument("incompatible spaces: different meshes");
  if (geo.space.components() != 2) throw InvalidArgument("geometry space must have 2 components");
}

}  // namespace

SparseMatrix assemble_diffusion_reaction(const FeSpace& space, const GeometryView& geo, double a, double b) {
  check_compatible(space, geo);
  const int p = space.degree(), nc = space.components(), k = space.dofs_per_cell();
  CellValues cv(geo, quadrature_degree(p));
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(space.mesh().num_cells()) * k * k * nc);
  std::vector<double> local(k * k);
  for (int c = 0; c < space.mesh().num_cells(); ++c) {
    cv.reinit(c);
    std::fill(local.begin(), local.end(), 0.0);
    for (int q = 0; q < cv.num_points(); ++q) {
      const double w = cv.JxW(q);
      for (int i = 0; i < k; ++i) {
        const Vec2& gi = cv.grad(p, i, q);
        const double vi = cv.shape(p, i, q);
        for (int j = 0; j < k; ++j) {
          local[i * k + j] += w * (a * gi.dot(cv.grad(p, j, q)) + b * vi * cv.shape(p, j, q));
        }
      }
    }
    const auto dofs = space.cell_dofs(c);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        for (int comp = 0; comp < nc; ++comp)
          trip.emplace_back(space.dof(dofs[i], comp), space.dof(dofs[j], comp), local[i * k + j]);
  }
  SparseMatrix A(space.num_dofs(), space.num_dofs());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

SparseMatrix assemble_elasticity(const FeSpace& space, const GeometryView& geo, double lambda, double mu) {
  check_compatible(space, geo);
  if (space.components() != 2) throw InvalidArgument("elasticity needs a vector space");
  const int p = space.degree(), k = space.dofs_per_cell(), n = 2 * k;
  CellValues cv(geo, quadrature_degree(p));
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(space.mesh().num_cells()) * n * n);
  std::vector<double> local(n * n);
  for (int c = 0; c < space.mesh().num_cells(); ++c) {
    cv.reinit(c);
    std::fill(local.begin(), local.end(), 0.0);
    for (int q = 0; q < cv.num_points(); ++q) {
      const double w = cv.JxW(q);
      for (int i = 0; i < k; ++i) {
        const Vec2& gi = cv.grad(p, i, q);
        for (int j = 0; j < k; ++j) {
          const Vec2& gj = cv.grad(p, j, q);
          const double gg = gi.dot(gj);
          for (int ci = 0; ci < 2; ++ci)
            for (int cj = 0; cj < 2; ++cj) {
              const double v = mu * ((ci == cj ? gg : 0.0) + gi[cj] * gj[ci]) + lambda * gi[ci] * gj[cj];
              local[(2 * i + ci) * n + 2 * j + cj] += w * v;
            }
        }
      }
    }
    const auto dofs = space.cell_dofs(c);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) trip.emplace_back(2 * dofs[i / 2] + i % 2, 2 * dofs[j / 2] + j % 2, local[i * n + j]);
  }
  SparseMatrix A(space.num_dofs(), space.num_dofs());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

SparseMatrix assemble_stokes(const FeSpace& velocity, const FeSpace& pressure, const GeometryView& geo,
                             bool zero_mean) {
  check_compatible(velocity, geo);
  check_compatible(pressure, geo);
  if (velocity.components() != 2 || pressure.components() != 1) {
    throw InvalidArgument("stokes needs a vector velocity and a scalar pressure space");
  }
  const int pu = velocity.degree(), pp = pressure.degree();
  const int ku = velocity.dofs_per_cell(), kp = pressure.dofs_per_cell();
  const int nu = velocity.num_dofs(), np = pressure.num_dofs();
  CellValues cv(geo, quadrature_degree(pu));
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(velocity.mesh().num_cells()) * (2 * ku * ku + 4 * ku * kp + kp * 2));
  std::vector<double> A(ku * ku), B(kp * 2 * ku), m(kp);
  for (int c = 0; c < velocity.mesh().num_cells(); ++c) {
    cv.reinit(c);
    std::fill(A.begin(), A.end(), 0.0);
    std::fill(B.begin(), B.end(), 0.0);
    std::fill(m.begin(), m.end(), 0.0);
    for (int q = 0; q < cv.num_points(); ++q) {
      const double w = cv.JxW(q);
      for (int i = 0; i < ku; ++i)
        for (int j = 0; j < ku; ++j) A[i * ku + j] += w * cv.grad(pu, i, q).dot(cv.grad(pu, j, q));
      for (int r = 0; r < kp; ++r) {
        const double psi = cv.shape(pp, r, q);
        m[r] += w * psi;
        for (int j = 0; j < ku; ++j)
          for (int d = 0; d < 2; ++d) B[r * 2 * ku + 2 * j + d] += w * psi * cv.grad(pu, j, q)[d];
      }
    }
    const auto ud = velocity.cell_dofs(c);
    const auto pd = pressure.cell_dofs(c);
    for (int i = 0; i < ku; ++i)
      for (int j = 0; j < ku; ++j)
        for (int d = 0; d < 2; ++d) trip.emplace_back(2 * ud[i] + d, 2 * ud[j] + d, A[i * ku + j]);
    for (int r = 0; r < kp; ++r) {
      const int row = nu + pd[r];
      for (int j = 0; j < ku; ++j)
        for (int d = 0; d < 2; ++d) {
          const double v = -B[r * 2 * ku + 2 * j + d];
          trip.emplace_back(row, 2 * ud[j] + d, v);
          trip.emplace_back(2 * ud[j] + d, row, v);
        }
      if (zero_mean) {
        trip.emplace_back(row, nu + np, m[r]);
        trip.emplace_back(nu + np, row, m[r]);
      }
    }
  }
  const int n = nu + np + (zero_mean ? 1 : 0);
  SparseMatrix S(n, n);
  S.setFromTriplets(trip.begin(), trip.end());
  return S;
}

Vector assemble_load(const FeSpace& space, const GeometryView& geo, const ScalarFunction& f) {
  check_compatible(space, geo);
  if (space.components() != 1) throw InvalidArgument("assemble_load needs a scalar space");
  const int p = space.degree(), k = space.dofs_per_cell();
  CellValues cv(geo, quadrature_degree(p));
  Vector b = Vector::Zero(space.num_dofs());
  for (int c = 0; c < space.mesh().num_cells(); ++c) {
    cv.reinit(c);
    const auto dofs = space.cell_dofs(c);
    for (int q = 0; q < cv.num_points(); ++q) {
      const double w = cv.JxW(q) * f(cv.point(q));
      for (int i = 0; i < k; ++i) b[dofs[i]] += w * cv.shape(p, i, q);
    }
  }
  return b;
}

Vector assemble_boundary_load(const FeSpace& space, const GeometryView& geo, const VectorFunction& g,
                              const std::string& tag) {
  check_compatible(space, geo);
  const auto& m = space.mesh();
  if (!m.has_tag(tag)) throw InvalidArgument("unknown boundary tag '" + tag + "'");
  static const GaussRule1D rule = gauss_legendre(3);
  const std::array<Point2, 3> rv = {Point2(0, 0), Point2(1, 0), Point2(0, 1)};
  const int nc = space.components();
  Vector b = Vector::Zero(space.num_dofs());
  for (int e = 0; e < static_cast<int>(m.boundary_edges().size()); ++e) {
    if (m.boundary_edges()[e].tag != tag) continue;
    const auto [cell, local] = m.boundary_edge_cell(e);
    const Point2 a = rv[local], t = rv[(local + 1) % 3] - rv[local];
    const auto dofs = space.cell_dofs(cell);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Point2 xhat = a + rule.points[q] * t;
      const GeometryPoint gp = physical_geometry(geo, cell, xhat);
      const double ds = (gp.J * t).norm() * rule.weights[q];
      const Vec2 gv = g(gp.x);
      const RefBasis basis = reference_basis(space.degree(), xhat);
      for (int i = 0; i < basis.n; ++i)
        for (int c = 0; c < nc; ++c) b[space.dof(dofs[i], c)] += ds * gv[c] * basis.values[i];
    }
  }
  return b;
}

}  // namespace morphopt::fem
