#pragma once

#include "fem/fe_space.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace morphopt::fem {

enum class MatrixKind { SymmetricPositiveDefinite, Indefinite };

/// A x = b with a set of prescribed (Dirichlet) values. Constrained dofs are
/// removed from the unknowns at solve time and their column contributions
/// moved to the right-hand side, so the reduced matrix stays symmetric.
struct LinearSystem {
  LinearSystem() = default;
  LinearSystem(SparseMatrix A_, Vector b_, MatrixKind kind_ = MatrixKind::SymmetricPositiveDefinite)
      : A(std::move(A_)), b(std::move(b_)), kind(kind_) {}

  SparseMatrix A;
  Vector b;
  MatrixKind kind = MatrixKind::SymmetricPositiveDefinite;
  std::map<int, double> constraints;
};

/// Value of the boundary datum for component c at a physical point.
using DirichletFunction = std::function<double(const Point2& x, int component)>;

/// Prescribes values on the dofs of `space` carried by boundary edges with
/// `tag`. The datum is evaluated at the mapped dof positions `dof_positions`
/// (deformed configuration). `offset` shifts into a block system; `mask`
/// selects components (default all).
void apply_dirichlet(LinearSystem& system, const FeSpace& space, const std::vector<Point2>& dof_positions,
                     const std::string& tag, const DirichletFunction& value, int offset = 0,
                     std::vector<int> components = {});

/// Free-dof reduction: A_ff and b_f - A_fc g. Also returns the free index map.
struct ReducedSystem {
  SparseMatrix A;
  Vector b;
  std::vector<int> free;  // reduced index -> full index
};
ReducedSystem eliminate(const LinearSystem& system);

/// Direct sparse solve: Cholesky for SPD systems, LU otherwise. Throws
/// SolverError on breakdown, detected singularity or a relative residual
/// above 1e-10.
Vector solve(const LinearSystem& system);

/// Solve of an already reduced matrix.
Vector solve_matrix(const SparseMatrix& A, const Vector& b, MatrixKind kind);

}  // namespace morphopt::fem
