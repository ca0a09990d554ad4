#include "fem/linear_system.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <memory>

#ifdef MORPHOPT_HAVE_SUITESPARSE
#include <Eigen/CholmodSupport>
#include <Eigen/UmfPackSupport>
#endif

namespace morphopt::fem {

void apply_dirichlet(LinearSystem& system, const FeSpace& space, const std::vector<Point2>& dof_positions,
                     const std::string& tag, const DirichletFunction& value, int offset,
                     std::vector<int> components) {
  if (static_cast<int>(dof_positions.size()) != space.num_scalar_dofs()) {
    throw InvalidArgument("apply_dirichlet: dof position count mismatch");
  }
  if (components.empty()) {
    for (int c = 0; c < space.components(); ++c) components.push_back(c);
  }
  for (int i : space.boundary_dofs(tag)) {
    for (int c : components) system.constraints[offset + space.dof(i, c)] = value(dof_positions[i], c);
  }
}

ReducedSystem eliminate(const LinearSystem& system) {
  const int n = static_cast<int>(system.A.rows());
  if (system.A.cols() != n || system.b.size() != n) throw InvalidArgument("linear system dimension mismatch");
  std::vector<int> map(n, -1);
  Vector g = Vector::Zero(n);
  std::vector<char> fixed(n, 0);
  for (const auto& [i, v] : system.constraints) {
    if (i < 0 || i >= n) throw InvalidArgument("constraint index out of range");
    fixed[i] = 1;
    g[i] = v;
  }
  ReducedSystem r;
  for (int i = 0; i < n; ++i) {
    if (!fixed[i]) {
      map[i] = static_cast<int>(r.free.size());
      r.free.push_back(i);
    }
  }
  const int m = static_cast<int>(r.free.size());
  r.b.resize(m);
  for (int k = 0; k < m; ++k) r.b[k] = system.b[r.free[k]];
  std::vector<Triplet> trip;
  trip.reserve(system.A.nonZeros());
  for (int col = 0; col < n; ++col) {
    for (SparseMatrix::InnerIterator it(system.A, col); it; ++it) {
      const int row = static_cast<int>(it.row());
      if (fixed[row]) continue;
      if (fixed[col]) {
        r.b[map[row]] -= it.value() * g[col];
      } else {
        trip.emplace_back(map[row], map[col], it.value());
      }
    }
  }
  r.A.resize(m, m);
  r.A.setFromTriplets(trip.begin(), trip.end());
  return r;
}

namespace {

double relative_residual(const SparseMatrix& A, const Vector& x, const Vector& b) {
  const double nb = b.norm();
  const double nr = (A * x - b).norm();
  return nb > 0.0 ? nr / nb : nr;
}

void check_pivots(double ratio) {
  if (!(ratio > 1e-12)) {
    throw SolverError("matrix is singular or not positive definite (pivot ratio " + std::to_string(ratio) + ")", NAN);
  }
}

#ifdef MORPHOPT_HAVE_SUITESPARSE
// Supernodal Cholesky that also reports min(L_ii^2) / max(L_ii^2).
class CholmodLLT : public Eigen::CholmodSupernodalLLT<SparseMatrix> {
 public:
  double pivot_ratio() { return cholmod_rcond(m_cholmodFactor, &cholmod()); }
};

// Symbolic factorizations keyed by the exact sparsity pattern. Within a run
// the reduced matrices share one pattern, so only the numeric phase repeats.
struct CachedFactor {
  std::vector<int> outer, inner;
  std::unique_ptr<CholmodLLT> llt;
};

bool same_pattern(const CachedFactor& e, const SparseMatrix& A) {
  const auto n = static_cast<std::size_t>(A.outerSize()) + 1;
  const auto nnz = static_cast<std::size_t>(A.nonZeros());
  return e.outer.size() == n && e.inner.size() == nnz && std::equal(e.outer.begin(), e.outer.end(), A.outerIndexPtr()) &&
         std::equal(e.inner.begin(), e.inner.end(), A.innerIndexPtr());
}

CholmodLLT& factor_for(const SparseMatrix& A) {
  constexpr std::size_t kCacheSize = 4;
  thread_local std::vector<CachedFactor> cache;
  for (auto& e : cache) {
    if (same_pattern(e, A)) return *e.llt;
  }
  CachedFactor e;
  e.outer.assign(A.outerIndexPtr(), A.outerIndexPtr() + A.outerSize() + 1);
  e.inner.assign(A.innerIndexPtr(), A.innerIndexPtr() + A.nonZeros());
  e.llt = std::make_unique<CholmodLLT>();
  if (A.rows() > 50000) {
    // Nested dissection: slower analysis, much less fill on large meshes.
    e.llt->cholmod().nmethods = 1;
    e.llt->cholmod().method[0].ordering = CHOLMOD_METIS;
  }
  e.llt->analyzePattern(A);
  if (cache.size() == kCacheSize) cache.erase(cache.begin());
  cache.push_back(std::move(e));
  return *cache.back().llt;
}

Vector solve_spd(const SparseMatrix& matrix, const Vector& b) {
  SparseMatrix compressed;
  if (!matrix.isCompressed()) {
    compressed = matrix;
    compressed.makeCompressed();
  }
  const SparseMatrix& A = matrix.isCompressed() ? matrix : compressed;
  CholmodLLT& llt = factor_for(A);
  llt.factorize(A);
  if (llt.info() != Eigen::Success) throw SolverError("matrix is not positive definite", NAN);
  check_pivots(llt.pivot_ratio());
  return llt.solve(b);
}

Vector solve_general(const SparseMatrix& A, const Vector& b) {
  Eigen::UmfPackLU<SparseMatrix> lu;
  // Symmetric pattern (saddle-point systems): diagonal pivoting, AMD ordering.
  lu.umfpackControl()(UMFPACK_STRATEGY) = UMFPACK_STRATEGY_SYMMETRIC;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw SolverError("LU factorization failed", NAN);
  return lu.solve(b);
}
#else
Vector solve_spd(const SparseMatrix& A, const Vector& b) {
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw SolverError("LDL^T factorization failed", NAN);
  const Vector d = ldlt.vectorD();
  check_pivots(d.minCoeff() / d.cwiseAbs().maxCoeff());
  return ldlt.solve(b);
}

Vector solve_general(const SparseMatrix& A, const Vector& b) {
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success) throw SolverError("LU factorization failed: " + lu.lastErrorMessage(), NAN);
  return lu.solve(b);
}
#endif

}  // namespace

Vector solve_matrix(const SparseMatrix& A, const Vector& b, MatrixKind kind) {
  if (A.rows() == 0) return Vector();
  const Vector x = kind == MatrixKind::SymmetricPositiveDefinite ? solve_spd(A, b) : solve_general(A, b);
  const double res = relative_residual(A, x, b);
  if (!std::isfinite(res) || res > 1e-10) throw SolverError("linear solve did not reach tolerance 1e-10", res);
  return x;
}

Vector solve(const LinearSystem& system) {
  const ReducedSystem r = eliminate(system);
  const Vector xf = solve_matrix(r.A, r.b, system.kind);
  Vector x = Vector::Zero(system.A.rows());
  for (std::size_t k = 0; k < r.free.size(); ++k) x[r.free[k]] = xf[k];
  for (const auto& [i, v] : system.constraints) x[i] = v;
  return x;
}

}  // namespace morphopt::fem
