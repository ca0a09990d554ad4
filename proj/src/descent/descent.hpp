#pragma once

#include "deform/deform.hpp"
#include "problems/problems.hpp"

#include <Eigen/SparseCholesky>

#include <memory>
#include <vector>

namespace morphopt::descent {

struct DescentDirection {
  Vector dt;
  double gradient_norm = 0.0;       // sqrt(dt^T K dt)
  double predicted_decrease = 0.0;  // dt^T K dt
};

/// Factorizes the Gram matrix once; each call solves K dt = -I_h^T dJ.
class RieszSolver {
 public:
  explicit RieszSolver(const SparseMatrix& gram);
  DescentDirection operator()(const SparseMatrix& interp, const Vector& dJ) const;

 private:
  SparseMatrix K_;
  Eigen::SimplicialLLT<SparseMatrix> llt_;
};

DescentDirection riesz_descent(const SparseMatrix& gram, const SparseMatrix& interp, const Vector& dJ);

struct StepResult {
  double s = 0.0;
  double J = 0.0;
  double min_det = 0.0;
  bool admissible = false;
  bool evaluated = false;
  std::string failure;  // numerical failure while evaluating this step
};

struct LineSearchResult {
  double s = 0.0;
  double J = 0.0;
  double min_det = 0.0;
  problems::StateSolution solution;
  deform::DeformationState state;
  std::vector<StepResult> steps;  // one per grid entry, grid order
};

struct LineSearchOptions {
  std::vector<double> grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  double det_threshold = 0.01;
  int threads = 1;
};

/// Thread cap from MORPHOPT_THREADS (>= 1), otherwise hardware concurrency.
int default_threads();

/// Evaluates J_p at each admissible grid step and returns the minimizer; ties
/// go to the smallest s. The step s = 0 (if in the grid) reuses `current`.
LineSearchResult line_search(const problems::Problem& problem, const deform::DeformationState& state,
                             const problems::StateSolution& current, const SparseMatrix& interp,
                             const DescentDirection& direction, const LineSearchOptions& options);

/// (s, J0 - s * predicted_decrease) for each s.
std::vector<std::pair<double, double>> predicted_descent_line(double J0, const DescentDirection& direction,
                                                              const std::vector<double>& s);

}  // namespace morphopt::descent
