#pragma once

#include "deform/deform.hpp"
#include "descent/descent.hpp"
#include "driver/config.hpp"
#include "problems/problems.hpp"
#include "spline/spline.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace morphopt::driver {

/// Everything the optimization loop needs, built once from a RunConfig.
struct Setup {
  std::shared_ptr<const mesh::TriMesh> mesh;
  mesh::BoundaryGeometry curves;
  std::shared_ptr<const fem::FeSpace> geometry_space;
  deform::DeformationState initial;
  problems::Problem problem;
  std::shared_ptr<const spline::SplineSpace> spline;
  SparseMatrix interp;
  SparseMatrix gram;
};

/// Initial mesh of the configured problem (built-in generator or MSH file).
mesh::TriMesh build_mesh(const RunConfig& config);
Setup build_setup(const RunConfig& config);

struct HistoryRecord {
  int iter = 0;
  double J = 0.0;
  double Jerr = 0.0;  // NaN without a reference value
  double grad_norm = 0.0;
  double step = 0.0;
  double min_det = 0.0;
};

struct IterationInfo {
  int iter = 0;
  double J0 = 0.0;
  descent::DescentDirection direction;
  const descent::LineSearchResult* search = nullptr;
};

struct OptimizeOptions {
  /// Called after every line search (e.g. for tangency checks).
  std::function<void(const IterationInfo&)> on_iteration;
  /// Called with the history after each accepted iterate.
  std::function<void(const std::vector<HistoryRecord>&)> on_record;
};

struct OptimizeResult {
  std::vector<HistoryRecord> history;
  problems::StateSolution initial_solution;
  deform::DeformationState final_state;
  problems::StateSolution final_solution;
  std::string stop_reason;
};

/// Riesz-gradient descent with grid line search. Stops at the iteration
/// budget, after two consecutive zero steps, or when the gradient norm falls
/// below grad_tol. One history row per accepted iterate (row 0 = initial).
OptimizeResult optimize(const RunConfig& config, const Setup& setup, const OptimizeOptions& options = {});

struct GradientCheckResult {
  bool exact = false;
  double order = 0.0;
  std::vector<double> steps;
  std::vector<double> remainders;
};

/// Taylor remainder J(s) - J(0) - s <dJ, I_h dt> along a random spline
/// direction (scaled so max |I_h dt| = 0.05) for s = 10^-1 .. 10^-n_steps.
/// `derivative_scale` multiplies dJ (fault injection).
GradientCheckResult gradient_check(const RunConfig& config, const Setup& setup, unsigned long seed, int n_steps = 4,
                                   double derivative_scale = 1.0);
/// Same along a given direction (not rescaled).
GradientCheckResult gradient_check_direction(const Setup& setup, const Vector& dt, int n_steps = 4,
                                             double derivative_scale = 1.0);

/// Random spline direction with max |I_h dt| = 0.05.
Vector random_direction(const Setup& setup, unsigned long seed);

/// Least-squares slope of log y against log x.
double fit_rate(const std::vector<double>& x, const std::vector<double>& y);

enum class StudyAxis { Mesh, Grid };

struct StudyRow {
  int level = 0;
  double h = 0.0;
  double Jerr = 0.0;
};

struct StudyResult {
  std::vector<StudyRow> rows;
  double rate = 0.0;
  bool monotone = true;
};

/// Runs optimize at `levels` levels: mesh axis adds one refinement per level
/// (h = longest edge), grid axis halves the spline width (h = width).
StudyResult convergence_study(const RunConfig& config, StudyAxis axis, int levels, int threads = 1);

// --- outputs -------------------------------------------------------------------

/// Writes `content` to path via a temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& content);

std::string format_history(const std::vector<HistoryRecord>& history);
std::string format_vector(const Vector& v);
std::string format_rates(const StudyResult& study);
std::string format_vtk(const Setup& setup, const deform::DeformationState& state, const problems::StateSolution* sol);

/// history.csv, final_state.txt, initial.vtk and final.vtk under config.out_dir.
void write_outputs(const RunConfig& config, const Setup& setup, const OptimizeResult& result);

}  // namespace morphopt::driver
