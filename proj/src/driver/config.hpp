#pragma once

#include "mesh/mesh.hpp"
#include "problems/problems.hpp"

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace morphopt::driver {

struct RunConfig {
  problems::ProblemKind kind = problems::ProblemKind::Bernoulli;
  problems::ProblemParams params;
  /// Reference value for Jerr; NaN when absent.
  double j_ref = std::numeric_limits<double>::quiet_NaN();

  // [mesh]
  std::string mesh_file;            // empty: built-in generator for the problem kind
  mesh::TagDictionary mesh_tags;    // physical id -> tag, for MSH input
  mesh::Circle circle{Point2(0.04, 0.05), 0.5};  // initial inner boundary / obstacle
  bool curved = true;               // circle is an analytic curve for snapping and F^(0)
  mesh::Rect outer{-1.0, 1.0, -1.0, 1.0};
  int n_theta = 32;
  int n_r = 8;
  double grading = 1.0;
  int nx = 40, ny = 20;             // rectangle generator (elasticity)
  double clamp_length = 0.2;        // elasticity: clamped length at each end of the left edge
  double load_length = 0.1;         // elasticity: loaded length centered on the right edge
  int refinements = 0;

  // [fem]
  int fe_degree = 2;
  bool isoparametric = true;

  // [spline]
  int spline_degree = 3;
  double spline_width = 1.8 / 16.0;
  mesh::Rect box{-0.95, 0.95, -0.95, 0.95};

  // [optimizer]
  int max_iterations = 200;
  std::vector<double> steps = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  double det_threshold = 0.01;
  double grad_tol = 0.0;
  int threads = 0;  // 0: MORPHOPT_THREADS or hardware concurrency

  // [output]
  std::string out_dir = "out";
  bool write_vtk = true;

  /// Keys filled from defaults (reported by the CLI).
  std::vector<std::string> notices;
};

/// Defaults of every field for a problem kind.
RunConfig default_config(problems::ProblemKind kind);

/// INI text with sections [problem], [mesh], [fem], [spline], [optimizer],
/// [output]; '#' and ';' start comments; unknown sections or keys are errors.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_string(const std::string& text);
RunConfig load_config(const std::string& path);

/// Grid cells per axis for a requested width: the smallest n with
/// (extent / n) <= width.
int spline_cells(double extent, double width);

}  // namespace morphopt::driver
