#pragma once

#include "deform/deform.hpp"
#include "fem/fe_space.hpp"
#include "mesh/mesh.hpp"

#include <memory>
#include <string>

namespace morphopt::problems {

enum class ProblemKind { Model, Bernoulli, Stokes, Elasticity };

ProblemKind parse_kind(const std::string& name);
std::string kind_name(ProblemKind kind);

struct ProblemParams {
  // bernoulli: u = 0 on "inner", u = ln(r_t) - ln|x - c_t| on "outer"
  double g = 2.5;
  mesh::Circle target{Point2(0.0, 0.0), 0.4};

  // stokes: parabolic inflow of peak `inflow` on "inflow", no slip on "wall"
  // and "obstacle", natural outflow; the channel fixes the profile
  double inflow = 1.0;
  mesh::Rect channel{-6.0, 6.0, -2.5, 2.5};

  // elasticity: clamped "clamp", traction `load` on "load"
  double youngs = 15.0;
  double poisson = 0.35;
  bool plane_stress = true;
  Vec2 load{0.0, -1.0};

  // penalty weights; negative selects the default 1e4 / (reference area)
  double mu0 = -1.0, mu1 = -1.0, mu2 = -1.0;
  // area used for the default weights (obstacle area for stokes, domain area
  // otherwise); <= 0 means the initial domain area
  double penalty_area = 0.0;
};

/// Lamé constants of the configured material (plane stress or plane strain).
std::pair<double, double> lame_constants(const ProblemParams& p);

struct Problem {
  ProblemKind kind = ProblemKind::Bernoulli;
  ProblemParams params;
  std::shared_ptr<const mesh::TriMesh> mesh;
  int degree = 2;                                   // state degree (stokes: velocity)
  std::shared_ptr<const fem::FeSpace> state_space;  // scalar, or vector for stokes/elasticity
  std::shared_ptr<const fem::FeSpace> pressure_space;
  double area0 = 0.0;            // |F^(0)(Omega)|
  Vec2 moment0 = Vec2::Zero();   // first moments of F^(0)(Omega)
  std::array<double, 3> mu{0.0, 0.0, 0.0};

  bool has_penalty() const { return kind == ProblemKind::Stokes || kind == ProblemKind::Elasticity; }
};

/// Builds the state spaces and records the reference area/moments of the
/// initial configuration for the penalty terms.
Problem make_problem(ProblemKind kind, std::shared_ptr<const mesh::TriMesh> mesh, int degree,
                     const ProblemParams& params, const deform::DeformationState& initial);

struct StateSolution {
  Vector u;             // state (stokes: velocity)
  Vector p;             // stokes pressure
  double lambda = 0.0;  // stokes zero-mean multiplier (0 with an outflow boundary)
  Vector adjoint;       // model problem only
  bool has_adjoint = false;
  double J = 0.0;       // unpenalized functional
  double Jp = 0.0;      // penalized functional (equals J without penalties)
  double A = 0.0;
  Vec2 B = Vec2::Zero();
};

StateSolution solve_state(const Problem& problem, const deform::DeformationState& state);

/// Model problem: (grad p, grad v) + (p, v) = (u, v). Empty for the other kinds,
/// whose derivative formulas need no extra solve.
Vector solve_adjoint(const Problem& problem, const deform::DeformationState& state, const StateSolution& sol);

/// Fills J, penalties and Jp of `sol`; returns Jp.
double eval_J(const Problem& problem, const deform::DeformationState& state, StateSolution& sol);

/// dJ_p(v_i) for every vector basis function v_i of the geometry space.
Vector assemble_dJ(const Problem& problem, const deform::DeformationState& state, const StateSolution& sol);

/// solve_state + (adjoint) + eval_J.
StateSolution evaluate(const Problem& problem, const deform::DeformationState& state);

/// Area and first moments of the current configuration.
double area(const deform::DeformationState& state, int quad_degree);
Vec2 first_moments(const deform::DeformationState& state, int quad_degree);

}  // namespace morphopt::problems
