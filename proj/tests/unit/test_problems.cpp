#include "doctest.h"

#include "driver/config.hpp"
#include "driver/driver.hpp"
#include "fem/assembly.hpp"

#include <cmath>

using namespace morphopt;
using problems::ProblemKind;

namespace {

driver::RunConfig small_config(ProblemKind kind) {
  driver::RunConfig c = driver::default_config(kind);
  switch (kind) {
    case ProblemKind::Model:
    case ProblemKind::Bernoulli:
      c.n_theta = 16;
      c.n_r = 4;
      c.spline_width = 0.3;
      break;
    case ProblemKind::Stokes:
      c.n_theta = 24;
      c.n_r = 5;
      c.spline_width = 1.0;
      break;
    case ProblemKind::Elasticity:
      c.nx = 20;
      c.ny = 10;
      c.clamp_length = 0.2;
      c.load_length = 0.2;
      c.spline_width = 0.3;
      break;
  }
  return c;
}

double max_abs(const Vector& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("parse_kind") {
  CHECK(problems::parse_kind("stokes") == ProblemKind::Stokes);
  CHECK(problems::kind_name(ProblemKind::Elasticity) == "elasticity");
  CHECK_THROWS_AS(problems::parse_kind("heat"), ConfigError);
}

TEST_CASE("lame constants") {
  problems::ProblemParams p;
  auto [l, m] = problems::lame_constants(p);
  CHECK(m == doctest::Approx(15.0 / 2.7));
  CHECK(l == doctest::Approx(15.0 * 0.35 / (1 - 0.35 * 0.35)));
  p.plane_stress = false;
  std::tie(l, m) = problems::lame_constants(p);
  CHECK(l == doctest::Approx(15.0 * 0.35 / (1.35 * 0.3)));
}

TEST_CASE("model problem: u = p = 1 and J = |Omega| / 2") {
  for (int degree : {1, 2}) {
    driver::RunConfig c = small_config(ProblemKind::Model);
    c.fe_degree = degree;
    const driver::Setup s = driver::build_setup(c);
    const problems::StateSolution sol = problems::evaluate(s.problem, s.initial);
    REQUIRE(sol.has_adjoint);
    CHECK(max_abs(sol.u - Vector::Ones(sol.u.size())) <= 1e-12);
    CHECK(max_abs(sol.adjoint - Vector::Ones(sol.adjoint.size())) <= 1e-12);
    const double area = problems::area(s.initial, fem::quadrature_degree(degree));
    CHECK(sol.J == doctest::Approx(0.5 * area).epsilon(1e-13));

    // Derivative of |Omega| / 2 along a spline field, by central differences.
    const Vector dt = driver::random_direction(s, 5);
    const Vector dJ = problems::assemble_dJ(s.problem, s.initial, sol);
    const double h = 1e-4, qd = fem::quadrature_degree(degree);
    const double fd = 0.5 *
                      (problems::area(deform::apply_update(s.initial, s.interp, dt, h), qd) -
                       problems::area(deform::apply_update(s.initial, s.interp, dt, -h), qd)) /
                      (2 * h);
    CHECK(dJ.dot(s.interp * dt) == doctest::Approx(fd).epsilon(1e-8));
  }
}

TEST_CASE("model adjoint is linear in its right-hand side") {
  const driver::Setup s = driver::build_setup(small_config(ProblemKind::Model));
  problems::StateSolution sol = problems::solve_state(s.problem, s.initial);
  const Vector p1 = problems::solve_adjoint(s.problem, s.initial, sol);
  sol.u *= 3.0;
  const Vector p3 = problems::solve_adjoint(s.problem, s.initial, sol);
  CHECK(max_abs(p3 - 3.0 * p1) <= 1e-12);
}

TEST_CASE("bernoulli state at the optimal circle") {
  double prev = 1.0;
  for (int r : {0, 1, 2}) {
    driver::RunConfig c = small_config(ProblemKind::Bernoulli);
    c.circle = {Point2(0, 0), 0.4};
    c.refinements = r;
    const driver::Setup s = driver::build_setup(c);
    const problems::StateSolution sol = problems::evaluate(s.problem, s.initial);
    const auto& V = *s.problem.state_space;
    const auto pos = fem::mapped_dof_coords(*s.geometry_space, s.initial.view());
    // Geometry and state share the dof numbering (both P2).
    double nodal = 0.0;
    for (int i = 0; i < V.num_scalar_dofs(); ++i) {
      nodal = std::max(nodal, std::abs(sol.u[i] - (std::log(0.4) - std::log(pos[i].norm()))));
    }
    CHECK(nodal < prev / 4);
    prev = nodal;
    const double area = problems::area(s.initial, fem::quadrature_degree(2));
    CHECK(sol.J >= 2.5 * 2.5 * area);
  }
  CHECK(prev < 1e-4);
}

TEST_CASE("bernoulli derivative vanishes on translations") {
  const driver::Setup s = driver::build_setup(small_config(ProblemKind::Bernoulli));
  const problems::StateSolution sol = problems::evaluate(s.problem, s.initial);
  const Vector dJ = problems::assemble_dJ(s.problem, s.initial, sol);
  const int n = s.geometry_space->num_scalar_dofs();
  for (int c = 0; c < 2; ++c) {
    double sum = 0.0, scale = 0.0;
    for (int i = 0; i < n; ++i) {
      sum += dJ[2 * i + c];
      scale += std::abs(dJ[2 * i + c]);
    }
    CHECK(std::abs(sum) <= 1e-11 * scale);
  }
  CHECK(max_abs(problems::assemble_dJ(s.problem, s.initial, sol) - dJ) == 0.0);
}

TEST_CASE("stokes") {
  SUBCASE("zero inflow gives a zero state") {
    driver::RunConfig c = small_config(ProblemKind::Stokes);
    c.params.inflow = 0.0;
    const driver::Setup s = driver::build_setup(c);
    const problems::StateSolution sol = problems::evaluate(s.problem, s.initial);
    CHECK(max_abs(sol.u) <= 1e-14);
    CHECK(max_abs(sol.p) <= 1e-14);
    CHECK(sol.J == doctest::Approx(0.0));
  }
  SUBCASE("discrete divergence") {
    const driver::Setup s = driver::build_setup(small_config(ProblemKind::Stokes));
    const problems::StateSolution sol = problems::evaluate(s.problem, s.initial);
    const SparseMatrix K =
        fem::assemble_stokes(*s.problem.state_space, *s.problem.pressure_space, s.initial.view(), false);
    const int nu = sol.u.size(), np = sol.p.size();
    Vector x(nu + np);
    x << sol.u, sol.p;
    const Vector r = K * x;
    CHECK(max_abs(r.segment(nu, np)) <= 1e-9);
    CHECK(sol.lambda == 0.0);
    CHECK(sol.J > 0.0);
  }
  SUBCASE("penalties vanish on the initial configuration") {
    const driver::Setup s = driver::build_setup(small_config(ProblemKind::Stokes));
    const problems::StateSolution sol = problems::evaluate(s.problem, s.initial);
    CHECK(sol.A == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(sol.B.norm() <= 1e-12);
    CHECK(sol.Jp == sol.J);
    problems::Problem plain = s.problem;
    plain.mu = {0.0, 0.0, 0.0};
    const Vector d1 = problems::assemble_dJ(s.problem, s.initial, sol);
    const Vector d0 = problems::assemble_dJ(plain, s.initial, sol);
    CHECK(max_abs(d1 - d0) <= 1e-12 * max_abs(d0));
  }
}

TEST_CASE("elasticity work identity") {
  for (int degree : {1, 2}) {
    driver::RunConfig c = small_config(ProblemKind::Elasticity);
    c.fe_degree = degree;
    const driver::Setup s = driver::build_setup(c);
    const problems::StateSolution sol = problems::evaluate(s.problem, s.initial);
    const Vec2 g = s.problem.params.load;
    const Vector f = fem::assemble_boundary_load(
        *s.problem.state_space, s.initial.view(), [g](const Point2&) { return g; }, "load");
    CHECK(sol.J == doctest::Approx(f.dot(sol.u)).epsilon(1e-9));
    CHECK(sol.J > 0.0);
  }
}

TEST_CASE("Taylor test of every shape derivative") {
  for (ProblemKind kind : {ProblemKind::Model, ProblemKind::Bernoulli, ProblemKind::Stokes, ProblemKind::Elasticity}) {
    CAPTURE(problems::kind_name(kind));
    driver::RunConfig c = small_config(kind);
    const driver::Setup s = driver::build_setup(c);
    const driver::GradientCheckResult r = driver::gradient_check(c, s, 11, 4);
    CHECK_FALSE(r.exact);
    CHECK(r.order >= 1.9);
  }
}

TEST_CASE("penalty terms are exercised away from the initial shape") {
  for (ProblemKind kind : {ProblemKind::Stokes, ProblemKind::Elasticity}) {
    CAPTURE(problems::kind_name(kind));
    driver::Setup s = driver::build_setup(small_config(kind));
    s.initial = deform::apply_update(s.initial, s.interp, driver::random_direction(s, 4), 1.0);
    const problems::StateSolution sol = problems::evaluate(s.problem, s.initial);
    CHECK(std::abs(sol.A) > 0.0);
    CHECK(sol.Jp > sol.J);
    const driver::GradientCheckResult r = driver::gradient_check_direction(s, driver::random_direction(s, 8), 4);
    CHECK(r.order >= 1.9);
  }
}
