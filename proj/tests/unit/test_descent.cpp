#include "doctest.h"

#include "descent/descent.hpp"
#include "driver/config.hpp"
#include "driver/driver.hpp"
#include "fem/assembly.hpp"

#include <cmath>
#include <cstdlib>

using namespace morphopt;
using namespace morphopt::descent;
using problems::ProblemKind;

namespace {

driver::Setup model_setup() {
  driver::RunConfig c = driver::default_config(ProblemKind::Model);
  c.n_theta = 16;
  c.n_r = 4;
  c.spline_width = 0.3;
  return driver::build_setup(c);
}

}  // namespace

TEST_CASE("riesz_descent") {
  const driver::Setup s = model_setup();
  const problems::StateSolution sol = problems::evaluate(s.problem, s.initial);
  const Vector dJ = problems::assemble_dJ(s.problem, s.initial, sol);
  const DescentDirection d = riesz_descent(s.gram, s.interp, dJ);

  const Vector r = s.gram * d.dt + s.interp.transpose() * dJ;
  CHECK(r.norm() <= 1e-10 * (s.interp.transpose() * dJ).norm());
  CHECK(d.predicted_decrease == doctest::Approx(d.dt.dot(s.gram * d.dt)).epsilon(1e-14));
  CHECK(d.gradient_norm == doctest::Approx(std::sqrt(d.predicted_decrease)).epsilon(1e-14));
  CHECK(d.predicted_decrease > 0.0);
  CHECK(dJ.dot(s.interp * d.dt) == doctest::Approx(-d.predicted_decrease).epsilon(1e-10));

  const DescentDirection z = riesz_descent(s.gram, s.interp, Vector::Zero(dJ.size()));
  CHECK(z.dt.isZero(0.0));
  CHECK(z.gradient_norm == 0.0);

  const DescentDirection c = riesz_descent(s.gram, s.interp, 2.5 * dJ);
  CHECK((c.dt - 2.5 * d.dt).norm() <= 1e-12 * d.dt.norm());

  const RieszSolver solver(s.gram);
  CHECK((solver(s.interp, dJ).dt - d.dt).norm() <= 1e-14 * d.dt.norm());
}

TEST_CASE("line_search") {
  const driver::Setup s = model_setup();
  const problems::StateSolution sol = problems::evaluate(s.problem, s.initial);
  const Vector dJ = problems::assemble_dJ(s.problem, s.initial, sol);
  DescentDirection d = riesz_descent(s.gram, s.interp, dJ);
  // Small enough that J decreases along the whole grid.
  const double scale = 0.02 / (s.interp * d.dt).cwiseAbs().maxCoeff();
  d.dt *= scale;
  d.predicted_decrease *= scale * scale;
  d.gradient_norm *= scale;
  LineSearchOptions opt;

  SUBCASE("zero direction keeps the current state") {
    DescentDirection z;
    z.dt = Vector::Zero(d.dt.size());
    const LineSearchResult r = line_search(s.problem, s.initial, sol, s.interp, z, opt);
    CHECK(r.s == 0.0);
    CHECK(r.J == sol.Jp);
    CHECK(r.state.f == s.initial.f);
  }
  SUBCASE("decreasing J along the grid selects s = 1") {
    const LineSearchResult r = line_search(s.problem, s.initial, sol, s.interp, d, opt);
    REQUIRE(r.steps.size() == opt.grid.size());
    for (std::size_t k = 1; k < r.steps.size(); ++k) CHECK(r.steps[k].J < r.steps[k - 1].J);
    CHECK(r.s == 1.0);
    CHECK(r.J == r.steps.back().J);
    CHECK(r.solution.Jp == r.J);
    CHECK(r.state.f == deform::apply_update(s.initial, s.interp, d.dt, 1.0).f);
  }
  SUBCASE("steps below the determinant threshold are excluded") {
    const int qd = fem::quadrature_degree(s.problem.degree);
    const double det_one = deform::min_det(s.initial, s.interp, d.dt, 1.0, qd);
    opt.det_threshold = det_one * (1.0 + 1e-12);
    const LineSearchResult r = line_search(s.problem, s.initial, sol, s.interp, d, opt);
    std::size_t best = 0;
    for (std::size_t k = 0; k < r.steps.size(); ++k) {
      CHECK(r.steps[k].admissible == (r.steps[k].s == 0.0 || r.steps[k].min_det >= opt.det_threshold));
      if (r.steps[k].admissible && r.steps[k].J < r.steps[best].J) best = k;
    }
    CHECK_FALSE(r.steps.back().admissible);
    CHECK(r.s == r.steps[best].s);
    CHECK(r.s < 1.0);
    CHECK((r.s == 0.0 || r.min_det >= opt.det_threshold));
  }
  SUBCASE("ties go to the smallest step") {
    opt.grid = {0.0, 0.3, 0.3, 0.0};
    const LineSearchResult r = line_search(s.problem, s.initial, sol, s.interp, d, opt);
    CHECK(r.s == 0.3);
    CHECK(r.steps[1].J == r.steps[2].J);
  }
  SUBCASE("selection does not depend on the thread count") {
    opt.threads = 1;
    const LineSearchResult a = line_search(s.problem, s.initial, sol, s.interp, d, opt);
    opt.threads = 4;
    const LineSearchResult b = line_search(s.problem, s.initial, sol, s.interp, d, opt);
    CHECK(a.s == b.s);
    CHECK(a.J == b.J);
    for (std::size_t k = 0; k < a.steps.size(); ++k) CHECK(a.steps[k].J == b.steps[k].J);
  }
  SUBCASE("scaling J leaves the argmin unchanged") {
    const LineSearchResult r = line_search(s.problem, s.initial, sol, s.interp, d, opt);
    for (double c : {0.1, 7.0}) {
      std::size_t best = 0;
      for (std::size_t k = 1; k < r.steps.size(); ++k) {
        if (c * r.steps[k].J < c * r.steps[best].J) best = k;
      }
      CHECK(r.steps[best].s == r.s);
    }
  }
}

TEST_CASE("predicted descent line") {
  DescentDirection d;
  d.predicted_decrease = 0.25;
  const auto line = predicted_descent_line(3.0, d, {0.0, 0.1, 1.0});
  REQUIRE(line.size() == 3);
  CHECK(line[0].second == 3.0);
  CHECK(line[1].second == doctest::Approx(2.975));
  CHECK((line[2].second - line[0].second) / line[2].first == doctest::Approx(-0.25));
}

TEST_CASE("default_threads honours MORPHOPT_THREADS") {
  const char* old = std::getenv("MORPHOPT_THREADS");
  const std::string saved = old ? old : "";
  setenv("MORPHOPT_THREADS", "3", 1);
  CHECK(default_threads() == 3);
  setenv("MORPHOPT_THREADS", "junk", 1);
  CHECK(default_threads() >= 1);
  if (old) {
    setenv("MORPHOPT_THREADS", saved.c_str(), 1);
  } else {
    unsetenv("MORPHOPT_THREADS");
  }
}
