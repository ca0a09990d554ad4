#include "doctest.h"

#include "driver/config.hpp"
#include "driver/driver.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace morphopt;
using namespace morphopt::driver;
using problems::ProblemKind;

namespace {

const char* kSmallModel = R"(
# small model problem
[problem]
kind = model

[mesh]
circle_r = 0.4
n_theta = 16
n_r = 4

[spline]
width = 0.3

[optimizer]
max_iterations = 3
)";

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("morphopt_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

RunConfig small_bernoulli() {
  RunConfig c = default_config(ProblemKind::Bernoulli);
  c.n_theta = 16;
  c.n_r = 4;
  c.spline_width = 0.3;
  c.max_iterations = 6;
  return c;
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("sections, comments and defaults") {
    const RunConfig c = parse_config_string(kSmallModel);
    CHECK(c.kind == ProblemKind::Model);
    CHECK(c.circle.radius == 0.4);
    CHECK(c.n_theta == 16);
    CHECK(c.spline_width == 0.3);
    CHECK(c.max_iterations == 3);
    CHECK(c.fe_degree == 2);
    CHECK(std::isnan(c.j_ref));
    CHECK_FALSE(c.notices.empty());
    bool found = false;
    for (const auto& n : c.notices) found = found || n.find("fem.degree") != std::string::npos;
    CHECK(found);
  }
  SUBCASE("bernoulli reference value defaults") {
    CHECK(parse_config_string("[problem]\nkind = bernoulli\n").j_ref == 28.306941614057237);
  }
  SUBCASE("lists, booleans and grid levels") {
    const RunConfig c = parse_config_string(
        "[problem]\nkind = bernoulli\n[optimizer]\nsteps = 0, 0.5, 1\n[fem]\nisoparametric = false\n"
        "[spline]\nlevel = 3\n[mesh]\ntags = 1:inner, 2:outer\n");
    CHECK(c.steps == std::vector<double>{0.0, 0.5, 1.0});
    CHECK_FALSE(c.isoparametric);
    CHECK(c.spline_width == doctest::Approx(1.8 / 8));
    CHECK(c.mesh_tags.at(2) == "outer");
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(parse_config_string("[mesh]\nn_r = 4\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_string("[problem]\nkind = model\n[solver]\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_string("[problem]\nkind = model\nspeed = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_string("[problem]\nkind = model\n[mesh]\nN_R = 4\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_string("[problem]\nkind = model\n[mesh]\nn_r = four\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_string("[problem]\nkind = model\n[fem]\ndegree = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_string("[problem]\nkind = stokes\n[fem]\ndegree = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_string("[problem]\nkind = model\n[optimizer]\nsteps = 0, 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_string("[problem]\nkind = plasma\n"), ConfigError);
    try {
      load_config("/no/such/config.ini");
      FAIL("expected an error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("/no/such/config.ini") != std::string::npos);
    }
  }
}

TEST_CASE("spline cells per axis") {
  CHECK(spline_cells(1.9, 1.8 / 16) == 17);
  CHECK(spline_cells(1.9, 0.95) == 2);
  CHECK(spline_cells(1.0, 0.25) == 4);
  CHECK_THROWS_AS(spline_cells(1.0, 0.0), ConfigError);
}

TEST_CASE("built-in meshes carry the problem tags") {
  const auto stokes = build_mesh(default_config(ProblemKind::Stokes));
  for (const char* t : {"inflow", "outflow", "wall", "obstacle"}) CHECK(stokes.has_tag(t));
  const auto elastic = build_mesh(default_config(ProblemKind::Elasticity));
  for (const char* t : {"clamp", "load", "free"}) CHECK(elastic.has_tag(t));
  RunConfig coarse = default_config(ProblemKind::Elasticity);
  coarse.nx = 2;
  coarse.ny = 2;
  CHECK_THROWS_AS(build_mesh(coarse), ConfigError);
}

TEST_CASE("spline box must avoid fixed boundaries") {
  RunConfig c = small_bernoulli();
  c.box = {-1.2, 1.2, -1.2, 1.2};
  CHECK_THROWS_AS(build_setup(c), ConfigError);
  c.box = {-1.0, 1.0, -1.0, 1.0};
  CHECK_NOTHROW(build_setup(c));
}

TEST_CASE("fit_rate") {
  std::vector<double> h{0.4, 0.2, 0.1, 0.05}, e;
  for (double x : h) e.push_back(3.7 * x * x);
  CHECK(fit_rate(h, e) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(fit_rate({1.0}, {1.0}), InvalidArgument);
}

TEST_CASE("gradient check") {
  const RunConfig c = small_bernoulli();
  const Setup s = build_setup(c);
  SUBCASE("correct derivative is second order") {
    const GradientCheckResult r = gradient_check(c, s, 7, 4);
    CHECK(r.steps.size() == 4);
    CHECK(r.order >= 1.9);
  }
  SUBCASE("fault injection drops the order to one") {
    const GradientCheckResult r = gradient_check(c, s, 7, 6, 1.1);
    CHECK(r.order == doctest::Approx(1.0).epsilon(0.05));
  }
  SUBCASE("zero direction is exact") {
    const GradientCheckResult r = gradient_check_direction(s, Vector::Zero(s.spline->dim()), 4);
    CHECK(r.exact);
  }
  SUBCASE("fixed seed is deterministic") {
    CHECK(gradient_check(c, s, 3, 3).order == gradient_check(c, s, 3, 3).order);
  }
  SUBCASE("random direction scaling") {
    CHECK((s.interp * random_direction(s, 1)).cwiseAbs().maxCoeff() == doctest::Approx(0.05));
  }
}

TEST_CASE("optimize") {
  RunConfig c = small_bernoulli();
  const Setup s = build_setup(c);
  SUBCASE("zero budget keeps only the initial row") {
    c.max_iterations = 0;
    const OptimizeResult r = optimize(c, s);
    REQUIRE(r.history.size() == 1);
    CHECK(r.history[0].iter == 0);
    CHECK(r.history[0].step == 0.0);
    CHECK(r.history[0].Jerr == doctest::Approx(std::abs(r.history[0].J - c.j_ref)));
    CHECK(r.final_state.f == s.initial.f);
  }
  SUBCASE("accepted iterates: monotone J, admissible, deterministic") {
    int records = 0;
    OptimizeOptions opt;
    opt.on_record = [&](const std::vector<HistoryRecord>& h) { records = static_cast<int>(h.size()); };
    const OptimizeResult r = optimize(c, s, opt);
    CHECK(records == static_cast<int>(r.history.size()));
    CHECK(r.history.size() <= static_cast<std::size_t>(c.max_iterations) + 1);
    REQUIRE(r.history.size() >= 2);
    for (std::size_t k = 1; k < r.history.size(); ++k) {
      CHECK(r.history[k].J <= r.history[k - 1].J);
      CHECK(r.history[k].min_det >= c.det_threshold);
      CHECK(r.history[k].step > 0.0);
      CHECK(r.history[k].iter > r.history[k - 1].iter);
    }
    const OptimizeResult again = optimize(c, s);
    REQUIRE(again.history.size() == r.history.size());
    for (std::size_t k = 0; k < r.history.size(); ++k) CHECK(again.history[k].J == r.history[k].J);
  }
  SUBCASE("stagnation stops the loop") {
    c.steps = {0.0};
    c.max_iterations = 50;
    const OptimizeResult r = optimize(c, s);
    CHECK(r.history.size() == 1);
    CHECK(r.stop_reason.find("two consecutive") != std::string::npos);
  }
  SUBCASE("gradient tolerance stops the loop") {
    c.grad_tol = 1e9;
    const OptimizeResult r = optimize(c, s);
    CHECK(r.history.size() == 1);
    CHECK(r.stop_reason.find("tolerance") != std::string::npos);
  }
}

TEST_CASE("convergence study preconditions") {
  RunConfig c = small_bernoulli();
  CHECK_THROWS_AS(convergence_study(c, StudyAxis::Mesh, 2, 1), ConfigError);
  c.j_ref = std::nan("");
  CHECK_THROWS_AS(convergence_study(c, StudyAxis::Mesh, 3, 1), ConfigError);
}

TEST_CASE("output formats") {
  SUBCASE("history.csv") {
    std::vector<HistoryRecord> h{{0, 28.396466687934012, 0.0895, 0.61, 0.0, 0.94}, {1, 1.0 / 3.0, 1e-300, 2.5, 0.4, 1.0}};
    const std::string text = format_history(h);
    const auto lines = split(text, '\n');
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == "iter,J,Jerr,grad_norm,step,min_det");
    for (std::size_t k = 1; k < lines.size(); ++k) {
      const auto cols = split(lines[k], ',');
      REQUIRE(cols.size() == 6);
      CHECK(std::stoi(cols[0]) == h[k - 1].iter);
      CHECK(std::strtod(cols[1].c_str(), nullptr) == h[k - 1].J);
      CHECK(std::strtod(cols[2].c_str(), nullptr) == h[k - 1].Jerr);
      CHECK(std::strtod(cols[4].c_str(), nullptr) == h[k - 1].step);
    }
    CHECK(lines[2].find("0.33333333333333331") != std::string::npos);
  }
  SUBCASE("rates.csv") {
    StudyResult st;
    st.rows = {{0, 0.4, 1e-2}, {1, 0.2, 2.5e-3}, {2, 0.1, 6.25e-4}};
    st.rate = 2.0;
    const auto lines = split(format_rates(st), '\n');
    REQUIRE(lines.size() == 4);
    CHECK(lines[0] == "level,h,Jerr,fitted_rate");
    for (std::size_t k = 1; k < lines.size(); ++k) {
      const auto cols = split(lines[k], ',');
      CHECK(cols.size() == 4);
      CHECK(cols[3] == "2");
    }
  }
  SUBCASE("state vector round trip") {
    Vector v(3);
    v << 0.1, -1.0 / 7.0, 1e-17;
    const auto lines = split(format_vector(v), '\n');
    REQUIRE(lines.size() == 3);
    for (int k = 0; k < 3; ++k) CHECK(std::strtod(lines[k].c_str(), nullptr) == v[k]);
  }
  SUBCASE("atomic writes leave no temporary file") {
    const auto dir = temp_dir("atomic");
    std::filesystem::create_directories(dir);
    const auto file = dir / "a.txt";
    write_file_atomic(file.string(), "one\n");
    write_file_atomic(file.string(), "two\n");
    CHECK(slurp(file) == "two\n");
    CHECK_FALSE(std::filesystem::exists(dir / "a.txt.tmp"));
    CHECK_THROWS_AS(write_file_atomic((dir / "missing" / "x.txt").string(), "x"), Error);
  }
  SUBCASE("write_outputs creates the directory and all files") {
    RunConfig c = parse_config_string(kSmallModel);
    const auto dir = temp_dir("outputs") / "nested";
    c.out_dir = dir.string();
    const Setup s = build_setup(c);
    const OptimizeResult r = optimize(c, s);
    write_outputs(c, s, r);
    for (const char* f : {"history.csv", "final_state.txt", "initial.vtk", "final.vtk"}) {
      CHECK(std::filesystem::exists(dir / f));
    }
    CHECK(split(slurp(dir / "history.csv"), '\n').size() == r.history.size() + 1);
    CHECK(split(slurp(dir / "final_state.txt"), '\n').size() == static_cast<std::size_t>(r.final_state.f.size()));
    CHECK(slurp(dir / "final.vtk").find("VECTORS displacement double") != std::string::npos);
  }
}
