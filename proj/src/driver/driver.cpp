#include "driver/driver.hpp"

#include "fem/assembly.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace morphopt::driver {

using problems::ProblemKind;

namespace {

bool near(double a, double b, double scale) { return std::abs(a - b) <= 1e-9 * std::max(1.0, scale); }

std::string curve_tag(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Model:
    case ProblemKind::Bernoulli: return "inner";
    case ProblemKind::Stokes: return "obstacle";
    case ProblemKind::Elasticity: return "";
  }
  return "";
}

mesh::BoundaryGeometry curves_of(const RunConfig& c) {
  mesh::BoundaryGeometry g;
  const std::string tag = curve_tag(c.kind);
  if (c.curved && !tag.empty()) g[tag] = c.circle;
  return g;
}

std::vector<std::string> fixed_tags(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Model: return {};
    case ProblemKind::Bernoulli: return {"outer"};
    case ProblemKind::Stokes: return {"inflow", "outflow", "wall"};
    case ProblemKind::Elasticity: return {"clamp", "load"};
  }
  return {};
}

// Spline updates must not move boundaries that carry fixed data.
void check_fixed_boundaries(ProblemKind kind, const fem::FeSpace& space, const SparseMatrix& interp) {
  std::vector<char> nonzero(interp.rows(), 0);
  for (int k = 0; k < interp.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(interp, k); it; ++it) {
      if (it.value() != 0.0) nonzero[it.row()] = 1;
    }
  }
  for (const auto& tag : fixed_tags(kind)) {
    for (int i : space.boundary_dofs(tag)) {
      if (nonzero[space.dof(i, 0)] || nonzero[space.dof(i, 1)]) {
        throw ConfigError("spline box reaches into the fixed boundary '" + tag + "'");
      }
    }
  }
}

}  // namespace

mesh::TriMesh build_mesh(const RunConfig& c) {
  const mesh::BoundaryGeometry curves = curves_of(c);
  mesh::TriMesh base;
  if (!c.mesh_file.empty()) {
    base = mesh::parse_msh_file(c.mesh_file, c.mesh_tags);
  } else {
    switch (c.kind) {
      case ProblemKind::Model:
      case ProblemKind::Bernoulli:
        base = mesh::generate_annulus(c.circle, c.outer, c.n_theta, c.n_r, c.grading);
        break;
      case ProblemKind::Stokes: {
        const mesh::Rect r = c.outer;
        const double scale = std::max(r.width(), r.height());
        base = mesh::retag(mesh::generate_annulus(c.circle, r, c.n_theta, c.n_r, c.grading),
                           [r, scale](const Point2& a, const Point2& b, const std::string& tag) -> std::string {
                             if (tag == "inner") return "obstacle";
                             if (near(a.x(), r.xmin, scale) && near(b.x(), r.xmin, scale)) return "inflow";
                             if (near(a.x(), r.xmax, scale) && near(b.x(), r.xmax, scale)) return "outflow";
                             return "wall";
                           });
        break;
      }
      case ProblemKind::Elasticity: {
        const mesh::Rect r = c.outer;
        const double scale = std::max(r.width(), r.height());
        const double cl = c.clamp_length, ll = c.load_length;
        base = mesh::retag(mesh::generate_rectangle(r, c.nx, c.ny),
                           [=](const Point2& a, const Point2& b, const std::string&) -> std::string {
                             const double ym = 0.5 * (a.y() + b.y());
                             const double yc = 0.5 * (r.ymin + r.ymax);
                             if (near(a.x(), r.xmin, scale) && near(b.x(), r.xmin, scale) &&
                                 (ym <= r.ymin + cl || ym >= r.ymax - cl))
                               return "clamp";
                             if (near(a.x(), r.xmax, scale) && near(b.x(), r.xmax, scale) &&
                                 std::abs(ym - yc) <= 0.5 * ll)
                               return "load";
                             return "free";
                           });
        if (!base.has_tag("clamp") || !base.has_tag("load")) {
          throw ConfigError("rectangle resolution too coarse to resolve the clamp and load segments");
        }
        break;
      }
    }
  }
  return mesh::uniform_refine(base, c.refinements, curves.empty() ? nullptr : &curves);
}

Setup build_setup(const RunConfig& c) {
  Setup s;
  s.curves = curves_of(c);
  s.mesh = std::make_shared<const mesh::TriMesh>(build_mesh(c));
  const int state_degree = c.kind == ProblemKind::Stokes ? 2 : c.fe_degree;
  const int geo_degree = c.isoparametric ? state_degree : 1;
  s.geometry_space = std::make_shared<const fem::FeSpace>(s.mesh, geo_degree, 2);
  s.initial = deform::init_deformation(s.geometry_space, geo_degree == 2 ? s.curves : mesh::BoundaryGeometry{});
  s.problem = problems::make_problem(c.kind, s.mesh, state_degree, c.params, s.initial);
  spline::SplineGrid grid{c.box, spline_cells(c.box.width(), c.spline_width),
                          spline_cells(c.box.height(), c.spline_width), c.spline_degree};
  s.spline = std::make_shared<const spline::SplineSpace>(grid);
  s.interp = deform::build_interpolation_matrix(*s.spline, *s.geometry_space);
  s.gram = spline::gram_h1(*s.spline);
  check_fixed_boundaries(c.kind, *s.geometry_space, s.interp);
  return s;
}

OptimizeResult optimize(const RunConfig& c, const Setup& s, const OptimizeOptions& opt) {
  const problems::Problem& pb = s.problem;
  const int qd = fem::quadrature_degree(pb.degree);
  const descent::RieszSolver riesz(s.gram);
  descent::LineSearchOptions ls_opt;
  ls_opt.grid = c.steps;
  ls_opt.det_threshold = c.det_threshold;
  ls_opt.threads = c.threads > 0 ? c.threads : descent::default_threads();

  OptimizeResult r;
  deform::DeformationState state = s.initial;
  problems::StateSolution sol = problems::evaluate(pb, state);
  r.initial_solution = sol;
  auto direction_at = [&](const deform::DeformationState& st, const problems::StateSolution& so) {
    return riesz(s.interp, problems::assemble_dJ(pb, st, so));
  };
  auto jerr = [&](double J) { return std::isnan(c.j_ref) ? NAN : std::abs(J - c.j_ref); };

  descent::DescentDirection dir = direction_at(state, sol);
  r.history.push_back({0, sol.Jp, jerr(sol.Jp), dir.gradient_norm, 0.0, deform::min_det(state, qd)});
  if (opt.on_record) opt.on_record(r.history);
  r.stop_reason = "iteration budget reached";
  int zero_steps = 0;
  for (int it = 1; it <= c.max_iterations; ++it) {
    if (c.grad_tol > 0.0 && dir.gradient_norm < c.grad_tol) {
      r.stop_reason = "gradient norm below tolerance";
      break;
    }
    const descent::LineSearchResult ls = descent::line_search(pb, state, sol, s.interp, dir, ls_opt);
    if (opt.on_iteration) opt.on_iteration({it, sol.Jp, dir, &ls});
    if (ls.s == 0.0) {
      if (++zero_steps >= 2) {
        r.stop_reason = "no decrease in two consecutive line searches";
        break;
      }
      continue;
    }
    zero_steps = 0;
    state = ls.state;
    sol = ls.solution;
    dir = direction_at(state, sol);
    r.history.push_back({it, sol.Jp, jerr(sol.Jp), dir.gradient_norm, ls.s, ls.min_det});
    if (opt.on_record) opt.on_record(r.history);
  }
  r.final_state = state;
  r.final_solution = sol;
  return r;
}

Vector random_direction(const Setup& s, unsigned long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  Vector dt(s.spline->dim());
  for (auto& x : dt) x = n(rng);
  const double m = (s.interp * dt).cwiseAbs().maxCoeff();
  if (m > 0.0) dt *= 0.05 / m;
  return dt;
}

GradientCheckResult gradient_check_direction(const Setup& s, const Vector& dt, int n_steps, double scale) {
  if (n_steps < 2) throw ConfigError("gradient check needs at least two steps");
  const problems::Problem& pb = s.problem;
  const problems::StateSolution sol0 = problems::evaluate(pb, s.initial);
  const Vector dJ = scale * problems::assemble_dJ(pb, s.initial, sol0);
  const double slope = dJ.dot(s.interp * dt);
  GradientCheckResult r;
  const double noise = 1e-13 * std::abs(sol0.Jp);
  std::vector<double> xs, ys;
  for (int k = 1; k <= n_steps; ++k) {
    const double step = std::pow(10.0, -k);
    const deform::DeformationState st = deform::apply_update(s.initial, s.interp, dt, step);
    const double J = problems::evaluate(pb, st).Jp;
    const double rem = J - sol0.Jp - step * slope;
    r.steps.push_back(step);
    r.remainders.push_back(rem);
    if (std::abs(rem) > noise) {
      xs.push_back(step);
      ys.push_back(std::abs(rem));
    }
  }
  if (xs.size() < 2) {
    r.exact = true;
    r.order = NAN;
  } else {
    r.order = fit_rate(xs, ys);
  }
  return r;
}

GradientCheckResult gradient_check(const RunConfig&, const Setup& s, unsigned long seed, int n_steps, double scale) {
  return gradient_check_direction(s, random_direction(s, seed), n_steps, scale);
}

double fit_rate(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("fit_rate needs two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double lx = std::log(x[k]), ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

StudyResult convergence_study(const RunConfig& c, StudyAxis axis, int levels, int threads) {
  if (levels < 3) throw ConfigError("a convergence study needs at least 3 levels");
  if (std::isnan(c.j_ref)) throw ConfigError("a convergence study needs problem.j_ref");
  StudyResult out;
  out.rows.resize(levels);
  threads = std::max(1, std::min(threads, levels));
  std::vector<std::exception_ptr> errors(levels);
  auto run = [&](int level) {
    try {
      RunConfig cfg = c;
      if (axis == StudyAxis::Mesh) {
        cfg.refinements += level;
      } else {
        cfg.spline_width = c.spline_width * std::ldexp(1.0, -level);
      }
      cfg.threads = std::max(1, (c.threads > 0 ? c.threads : descent::default_threads()) / threads);
      const Setup s = build_setup(cfg);
      const OptimizeResult r = optimize(cfg, s);
      const auto& g = s.spline->grid();
      out.rows[level] = {level, axis == StudyAxis::Mesh ? s.mesh->max_edge_length() : std::max(g.hx(), g.hy()),
                         r.history.back().Jerr};
    } catch (...) {
      errors[level] = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  std::mutex m;
  int next = 0;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      while (true) {
        int k;
        {
          std::lock_guard<std::mutex> lock(m);
          k = next++;
        }
        if (k >= levels) return;
        run(k);
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<double> hs, es;
  for (int k = 0; k < levels; ++k) {
    hs.push_back(out.rows[k].h);
    es.push_back(std::max(out.rows[k].Jerr, 1e-300));
    if (k > 0 && !(out.rows[k].Jerr < out.rows[k - 1].Jerr)) out.monotone = false;
  }
  out.rate = fit_rate(hs, es);
  return out;
}

// --- outputs -------------------------------------------------------------------

namespace {

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp + "'");
    out << content;
    out.flush();
    if (!out) throw Error("write to '" + tmp + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
}

std::string format_history(const std::vector<HistoryRecord>& history) {
  std::string s = "iter,J,Jerr,grad_norm,step,min_det\n";
  for (const auto& h : history) {
    s += std::to_string(h.iter) + "," + g17(h.J) + "," + g17(h.Jerr) + "," + g17(h.grad_norm) + "," + g17(h.step) +
         "," + g17(h.min_det) + "\n";
  }
  return s;
}

std::string format_vector(const Vector& v) {
  std::string s;
  for (double x : v) s += g17(x) + "\n";
  return s;
}

std::string format_rates(const StudyResult& study) {
  std::string s = "level,h,Jerr,fitted_rate\n";
  for (const auto& r : study.rows) s += std::to_string(r.level) + "," + g17(r.h) + "," + g17(r.Jerr) + "," + g17(study.rate) + "\n";
  return s;
}

std::string format_vtk(const Setup& s, const deform::DeformationState& st, const problems::StateSolution* sol) {
  const auto& m = *s.mesh;
  const int nv = m.num_nodes();
  std::vector<Point2> pts(nv);
  std::vector<mesh::PointField> fields;
  mesh::PointField disp{"displacement", 2, std::vector<double>(2 * nv)};
  for (int i = 0; i < nv; ++i) {
    pts[i] = Point2(st.f[2 * i], st.f[2 * i + 1]);
    disp.values[2 * i] = st.f[2 * i] - m.node(i).x();
    disp.values[2 * i + 1] = st.f[2 * i + 1] - m.node(i).y();
  }
  fields.push_back(disp);
  if (sol && sol->u.size() > 0) {
    const int comps = s.problem.state_space->components();
    const std::string name = s.problem.kind == ProblemKind::Stokes ? "velocity" : (comps == 2 ? "u_vec" : "u");
    mesh::PointField u{name, comps, std::vector<double>(sol->u.data(), sol->u.data() + comps * nv)};
    fields.push_back(u);
    if (s.problem.kind == ProblemKind::Stokes) {
      fields.push_back({"pressure", 1, std::vector<double>(sol->p.data(), sol->p.data() + nv)});
    }
  }
  std::ostringstream out;
  mesh::write_vtk(out, m, pts, fields, "morphopt " + problems::kind_name(s.problem.kind));
  return out.str();
}

void write_outputs(const RunConfig& c, const Setup& s, const OptimizeResult& r) {
  std::filesystem::create_directories(c.out_dir);
  const std::filesystem::path dir(c.out_dir);
  write_file_atomic((dir / "history.csv").string(), format_history(r.history));
  write_file_atomic((dir / "final_state.txt").string(), format_vector(r.final_state.f));
  if (c.write_vtk) {
    write_file_atomic((dir / "initial.vtk").string(), format_vtk(s, s.initial, &r.initial_solution));
    write_file_atomic((dir / "final.vtk").string(), format_vtk(s, r.final_state, &r.final_solution));
  }
}

}  // namespace morphopt::driver
