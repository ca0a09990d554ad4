#include "problems/problems.hpp"

#include "fem/assembly.hpp"
#include "fem/linear_system.hpp"

#include <cmath>

namespace morphopt::problems {

using deform::DeformationState;
using fem::CellValues;
using fem::FeSpace;
using fem::LinearSystem;

ProblemKind parse_kind(const std::string& name) {
  if (name == "model") return ProblemKind::Model;
  if (name == "bernoulli") return ProblemKind::Bernoulli;
  if (name == "stokes") return ProblemKind::Stokes;
  if (name == "elasticity") return ProblemKind::Elasticity;
  throw ConfigError("unknown problem kind '" + name + "'");
}

std::string kind_name(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Model: return "model";
    case ProblemKind::Bernoulli: return "bernoulli";
    case ProblemKind::Stokes: return "stokes";
    case ProblemKind::Elasticity: return "elasticity";
  }
  return "unknown";
}

std::pair<double, double> lame_constants(const ProblemParams& p) {
  const double E = p.youngs, nu = p.poisson;
  const double mu = E / (2.0 * (1.0 + nu));
  const double lambda = p.plane_stress ? E * nu / (1.0 - nu * nu) : E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  return {lambda, mu};
}

double area(const DeformationState& state, int quad_degree) {
  CellValues cv(state.view(), quad_degree);
  double a = 0.0;
  for (int c = 0; c < state.space->mesh().num_cells(); ++c) {
    cv.reinit(c);
    for (int q = 0; q < cv.num_points(); ++q) a += cv.JxW(q);
  }
  return a;
}

Vec2 first_moments(const DeformationState& state, int quad_degree) {
  CellValues cv(state.view(), quad_degree);
  Vec2 m = Vec2::Zero();
  for (int c = 0; c < state.space->mesh().num_cells(); ++c) {
    cv.reinit(c);
    for (int q = 0; q < cv.num_points(); ++q) m += cv.JxW(q) * cv.point(q);
  }
  return m;
}

Problem make_problem(ProblemKind kind, std::shared_ptr<const mesh::TriMesh> mesh, int degree,
                     const ProblemParams& params, const DeformationState& initial) {
  if (degree != 1 && degree != 2) throw ConfigError("finite element degree must be 1 or 2");
  if (!initial.space || initial.space->mesh_ptr() != mesh) throw InvalidArgument("deformation lives on another mesh");
  Problem pb;
  pb.kind = kind;
  pb.params = params;
  pb.mesh = mesh;
  pb.degree = kind == ProblemKind::Stokes ? 2 : degree;
  auto require = [&](std::initializer_list<const char*> tags) {
    for (const char* t : tags) {
      if (!mesh->has_tag(t)) throw ConfigError(kind_name(kind) + " problem needs boundary tag '" + t + "'");
    }
  };
  switch (kind) {
    case ProblemKind::Model:
      pb.state_space = std::make_shared<FeSpace>(mesh, pb.degree, 1);
      break;
    case ProblemKind::Bernoulli:
      require({"inner", "outer"});
      pb.state_space = std::make_shared<FeSpace>(mesh, pb.degree, 1);
      break;
    case ProblemKind::Stokes:
      require({"inflow", "outflow", "wall", "obstacle"});
      if (degree != 2) throw ConfigError("stokes uses P2-P1 elements; set degree = 2");
      pb.state_space = std::make_shared<FeSpace>(mesh, 2, 2);
      pb.pressure_space = std::make_shared<FeSpace>(mesh, 1, 1);
      break;
    case ProblemKind::Elasticity:
      require({"clamp", "load"});
      pb.state_space = std::make_shared<FeSpace>(mesh, pb.degree, 2);
      break;
  }
  const int qd = fem::quadrature_degree(pb.degree);
  pb.area0 = area(initial, qd);
  pb.moment0 = first_moments(initial, qd);
  if (pb.has_penalty()) {
    double ref = params.penalty_area;
    if (ref <= 0.0) {
      ref = kind == ProblemKind::Stokes ? params.channel.width() * params.channel.height() - pb.area0 : pb.area0;
    }
    if (!(ref > 0.0)) throw ConfigError("penalty reference area must be positive");
    const double def = 1e4 / ref;
    pb.mu = {params.mu0 >= 0 ? params.mu0 : def, params.mu1 >= 0 ? params.mu1 : def,
             params.mu2 >= 0 ? params.mu2 : def};
    if (kind == ProblemKind::Elasticity) {
      // Only the volume constraint applies to the cantilever.
      pb.mu[1] = params.mu1 >= 0 ? params.mu1 : 0.0;
      pb.mu[2] = params.mu2 >= 0 ? params.mu2 : 0.0;
    }
  }
  return pb;
}

namespace {

void check_state(const Problem& pb, const DeformationState& st) {
  if (!st.space || st.space->mesh_ptr() != pb.mesh) throw InvalidArgument("deformation lives on another mesh");
}

}  // namespace

StateSolution solve_state(const Problem& pb, const DeformationState& st) {
  check_state(pb, st);
  const fem::GeometryView geo = st.view();
  const FeSpace& V = *pb.state_space;
  StateSolution sol;
  switch (pb.kind) {
    case ProblemKind::Model: {
      LinearSystem sys{fem::assemble_diffusion_reaction(V, geo, 1.0, 1.0),
                       fem::assemble_load(V, geo, [](const Point2&) { return 1.0; })};
      sol.u = fem::solve(sys);
      break;
    }
    case ProblemKind::Bernoulli: {
      LinearSystem sys{fem::assemble_laplace(V, geo), Vector::Zero(V.num_dofs())};
      const auto pos = fem::mapped_dof_coords(V, geo);
      const mesh::Circle t = pb.params.target;
      fem::apply_dirichlet(sys, V, pos, "inner", [](const Point2&, int) { return 0.0; });
      fem::apply_dirichlet(sys, V, pos, "outer",
                           [t](const Point2& x, int) { return std::log(t.radius) - std::log((x - t.center).norm()); });
      sol.u = fem::solve(sys);
      break;
    }
    case ProblemKind::Stokes: {
      const FeSpace& Q = *pb.pressure_space;
      const int nu = V.num_dofs(), np = Q.num_dofs();
      // A natural (outflow) boundary already fixes the pressure level.
      const bool zero_mean = !pb.mesh->has_tag("outflow");
      LinearSystem sys{fem::assemble_stokes(V, Q, geo, zero_mean), Vector::Zero(nu + np + (zero_mean ? 1 : 0)),
                       fem::MatrixKind::Indefinite};
      const auto pos = fem::mapped_dof_coords(V, geo);
      const mesh::Rect ch = pb.params.channel;
      const double U = pb.params.inflow;
      auto zero = [](const Point2&, int) { return 0.0; };
      fem::apply_dirichlet(sys, V, pos, "inflow", [ch, U](const Point2& x, int c) {
        if (c == 1) return 0.0;
        const double H = ch.height(), y = x.y() - ch.ymin;
        return U * 4.0 * y * (H - y) / (H * H);
      });
      fem::apply_dirichlet(sys, V, pos, "wall", zero);
      fem::apply_dirichlet(sys, V, pos, "obstacle", zero);
      const Vector x = fem::solve(sys);
      sol.u = x.head(nu);
      sol.p = x.segment(nu, np);
      if (zero_mean) sol.lambda = x[nu + np];
      break;
    }
    case ProblemKind::Elasticity: {
      const auto [lambda, mu] = lame_constants(pb.params);
      const Vec2 g = pb.params.load;
      LinearSystem sys{fem::assemble_elasticity(V, geo, lambda, mu),
                       fem::assemble_boundary_load(V, geo, [g](const Point2&) { return g; }, "load")};
      fem::apply_dirichlet(sys, V, fem::mapped_dof_coords(V, geo), "clamp", [](const Point2&, int) { return 0.0; });
      sol.u = fem::solve(sys);
      break;
    }
  }
  return sol;
}

Vector solve_adjoint(const Problem& pb, const DeformationState& st, const StateSolution& sol) {
  if (pb.kind != ProblemKind::Model) return {};
  check_state(pb, st);
  const fem::GeometryView geo = st.view();
  const FeSpace& V = *pb.state_space;
  const SparseMatrix M = fem::assemble_mass(V, geo);
  LinearSystem sys{fem::assemble_diffusion_reaction(V, geo, 1.0, 1.0), M * sol.u};
  return fem::solve(sys);
}

namespace {

// Per-quadrature-point state data shared by eval_J and assemble_dJ.
struct PointState {
  double u = 0.0, p = 0.0;
  Vec2 gu = Vec2::Zero(), gp = Vec2::Zero();
  Mat2 Du = Mat2::Zero();  // row = component
  double pressure = 0.0;
};

PointState point_state(const Problem& pb, const StateSolution& sol, const CellValues& cv, int q) {
  PointState s;
  const int deg = pb.degree;
  const auto dofs = pb.state_space->cell_dofs(cv.cell());
  const int k = pb.state_space->dofs_per_cell();
  if (pb.state_space->components() == 1) {
    for (int i = 0; i < k; ++i) {
      s.u += sol.u[dofs[i]] * cv.shape(deg, i, q);
      s.gu += sol.u[dofs[i]] * cv.grad(deg, i, q);
      if (sol.has_adjoint) {
        s.p += sol.adjoint[dofs[i]] * cv.shape(deg, i, q);
        s.gp += sol.adjoint[dofs[i]] * cv.grad(deg, i, q);
      }
    }
  } else {
    for (int i = 0; i < k; ++i) {
      const Vec2& g = cv.grad(deg, i, q);
      for (int c = 0; c < 2; ++c) s.Du.row(c) += sol.u[2 * dofs[i] + c] * g.transpose();
    }
  }
  if (pb.kind == ProblemKind::Stokes) {
    const auto pd = pb.pressure_space->cell_dofs(cv.cell());
    for (int r = 0; r < 3; ++r) s.pressure += sol.p[pd[r]] * cv.shape(1, r, q);
  }
  return s;
}

// Integrand of the unpenalized functional.
double integrand(const Problem& pb, const PointState& s) {
  switch (pb.kind) {
    case ProblemKind::Model: return 0.5 * s.u * s.u;
    case ProblemKind::Bernoulli: return s.gu.squaredNorm() + pb.params.g * pb.params.g;
    case ProblemKind::Stokes: return s.Du.squaredNorm();
    case ProblemKind::Elasticity: {
      const auto [lambda, mu] = lame_constants(pb.params);
      const Mat2 e = 0.5 * (s.Du + s.Du.transpose());
      const Mat2 sigma = 2.0 * mu * e + lambda * e.trace() * Mat2::Identity();
      return (sigma.array() * e.array()).sum();
    }
  }
  return 0.0;
}

}  // namespace

double eval_J(const Problem& pb, const DeformationState& st, StateSolution& sol) {
  check_state(pb, st);
  CellValues cv(st.view(), fem::quadrature_degree(pb.degree));
  double J = 0.0, a = 0.0;
  Vec2 m = Vec2::Zero();
  for (int c = 0; c < pb.mesh->num_cells(); ++c) {
    cv.reinit(c);
    for (int q = 0; q < cv.num_points(); ++q) {
      const double w = cv.JxW(q);
      J += w * integrand(pb, point_state(pb, sol, cv, q));
      a += w;
      m += w * cv.point(q);
    }
  }
  sol.J = J;
  sol.A = a - pb.area0;
  sol.B = m - pb.moment0;
  sol.Jp = J;
  if (pb.has_penalty()) {
    sol.Jp += 0.5 * pb.mu[0] * sol.A * sol.A + 0.5 * pb.mu[1] * sol.B[0] * sol.B[0] +
              0.5 * pb.mu[2] * sol.B[1] * sol.B[1];
  }
  return sol.Jp;
}

Vector assemble_dJ(const Problem& pb, const DeformationState& st, const StateSolution& sol) {
  check_state(pb, st);
  if (pb.kind == ProblemKind::Model && !sol.has_adjoint) throw InvalidArgument("model problem derivative needs the adjoint");
  const FeSpace& G = *st.space;
  const int gdeg = G.degree(), kg = G.dofs_per_cell();
  CellValues cv(st.view(), fem::quadrature_degree(pb.degree));
  Vector dJ = Vector::Zero(G.num_dofs());
  const Mat2 I = Mat2::Identity();
  double lambda = 0.0, mu = 0.0;
  if (pb.kind == ProblemKind::Elasticity) std::tie(lambda, mu) = lame_constants(pb.params);
  const double pa = pb.has_penalty() ? pb.mu[0] * sol.A : 0.0;
  const Vec2 pb_ = pb.has_penalty() ? Vec2(pb.mu[1] * sol.B[0], pb.mu[2] * sol.B[1]) : Vec2::Zero();

  for (int c = 0; c < pb.mesh->num_cells(); ++c) {
    cv.reinit(c);
    const auto gd = G.cell_dofs(c);
    for (int q = 0; q < cv.num_points(); ++q) {
      const PointState s = point_state(pb, sol, cv, q);
      // dJ(V) = integral of S1 : DV + s0 . V
      Mat2 S1 = Mat2::Zero();
      Vec2 s0 = Vec2::Zero();
      switch (pb.kind) {
        case ProblemKind::Model:
          S1 = (0.5 * s.u * s.u - s.gu.dot(s.gp) - s.u * s.p + s.p) * I + s.gu * s.gp.transpose() +
               s.gp * s.gu.transpose();
          break;
        case ProblemKind::Bernoulli:
          S1 = (s.gu.squaredNorm() + pb.params.g * pb.params.g) * I - 2.0 * s.gu * s.gu.transpose();
          break;
        case ProblemKind::Stokes: {
          const double div = s.Du.trace();
          S1 = s.Du.squaredNorm() * I - 2.0 * s.Du.transpose() * s.Du + 2.0 * s.pressure * s.Du.transpose() -
               2.0 * s.pressure * div * I + 2.0 * sol.lambda * s.pressure * I;
          break;
        }
        case ProblemKind::Elasticity: {
          const Mat2 e = 0.5 * (s.Du + s.Du.transpose());
          const Mat2 sigma = 2.0 * mu * e + lambda * e.trace() * I;
          S1 = 2.0 * s.Du.transpose() * sigma - (sigma.array() * e.array()).sum() * I;
          break;
        }
      }
      if (pb.has_penalty()) {
        const Point2& x = cv.point(q);
        S1 += (pa + pb_[0] * x.x() + pb_[1] * x.y()) * I;
        s0 += pb_;
      }
      const double w = cv.JxW(q);
      for (int a = 0; a < kg; ++a) {
        const Vec2 v = S1 * cv.grad(gdeg, a, q) + s0 * cv.shape(gdeg, a, q);
        dJ[2 * gd[a]] += w * v[0];
        dJ[2 * gd[a] + 1] += w * v[1];
      }
    }
  }
  return dJ;
}

StateSolution evaluate(const Problem& pb, const DeformationState& st) {
  StateSolution sol = solve_state(pb, st);
  if (pb.kind == ProblemKind::Model) {
    sol.adjoint = solve_adjoint(pb, st, sol);
    sol.has_adjoint = true;
  }
  eval_J(pb, st, sol);
  return sol;
}

}  // namespace morphopt::problems
