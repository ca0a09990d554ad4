#include "descent/descent.hpp"

#include "fem/assembly.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

namespace morphopt::descent {

RieszSolver::RieszSolver(const SparseMatrix& gram) : K_(gram) {
  llt_.compute(K_);
  if (llt_.info() != Eigen::Success) throw SolverError("Gram matrix factorization failed", NAN);
}

DescentDirection RieszSolver::operator()(const SparseMatrix& interp, const Vector& dJ) const {
  if (interp.rows() != dJ.size() || interp.cols() != K_.rows()) {
    throw InvalidArgument("riesz_descent: dimension mismatch");
  }
  const Vector rhs = -(interp.transpose() * dJ);
  DescentDirection d;
  if (rhs.isZero(0.0)) {
    d.dt = Vector::Zero(K_.rows());
    return d;
  }
  d.dt = llt_.solve(rhs);
  const double res = (K_ * d.dt - rhs).norm() / rhs.norm();
  if (!(res <= 1e-10)) throw SolverError("Riesz solve did not reach tolerance", res);
  d.predicted_decrease = d.dt.dot(K_ * d.dt);
  d.gradient_norm = std::sqrt(d.predicted_decrease);
  return d;
}

DescentDirection riesz_descent(const SparseMatrix& gram, const SparseMatrix& interp, const Vector& dJ) {
  return RieszSolver(gram)(interp, dJ);
}

int default_threads() {
  if (const char* env = std::getenv("MORPHOPT_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

LineSearchResult line_search(const problems::Problem& problem, const deform::DeformationState& state,
                             const problems::StateSolution& current, const SparseMatrix& interp,
                             const DescentDirection& direction, const LineSearchOptions& options) {
  const auto& grid = options.grid;
  if (grid.empty()) throw InvalidArgument("line search grid is empty");
  const int qd = fem::quadrature_degree(problem.degree);
  const int n = static_cast<int>(grid.size());
  std::vector<StepResult> steps(n);
  std::vector<problems::StateSolution> sols(n);
  std::vector<deform::DeformationState> states(n);

  auto run = [&](int k) {
    StepResult& r = steps[k];
    r.s = grid[k];
    try {
      states[k] = deform::apply_update(state, interp, direction.dt, r.s);
      r.min_det = deform::min_det(states[k], qd);
      // The current iterate is always a valid fallback.
      r.admissible = r.s == 0.0 || r.min_det >= options.det_threshold;
      if (!r.admissible) return;
      if (r.s == 0.0) {
        sols[k] = current;
      } else {
        sols[k] = problems::evaluate(problem, states[k]);
      }
      r.J = sols[k].Jp;
      r.evaluated = std::isfinite(r.J);
    } catch (const NumericalError& e) {
      r.admissible = false;
      r.failure = e.what();
    }
  };

  const int threads = std::max(1, std::min(options.threads, n));
  if (threads == 1) {
    for (int k = 0; k < n; ++k) run(k);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (int k = next++; k < n; k = next++) run(k);
      });
    }
    for (auto& th : pool) th.join();
  }

  int best = -1;
  for (int k = 0; k < n; ++k) {
    if (!steps[k].admissible || !steps[k].evaluated) continue;
    if (best < 0 || steps[k].J < steps[best].J || (steps[k].J == steps[best].J && steps[k].s < steps[best].s)) best = k;
  }
  LineSearchResult out;
  out.steps = steps;
  if (best < 0) {
    // No admissible candidate: stay put.
    out.s = 0.0;
    out.J = current.Jp;
    out.min_det = deform::min_det(state, qd);
    out.solution = current;
    out.state = state;
    return out;
  }
  out.s = steps[best].s;
  out.J = steps[best].J;
  out.min_det = steps[best].min_det;
  out.solution = std::move(sols[best]);
  out.state = std::move(states[best]);
  return out;
}

std::vector<std::pair<double, double>> predicted_descent_line(double J0, const DescentDirection& direction,
                                                              const std::vector<double>& s) {
  std::vector<std::pair<double, double>> out;
  out.reserve(s.size());
  for (double v : s) out.emplace_back(v, J0 - v * direction.predicted_decrease);
  return out;
}

}  // namespace morphopt::descent
