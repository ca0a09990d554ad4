// Command-line front end over the C API.
#include "morphopt/morphopt.h"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int exit_code(morphopt_status st) {
  switch (st) {
    case MORPHOPT_OK: return 0;
    case MORPHOPT_ERR_CONFIG:
    case MORPHOPT_ERR_INVALID_ARGUMENT: return kExitConfig;
    case MORPHOPT_ERR_NUMERICAL: return kExitNumerical;
    default: return 1;
  }
}

int fail(morphopt_status st) {
  std::fprintf(stderr, "morphopt: error: %s\n", morphopt_last_error());
  return exit_code(st);
}

using Session = std::unique_ptr<morphopt_session, decltype(&morphopt_session_destroy)>;

struct Common {
  std::string config;
  std::optional<std::string> out_dir;
  std::optional<int> budget;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "INI configuration file")->required();
  cmd->add_option("--out-dir", c.out_dir, "output directory (overrides [output] dir)");
  cmd->add_option("--budget", c.budget, "iteration budget (overrides [optimizer] max_iterations)")
      ->check(CLI::NonNegativeNumber);
}

// Opens the session and applies the overrides; returns 0 or an exit code.
int open(const Common& c, Session& session) {
  morphopt_session* raw = nullptr;
  if (const morphopt_status st = morphopt_session_create_from_file(c.config.c_str(), &raw); st != MORPHOPT_OK) {
    return fail(st);
  }
  session.reset(raw);
  for (size_t i = 0; i < morphopt_notice_count(raw); ++i) std::fprintf(stderr, "notice: %s\n", morphopt_notice(raw, i));
  if (c.out_dir) {
    if (const auto st = morphopt_set_output_dir(raw, c.out_dir->c_str()); st != MORPHOPT_OK) return fail(st);
  }
  if (c.budget) {
    if (const auto st = morphopt_set_max_iterations(raw, *c.budget); st != MORPHOPT_OK) return fail(st);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"morphopt: shape optimization with spline-controlled deformations"};
  app.set_version_flag("--version", std::string(morphopt_version()));
  app.require_subcommand(1);

  Common run_opts, grad_opts, study_opts;
  CLI::App* run = app.add_subcommand("run", "optimize and write history.csv, final_state.txt and VTK files");
  add_common(run, run_opts);

  CLI::App* grad = app.add_subcommand("check-gradient", "Taylor test of the shape derivative; prints order=<value>");
  add_common(grad, grad_opts);
  unsigned long long seed = 1;
  int steps = 4;
  grad->add_option("--seed", seed, "random direction seed");
  grad->add_option("--steps", steps, "number of step decades (s = 10^-1 .. 10^-steps)")->check(CLI::Range(2, 12));

  CLI::App* study = app.add_subcommand("study", "convergence study; writes rates.csv");
  add_common(study, study_opts);
  std::string axis = "mesh";
  int levels = 3;
  study->add_option("--axis", axis, "mesh or grid")->check(CLI::IsMember({"mesh", "grid"}));
  study->add_option("--levels", levels, "number of levels (>= 3)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  Session session(nullptr, &morphopt_session_destroy);
  if (run->parsed()) {
    if (int rc = open(run_opts, session)) return rc;
    const morphopt_status st = morphopt_run(session.get());
    const size_t n = morphopt_history_size(session.get());
    if (st != MORPHOPT_OK) {
      std::fprintf(stderr, "morphopt: %zu history rows kept\n", n);
      return fail(st);
    }
    morphopt_history_row last{};
    morphopt_history_get(session.get(), n - 1, &last);
    std::printf("iterations=%d J=%.17g Jerr=%.17g stop=%s\n", last.iter, last.J, last.Jerr,
                morphopt_stop_reason(session.get()));
    return 0;
  }
  if (grad->parsed()) {
    if (int rc = open(grad_opts, session)) return rc;
    double order = 0.0;
    int exact = 0;
    if (const auto st = morphopt_check_gradient(session.get(), seed, steps, &order, &exact); st != MORPHOPT_OK) {
      return fail(st);
    }
    if (exact) {
      std::printf("order=exact\n");
    } else {
      std::printf("order=%.6f\n", order);
    }
    return 0;
  }
  if (levels < 3) {
    std::fprintf(stderr, "morphopt: error: a convergence study needs --levels >= 3\n");
    return kExitConfig;
  }
  if (int rc = open(study_opts, session)) return rc;
  double rate = 0.0;
  int monotone = 1;
  const morphopt_axis ax = axis == "grid" ? MORPHOPT_AXIS_GRID : MORPHOPT_AXIS_MESH;
  if (const auto st = morphopt_study(session.get(), ax, levels, &rate, &monotone); st != MORPHOPT_OK) return fail(st);
  if (!monotone) std::fprintf(stderr, "warning: Jerr is not monotone across levels; the fitted rate is unreliable\n");
  std::printf("rate=%.6f\n", rate);
  return 0;
}
