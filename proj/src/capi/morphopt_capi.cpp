#include "morphopt/morphopt.h"

#include "driver/config.hpp"
#include "driver/driver.hpp"

#include <cmath>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

using namespace morphopt;

struct morphopt_session {
  driver::RunConfig config;
  std::unique_ptr<driver::Setup> setup;
  std::vector<driver::HistoryRecord> history;
  std::string stop_reason;
};

namespace {

thread_local std::string last_error;

template <class F>
morphopt_status guarded(F&& f) {
  try {
    last_error.clear();
    f();
    return MORPHOPT_OK;
  } catch (const ConfigError& e) {
    last_error = e.what();
    return MORPHOPT_ERR_CONFIG;
  } catch (const ParseError& e) {
    last_error = e.what();
    return MORPHOPT_ERR_CONFIG;
  } catch (const InvalidArgument& e) {
    last_error = e.what();
    return MORPHOPT_ERR_CONFIG;
  } catch (const NumericalError& e) {
    last_error = e.what();
    return MORPHOPT_ERR_NUMERICAL;
  } catch (const std::filesystem::filesystem_error& e) {
    last_error = e.what();
    return MORPHOPT_ERR_IO;
  } catch (const Error& e) {
    last_error = e.what();
    return MORPHOPT_ERR_IO;
  } catch (const std::exception& e) {
    last_error = e.what();
    return MORPHOPT_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return MORPHOPT_ERR_INTERNAL;
  }
}

morphopt_status bad_argument(const char* what) {
  last_error = what;
  return MORPHOPT_ERR_INVALID_ARGUMENT;
}

const driver::Setup& setup_of(morphopt_session* s) {
  if (!s->setup) s->setup = std::make_unique<driver::Setup>(driver::build_setup(s->config));
  return *s->setup;
}

morphopt_status create(morphopt_session** out, const std::function<driver::RunConfig()>& load) {
  if (!out) return bad_argument("null output handle");
  *out = nullptr;
  return guarded([&] {
    auto s = std::make_unique<morphopt_session>();
    s->config = load();
    *out = s.release();
  });
}

}  // namespace

extern "C" {

const char* morphopt_version(void) { return MORPHOPT_VERSION; }

const char* morphopt_last_error(void) { return last_error.c_str(); }

morphopt_status morphopt_session_create_from_file(const char* path, morphopt_session** out) {
  if (!path) return bad_argument("null config path");
  return create(out, [&] { return driver::load_config(path); });
}

morphopt_status morphopt_session_create_from_string(const char* text, morphopt_session** out) {
  if (!text) return bad_argument("null config text");
  return create(out, [&] { return driver::parse_config_string(text); });
}

void morphopt_session_destroy(morphopt_session* session) { delete session; }

size_t morphopt_notice_count(const morphopt_session* s) { return s ? s->config.notices.size() : 0; }

const char* morphopt_notice(const morphopt_session* s, size_t i) {
  if (!s || i >= s->config.notices.size()) return nullptr;
  return s->config.notices[i].c_str();
}

morphopt_status morphopt_set_output_dir(morphopt_session* s, const char* dir) {
  if (!s || !dir) return bad_argument("null argument");
  s->config.out_dir = dir;
  return MORPHOPT_OK;
}

morphopt_status morphopt_set_max_iterations(morphopt_session* s, int n) {
  if (!s) return bad_argument("null session");
  if (n < 0) return bad_argument("iteration budget must be >= 0");
  s->config.max_iterations = n;
  return MORPHOPT_OK;
}

morphopt_status morphopt_set_threads(morphopt_session* s, int n) {
  if (!s) return bad_argument("null session");
  if (n < 0) return bad_argument("thread count must be >= 0");
  s->config.threads = n;
  return MORPHOPT_OK;
}

morphopt_status morphopt_run(morphopt_session* s) {
  if (!s) return bad_argument("null session");
  s->history.clear();
  s->stop_reason.clear();
  const std::filesystem::path dir(s->config.out_dir);
  return guarded([&] {
    std::filesystem::create_directories(dir);
    const driver::Setup& setup = setup_of(s);
    driver::OptimizeOptions opt;
    opt.on_record = [&](const std::vector<driver::HistoryRecord>& h) {
      s->history = h;
      driver::write_file_atomic((dir / "history.csv").string(), driver::format_history(h));
    };
    const driver::OptimizeResult r = driver::optimize(s->config, setup, opt);
    s->stop_reason = r.stop_reason;
    driver::write_outputs(s->config, setup, r);
  });
}

size_t morphopt_history_size(const morphopt_session* s) { return s ? s->history.size() : 0; }

morphopt_status morphopt_history_get(const morphopt_session* s, size_t i, morphopt_history_row* row) {
  if (!s || !row) return bad_argument("null argument");
  if (i >= s->history.size()) return bad_argument("history index out of range");
  const auto& h = s->history[i];
  *row = {h.iter, h.J, h.Jerr, h.grad_norm, h.step, h.min_det};
  return MORPHOPT_OK;
}

const char* morphopt_stop_reason(const morphopt_session* s) { return s ? s->stop_reason.c_str() : ""; }

morphopt_status morphopt_check_gradient(morphopt_session* s, unsigned long long seed, int steps, double* order,
                                        int* exact) {
  if (!s || !order || !exact) return bad_argument("null argument");
  if (steps < 2) return bad_argument("gradient check needs at least two steps");
  return guarded([&] {
    const driver::GradientCheckResult r = driver::gradient_check(s->config, setup_of(s), seed, steps);
    *order = r.order;
    *exact = r.exact ? 1 : 0;
  });
}

morphopt_status morphopt_study(morphopt_session* s, morphopt_axis axis, int levels, double* rate, int* monotone) {
  if (!s || !rate || !monotone) return bad_argument("null argument");
  if (axis != MORPHOPT_AXIS_MESH && axis != MORPHOPT_AXIS_GRID) return bad_argument("unknown study axis");
  return guarded([&] {
    const int threads = s->config.threads > 0 ? s->config.threads : descent::default_threads();
    const driver::StudyResult r = driver::convergence_study(
        s->config, axis == MORPHOPT_AXIS_MESH ? driver::StudyAxis::Mesh : driver::StudyAxis::Grid, levels, threads);
    const std::filesystem::path dir(s->config.out_dir);
    std::filesystem::create_directories(dir);
    driver::write_file_atomic((dir / "rates.csv").string(), driver::format_rates(r));
    *rate = r.rate;
    *monotone = r.monotone ? 1 : 0;
  });
}

}  // extern "C"
