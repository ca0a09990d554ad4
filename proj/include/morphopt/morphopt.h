/* morphopt: 2D shape optimization with spline-controlled mesh deformation. */
#ifndef MORPHOPT_H
#define MORPHOPT_H

#include <stddef.h>

#if defined(_WIN32)
#  define MORPHOPT_API __declspec(dllexport)
#else
#  define MORPHOPT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum morphopt_status {
  MORPHOPT_OK = 0,
  MORPHOPT_ERR_INVALID_ARGUMENT = 1, /* bad handle, index or parameter */
  MORPHOPT_ERR_CONFIG = 2,           /* unreadable/invalid config or mesh input */
  MORPHOPT_ERR_NUMERICAL = 3,        /* inverted element, solver failure */
  MORPHOPT_ERR_IO = 4,               /* output could not be written */
  MORPHOPT_ERR_INTERNAL = 5
} morphopt_status;

typedef enum morphopt_axis { MORPHOPT_AXIS_MESH = 0, MORPHOPT_AXIS_GRID = 1 } morphopt_axis;

typedef struct morphopt_session morphopt_session;

typedef struct morphopt_history_row {
  int iter;
  double J;
  double Jerr; /* NaN without a reference value */
  double grad_norm;
  double step;
  double min_det;
} morphopt_history_row;

MORPHOPT_API const char* morphopt_version(void);

/* Message of the last failing call on this thread ("" if none). */
MORPHOPT_API const char* morphopt_last_error(void);

MORPHOPT_API morphopt_status morphopt_session_create_from_file(const char* path, morphopt_session** out);
MORPHOPT_API morphopt_status morphopt_session_create_from_string(const char* text, morphopt_session** out);
MORPHOPT_API void morphopt_session_destroy(morphopt_session* session);

/* Keys that were not set in the config and fell back to defaults. */
MORPHOPT_API size_t morphopt_notice_count(const morphopt_session* session);
MORPHOPT_API const char* morphopt_notice(const morphopt_session* session, size_t index);

MORPHOPT_API morphopt_status morphopt_set_output_dir(morphopt_session* session, const char* dir);
MORPHOPT_API morphopt_status morphopt_set_max_iterations(morphopt_session* session, int max_iterations);
/* 0 restores the default (MORPHOPT_THREADS or hardware concurrency). */
MORPHOPT_API morphopt_status morphopt_set_threads(morphopt_session* session, int threads);

/* Optimizes and writes history.csv, final_state.txt and the VTK files into
   the output directory. history.csv is rewritten after every accepted
   iterate, so a failed run leaves the partial history behind. */
MORPHOPT_API morphopt_status morphopt_run(morphopt_session* session);
MORPHOPT_API size_t morphopt_history_size(const morphopt_session* session);
MORPHOPT_API morphopt_status morphopt_history_get(const morphopt_session* session, size_t index,
                                                  morphopt_history_row* row);
MORPHOPT_API const char* morphopt_stop_reason(const morphopt_session* session);

/* Taylor test along a seeded random spline direction with steps 10^-1..10^-steps.
   *exact is set when every remainder is below 1e-13 |J|; *order is NaN then. */
MORPHOPT_API morphopt_status morphopt_check_gradient(morphopt_session* session, unsigned long long seed, int steps,
                                                     double* order, int* exact);

/* Runs `levels` optimizations along the axis and writes rates.csv into the
   output directory. *monotone is 0 when Jerr does not decrease level to level. */
MORPHOPT_API morphopt_status morphopt_study(morphopt_session* session, morphopt_axis axis, int levels, double* rate,
                                            int* monotone);

#ifdef __cplusplus
}
#endif

#endif
