/* C interface of the active measurement library.
 *
 * Objects are opaque handles released with the matching *_free function.
 * Every call returns an am_status; on failure am_last_error_message() holds
 * a description for the calling thread. Strings returned through char**
 * parameters are owned by the caller and released with am_string_free().
 */
#ifndef ACTIVEMEASURE_H
#define ACTIVEMEASURE_H

#include <stddef.h>
#include <stdint.h>

#if defined(AM_BUILDING_LIBRARY)
#define AM_API __attribute__((visibility("default")))
#else
#define AM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum am_status {
  AM_OK = 0,
  AM_ERR_INVALID_ARGUMENT = 1,
  AM_ERR_PARSE = 2,
  AM_ERR_CONFIG = 3,
  AM_ERR_IO = 4,
  AM_ERR_VALIDATION = 5,
  AM_ERR_CONFLICT = 6,
  AM_ERR_NOT_FOUND = 7,
  AM_ERR_EXHAUSTED = 8,
  AM_ERR_COVERAGE = 9,
  AM_ERR_DOMAIN = 10,
  AM_ERR_STATE = 11,
  AM_ERR_CHECK_FAILED = 12,
  AM_ERR_INTERNAL = 13
} am_status;

typedef struct am_pool am_pool;
typedef struct am_run am_run;
typedef struct am_server am_server;

typedef struct am_report {
  size_t t;
  double estimate;
  double var_cond;
  double var_simp;
  double ci_lo;
  double ci_hi;
  double level;
  int caveat; /* nonzero when the weights were estimated (INV) */
} am_report;

typedef struct am_run_options {
  const char* scheme; /* "sqrt", "lure", "comb" or "inv" */
  double gamma;       /* INV junction fraction */
  const char* clamp;  /* "floor" or "offset" */
  double clamp_value;
  double level;
  uint64_t seed;
} am_run_options;

AM_API const char* am_version(void);
AM_API const char* am_status_name(am_status status);
AM_API const char* am_last_error_message(void);
AM_API void am_string_free(char* s);

/* Pools: tab-separated `id payload_ref [value]` records. */
AM_API am_status am_pool_load(const char* path, am_pool** out);
AM_API void am_pool_free(am_pool* pool);
AM_API size_t am_pool_size(const am_pool* pool);
AM_API const char* am_pool_unit_id(const am_pool* pool, size_t index);
/* F(Omega); fails with AM_ERR_STATE for pools without values. */
AM_API am_status am_pool_total(const am_pool* pool, double* out);

/* Runs. am_run_create builds the pool and predictor from an experiment
 * config (`key = value` file, NULL for defaults) plus `key=value` overrides. */
AM_API void am_run_options_default(am_run_options* options);
AM_API am_status am_run_create(const char* config_path, const char* const* overrides, size_t n_overrides,
                               am_run** out);
/* Live run over `pool`; predictions may be NULL for a uniform proposal. */
AM_API am_status am_run_create_live(const am_pool* pool, const double* predictions, size_t n_predictions,
                                    const am_run_options* options, am_run** out);
AM_API void am_run_free(am_run* run);
AM_API am_status am_run_next_sample(am_run* run, size_t* unit, double* q);
AM_API am_status am_run_submit_label(am_run* run, size_t unit, double value, am_report* out);
/* next_sample + submit_label with the pool's own value. */
AM_API am_status am_run_step(am_run* run, am_report* out);
AM_API am_status am_run_push_predictions(am_run* run, const double* predictions, size_t n);
AM_API am_status am_run_report(const am_run* run, am_report* out);
AM_API size_t am_run_t(const am_run* run);
AM_API int am_run_exhausted(const am_run* run);
AM_API size_t am_run_pool_size(const am_run* run);
/* Per-step trajectory; format is "csv" or "jsonl". */
AM_API am_status am_run_export(const am_run* run, const char* path, const char* format);

/* Monte Carlo experiment. Results go to out_path, else to the config's
 * `out` key, else to *text_out (set to NULL when a file was written). The
 * effective configuration is echoed as a header. */
AM_API am_status am_simulate(const char* config_path, const char* const* overrides, size_t n_overrides,
                             const char* out_path, char** text_out);
/* Effective configuration as `key = value` lines. */
AM_API am_status am_config_effective(const char* config_path, const char* const* overrides,
                                     size_t n_overrides, char** text_out);

/* Property suites: bound, unbiased, streaming, coverage, ordering, all.
 * trials = 0 uses each check's default. Returns AM_ERR_CHECK_FAILED when
 * any check fails; the per-check report is written either way. */
AM_API am_status am_verify(const char* suite, size_t trials, uint64_t seed, char** report_out);

/* Replays a session event log; *json_out receives the report list. */
AM_API am_status am_replay(const char* log_path, char** json_out);

/* Session server. store_dir, pool_dir and ui_dir may be NULL. */
AM_API am_status am_server_create(const char* store_dir, const char* pool_dir, const char* ui_dir,
                                  am_server** out);
AM_API am_status am_server_bind(am_server* server, const char* address, int* port_out);
/* Blocks until am_server_stop(). */
AM_API am_status am_server_run(am_server* server);
AM_API void am_server_stop(am_server* server);
AM_API void am_server_free(am_server* server);

#ifdef __cplusplus
}
#endif

#endif
