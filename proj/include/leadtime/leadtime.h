/* leadtime-lab C interface. All handles are opaque; functions returning
 * ltl_status leave a message in ltl_last_error() on failure. */
#ifndef LEADTIME_LEADTIME_H
#define LEADTIME_LEADTIME_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LTL_API __declspec(dllexport)
#elif defined(__GNUC__)
#define LTL_API __attribute__((visibility("default")))
#else
#define LTL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define LTL_SUPPORT_SIZE 366

typedef enum ltl_status {
  LTL_OK = 0,
  LTL_ERR_INVALID_ARGUMENT = 1,
  LTL_ERR_NEGATIVE_MASS = 2,
  LTL_ERR_BAD_LENGTH = 3,
  LTL_ERR_SUM_OUT_OF_TOLERANCE = 4,
  LTL_ERR_THRESHOLD_OUT_OF_RANGE = 5,
  LTL_ERR_EMPTY_INPUT = 6,
  LTL_ERR_MIXED_METRICS = 7,
  LTL_ERR_UNSORTED_DATES = 8,
  LTL_ERR_DUPLICATE_DATES = 9,
  LTL_ERR_SERIES_TOO_SHORT = 10,
  LTL_ERR_INVALID_CONFIG = 11,
  LTL_ERR_DEGENERATE_MASS = 12,
  LTL_ERR_DEGENERATE_INPUT = 13,
  LTL_ERR_TOO_FEW_EXCEEDANCES = 14,
  LTL_ERR_ALL_STAGES_FAILED = 15,
  LTL_ERR_BASIS_TOO_SMALL = 16,
  LTL_ERR_INVALID_SPEC = 17,
  LTL_ERR_MISSING_STAGE_OUTPUT = 18,
  LTL_ERR_IO = 19,
  LTL_ERR_PARSE = 20,
  LTL_ERR_NON_MONOTONE_CDF = 21,
  LTL_ERR_INTERNAL = 100
} ltl_status;

typedef enum ltl_metric { LTL_METRIC_NIGHTS = 0, LTL_METRIC_GBV = 1 } ltl_metric;

typedef struct ltl_config ltl_config;
typedef struct ltl_result ltl_result;
typedef struct ltl_panel ltl_panel;

LTL_API const char* ltl_version(void);

/* Message of the last failure on the calling thread; empty when none. */
LTL_API const char* ltl_last_error(void);
LTL_API const char* ltl_status_name(ltl_status status);

/* Run configuration. Keys mirror the CLI flags without dashes:
 * input, output, scenario, stages, seed, tail-thresholds, gpd-thresholds,
 * replicates, max-breaks, trim, draws-per-day, jitter (true/false),
 * supf-null-draws. Lists are comma separated. */
LTL_API ltl_status ltl_config_create(ltl_config** out);
LTL_API void ltl_config_destroy(ltl_config* config);
LTL_API ltl_status ltl_config_set(ltl_config* config, const char* key, const char* value);

/* Runs the pipeline. A result is produced even when the run fails; check
 * ltl_result_exit_code (0 ok, 2 invalid input or config, 3 stage failure). */
LTL_API ltl_status ltl_run(const ltl_config* config, ltl_result** out);
LTL_API int ltl_result_exit_code(const ltl_result* result);
LTL_API const char* ltl_result_failed_stage(const ltl_result* result);
LTL_API const char* ltl_result_message(const ltl_result* result);
LTL_API size_t ltl_result_diagnostic_count(const ltl_result* result);
LTL_API const char* ltl_result_diagnostic(const ltl_result* result, size_t index);
LTL_API size_t ltl_result_stage_count(const ltl_result* result);
LTL_API const char* ltl_result_stage(const ltl_result* result, size_t index);
LTL_API void ltl_result_destroy(ltl_result* result);

/* Generates the panel described by a scenario JSON file and writes it as an
 * input CSV. seed overrides the scenario's own seed when has_seed != 0. */
LTL_API ltl_status ltl_simulate(const char* scenario_path, const char* output_csv,
                                uint64_t seed, int has_seed);

/* Panels read from input CSV files. */
LTL_API ltl_status ltl_panel_read(const char* path, ltl_panel** out);
LTL_API size_t ltl_panel_day_count(const ltl_panel* panel);
LTL_API ltl_status ltl_panel_date(const ltl_panel* panel, size_t day, char out[11]);
LTL_API ltl_status ltl_panel_pmf(const ltl_panel* panel, size_t day, ltl_metric metric,
                                 double out[LTL_SUPPORT_SIZE]);
LTL_API void ltl_panel_destroy(ltl_panel* panel);

/* Numeric routines on raw length-366 pmfs. */
LTL_API ltl_status ltl_wasserstein1(const double* p, const double* q, double* out);
LTL_API ltl_status ltl_kld(const double* x, const double* xhat, double* out);
LTL_API ltl_status ltl_tail_mass(const double* pmf, int u, double* out);

/* out = {point, ci_low, ci_high} */
LTL_API ltl_status ltl_block_bootstrap_mean(const double* series, size_t n, size_t replicates,
                                            uint64_t seed, double out[3]);
LTL_API ltl_status ltl_newey_west(const double* series, size_t n, double* long_run_variance,
                                  double* bandwidth);

/* out = {xi, beta}; estimator receives 0 MLE_A, 1 MLE_B, 2 PWM, 3 MOM. */
LTL_API ltl_status ltl_fit_gpd(const double* exceedances, size_t n, double u, double out[2],
                               int* estimator);

#ifdef __cplusplus
}
#endif

#endif
