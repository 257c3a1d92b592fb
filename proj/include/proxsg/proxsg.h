/*
 * C interface of libproxsg.
 *
 * Every object is an opaque handle created by a *_create / *_load / *_run
 * function and released with the matching *_free function (free functions
 * accept NULL). Functions return a proxsg_status; on failure a message is
 * available from proxsg_last_error() on the calling thread until the next
 * failing call on that thread. Strings returned through `const char**`
 * out-parameters are owned by the handle and stay valid until it is freed.
 */
#ifndef PROXSG_PROXSG_H_
#define PROXSG_PROXSG_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define PROXSG_API __declspec(dllexport)
#elif defined(__GNUC__)
#  define PROXSG_API __attribute__((visibility("default")))
#else
#  define PROXSG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum proxsg_status {
  PROXSG_OK = 0,
  PROXSG_E_INVALID_ARGUMENT = 1,
  PROXSG_E_DIMENSION_MISMATCH = 2,
  PROXSG_E_DEGENERATE_STEP = 3,
  PROXSG_E_NOT_CONVERGED = 4,
  PROXSG_E_INFEASIBLE = 5,
  PROXSG_E_INFEASIBLE_START = 6,
  PROXSG_E_NUMERICAL = 7,
  PROXSG_E_PROX = 8,
  PROXSG_E_IO = 9,
  PROXSG_E_PARSE = 10,
  PROXSG_E_LOAD = 11,
  PROXSG_E_RUN_FAILED = 20, /* a sweep finished but some runs reported errors */
  PROXSG_E_INTERNAL = 99
} proxsg_status;

typedef struct proxsg_config proxsg_config;
typedef struct proxsg_cs_instance proxsg_cs_instance;
typedef struct proxsg_cs_result proxsg_cs_result;
typedef struct proxsg_opf_result proxsg_opf_result;
typedef struct proxsg_check_result proxsg_check_result;

typedef struct proxsg_solve_summary {
  int iterations;
  int converged;             /* 1 when the stopping rule fired */
  double objective;          /* F at the final iterate */
  double initial_objective;  /* F(x_0) */
  double gt_error;           /* ||x - x_g|| / ||x_g|| */
  double lyapunov_violation; /* max decrease violation over the run */
} proxsg_solve_summary;

PROXSG_API const char* proxsg_version(void);
PROXSG_API const char* proxsg_status_string(proxsg_status status);
PROXSG_API const char* proxsg_last_error(void);

/* Flat key = value configuration. */
PROXSG_API proxsg_status proxsg_config_load(const char* path, proxsg_config** out);
PROXSG_API proxsg_status proxsg_config_parse(const char* text, proxsg_config** out);
PROXSG_API void proxsg_config_free(proxsg_config* cfg);

/* Compressed-sensing instances. `loss` is "least_squares" or "lorentzian". */
PROXSG_API proxsg_status proxsg_cs_instance_create(int case_id, const char* loss, uint64_t seed,
                                                   proxsg_cs_instance** out);
PROXSG_API proxsg_status proxsg_cs_instance_load(const char* dir, proxsg_cs_instance** out);
PROXSG_API proxsg_status proxsg_cs_instance_write(const proxsg_cs_instance* inst, const char* dir);
PROXSG_API proxsg_status proxsg_cs_instance_dims(const proxsg_cs_instance* inst, size_t* m, size_t* d, size_t* s);
/* `solver` is "proposed", "gppa" or "pdcae"; starts at the origin with the paper's parameters. */
PROXSG_API proxsg_status proxsg_cs_solve(const proxsg_cs_instance* inst, const char* solver, int max_iter,
                                         proxsg_solve_summary* out);
PROXSG_API void proxsg_cs_instance_free(proxsg_cs_instance* inst);

/* Compressed-sensing sweep. Returns PROXSG_OK even when some runs failed; see all_ok. */
PROXSG_API proxsg_status proxsg_cs_run(const proxsg_config* cfg, proxsg_cs_result** out);
PROXSG_API int proxsg_cs_result_all_ok(const proxsg_cs_result* res);
PROXSG_API proxsg_status proxsg_cs_result_csv(const proxsg_cs_result* res, const char** csv);
PROXSG_API proxsg_status proxsg_cs_result_runs_csv(const proxsg_cs_result* res, const char** csv);
/* Writes the CSV files named by output_csv / runs_csv in the config (if any). */
PROXSG_API proxsg_status proxsg_cs_result_write(const proxsg_cs_result* res);
PROXSG_API void proxsg_cs_result_free(proxsg_cs_result* res);

/* DC OPF multi-start experiment. */
PROXSG_API proxsg_status proxsg_opf_run(const proxsg_config* cfg, proxsg_opf_result** out);
PROXSG_API int proxsg_opf_result_all_ok(const proxsg_opf_result* res);
PROXSG_API proxsg_status proxsg_opf_result_csv(const proxsg_opf_result* res, const char** csv);
/* Full report: summaries, best plan, rate diagnostic. */
PROXSG_API proxsg_status proxsg_opf_result_json(const proxsg_opf_result* res, const char** json);
PROXSG_API proxsg_status proxsg_opf_result_plan_table(const proxsg_opf_result* res, const char** table);
PROXSG_API proxsg_status proxsg_opf_result_best_objective(const proxsg_opf_result* res, double* value);
/* Rounded placement of the best plan: writes up to `cap` bus numbers, sets *count to the full size. */
PROXSG_API proxsg_status proxsg_opf_result_placement(const proxsg_opf_result* res, int* buses, size_t cap,
                                                     size_t* count);
PROXSG_API proxsg_status proxsg_opf_result_write(const proxsg_opf_result* res);
PROXSG_API void proxsg_opf_result_free(proxsg_opf_result* res);

/* Invariant suite. `network_dir` may be NULL for the default location. */
PROXSG_API proxsg_status proxsg_check_run(const char* network_dir, int inject_monotonicity_breaker,
                                          proxsg_check_result** out);
PROXSG_API size_t proxsg_check_count(const proxsg_check_result* res);
PROXSG_API proxsg_status proxsg_check_get(const proxsg_check_result* res, size_t index, const char** name,
                                          int* passed, const char** detail);
PROXSG_API int proxsg_check_all_passed(const proxsg_check_result* res);
PROXSG_API void proxsg_check_result_free(proxsg_check_result* res);

#ifdef __cplusplus
}
#endif

#endif /* PROXSG_PROXSG_H_ */
