#ifndef BVCALC_H
#define BVCALC_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/*
 Result codes.
 */
typedef enum BvcStatus {
  BVC_STATUS_OK = 0,
  BVC_STATUS_NULL_POINTER = 1,
  BVC_STATUS_INVALID_UTF8 = 2,
  BVC_STATUS_UNKNOWN_SCENARIO = 3,
  BVC_STATUS_INVALID_ARGUMENT = 4,
  BVC_STATUS_PARSE = 5,
  BVC_STATUS_NUMERICAL = 6,
  BVC_STATUS_IO = 7,
  BVC_STATUS_PANIC = 8,
} BvcStatus;

/*
 A catalog integrand.
 */
typedef struct BvcIntegrand BvcIntegrand;

/*
 A finished scenario run.
 */
typedef struct BvcReport BvcReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failure on this thread, or null. Valid until the
 next failing call on the same thread.
 */
const char *bvc_last_error(void);

/*
 Releases a string handed out by this library. Null is ignored.

 # Safety
 `s` must come from this library and not have been freed.
 */
void bvc_string_free(char *s);

/*
 Number of scenarios in the catalog.
 */
uintptr_t bvc_scenario_count(void);

/*
 Identifier of scenario `index`.

 # Safety
 `out` must be valid for writes.
 */
enum BvcStatus bvc_scenario_id(uintptr_t index, char **out);

/*
 Runs a scenario. With a null `output_dir` nothing is written to disk.

 # Safety
 `scenario` and a non-null `output_dir` must be NUL-terminated strings;
 `out` must be valid for writes.
 */
enum BvcStatus bvc_run_scenario(const char *scenario,
                                uintptr_t resolution,
                                uintptr_t jmax,
                                double tolerance,
                                uint64_t seed,
                                const char *output_dir,
                                struct BvcReport **out);

/*
 Whether every expected-outcome clause held.

 # Safety
 `report` must be a live handle and `passed` valid for writes.
 */
enum BvcStatus bvc_report_passed(const struct BvcReport *report, bool *passed);

/*
 The report as JSON, byte-identical to `report.json`.

 # Safety
 `report` must be a live handle and `out` valid for writes.
 */
enum BvcStatus bvc_report_json(const struct BvcReport *report, char **out);

/*
 # Safety
 `report` must come from [`bvc_run_scenario`] and not have been freed.
 */
void bvc_report_free(struct BvcReport *report);

/*
 Evaluates a 1D case given as JSON with the reference summation.

 # Safety
 `case_json` must be a NUL-terminated string and `value` valid for writes.
 */
enum BvcStatus bvc_oracle_1d(const char *case_json, double *value);

/*
 Looks up an integrand by identifier (`norm`, `area`, `w-shape`,
 `shifted-norm`, optionally prefixed with `x-modulated-`).

 # Safety
 `id` must be a NUL-terminated string and `out` valid for writes.
 */
enum BvcStatus bvc_integrand_new(const char *id, struct BvcIntegrand **out);

/*
 `F(x, A)` with `A` given row-major.

 # Safety
 `f` must be a live handle, `a` must point to `rows·cols` doubles and
 `value` must be valid for writes.
 */
enum BvcStatus bvc_integrand_eval(const struct BvcIntegrand *f,
                                  double x0,
                                  double x1,
                                  const double *a,
                                  uintptr_t rows,
                                  uintptr_t cols,
                                  double *value);

/*
 `F^∞(x, A)`.

 # Safety
 As for [`bvc_integrand_eval`].
 */
enum BvcStatus bvc_integrand_recession(const struct BvcIntegrand *f,
                                       double x0,
                                       double x1,
                                       const double *a,
                                       uintptr_t rows,
                                       uintptr_t cols,
                                       double *value);

/*
 # Safety
 `f` must come from [`bvc_integrand_new`] and not have been freed.
 */
void bvc_integrand_free(struct BvcIntegrand *f);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BVCALC_H */
