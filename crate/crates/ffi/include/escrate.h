#ifndef ESCRATE_H
#define ESCRATE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result of a call. Values other than `Ok` leave outputs untouched.
 */
typedef enum EscrateStatus {
  ESCRATE_STATUS_OK = 0,
  ESCRATE_STATUS_NULL_POINTER = 1,
  ESCRATE_STATUS_INVALID_PARAMETER = 2,
  ESCRATE_STATUS_NON_POSITIVE_COEFFICIENT = 3,
  ESCRATE_STATUS_QUADRATURE_FAILURE = 4,
  ESCRATE_STATUS_OUT_OF_RANGE = 5,
  ESCRATE_STATUS_SINGULAR_ORIGIN = 6,
  ESCRATE_STATUS_DOMAIN_ERROR = 7,
  ESCRATE_STATUS_NON_MONOTONE_TRANSFORM = 8,
  ESCRATE_STATUS_NON_POSITIVE_DENOMINATOR = 9,
  ESCRATE_STATUS_FINITE_TOTAL_INTEGRAL = 10,
  ESCRATE_STATUS_EXTRAPOLATION_ERROR = 11,
  ESCRATE_STATUS_NON_FINITE_STATE = 12,
  ESCRATE_STATUS_DRIFT_ORDER_VIOLATED = 13,
  ESCRATE_STATUS_PANIC = 14,
} EscrateStatus;

/*
 Radial coefficient family.
 */
typedef enum EscrateFamily {
  /*
   `ã ≡ 1`; the parameter is ignored.
   */
  ESCRATE_FAMILY_CONSTANT = 0,
  /*
   `(1+r)^α`.
   */
  ESCRATE_FAMILY_POWER = 1,
  /*
   `(1+r)² log(1+r)^β`.
   */
  ESCRATE_FAMILY_SQUARED_LOG = 2,
} EscrateFamily;

typedef enum EscrateVerdict {
  ESCRATE_VERDICT_CONSERVATIVE = 0,
  ESCRATE_VERDICT_NON_CONSERVATIVE = 1,
  ESCRATE_VERDICT_INCONCLUSIVE = 2,
} EscrateVerdict;

/*
 Simulated paths on a shared time grid.
 */
typedef struct EscrateEnsemble EscrateEnsemble;

/*
 Rate function `t ↦ ψ(t)` sampled on a time grid.
 */
typedef struct EscrateRateTable EscrateRateTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or NULL. The pointer is
 valid until the next failing call on the same thread.
 */
const char *escrate_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *escrate_version(void);

/*
 Solves `ψ` for the radial profile of `family` in dimension `n` (unit
 energy) at `times[0..len]`, scaled by `scale`.

 # Safety
 `times` must point to `len` readable doubles and `out` must be writable.
 */
enum EscrateStatus escrate_rate_table_new(enum EscrateFamily family,
                                          double param,
                                          uint32_t n,
                                          const double *times,
                                          size_t len,
                                          double scale,
                                          struct EscrateRateTable **out);

/*
 Interpolated `ψ(t)`.

 # Safety
 `table` must come from [`escrate_rate_table_new`]; `out` must be writable.
 */
enum EscrateStatus escrate_rate_table_eval(const struct EscrateRateTable *table,
                                           double t,
                                           double *out);

/*
 Number of samples in the table, 0 for NULL.

 # Safety
 `table` must be NULL or come from [`escrate_rate_table_new`].
 */
size_t escrate_rate_table_len(const struct EscrateRateTable *table);

/*
 # Safety
 `table` must be NULL or come from [`escrate_rate_table_new`], and is not
 used afterwards.
 */
void escrate_rate_table_free(struct EscrateRateTable *table);

/*
 Conservativeness verdict for `family` in dimension `n`.

 # Safety
 `out` must be writable.
 */
enum EscrateStatus escrate_conservativeness(enum EscrateFamily family,
                                            double param,
                                            uint32_t n,
                                            enum EscrateVerdict *out);

/*
 Simulates `n_paths` Euler paths of `dx = θ(x)dt + σ dw` reflected at
 `floor`. `drift` is a spec such as `"bessel:1"`, `"constant:0.5"`,
 `"power:1:0.5"` or `"hyperbolic:2:1"`. Results depend only on the
 arguments.

 # Safety
 `drift` must be a NUL-terminated string and `out` writable.
 */
enum EscrateStatus escrate_ensemble_new(const char *drift,
                                        double sigma,
                                        double floor,
                                        double x0,
                                        double horizon,
                                        double dt,
                                        size_t n_paths,
                                        uint64_t master_seed,
                                        struct EscrateEnsemble **out);

/*
 Number of paths, 0 for NULL.

 # Safety
 `e` must be NULL or come from [`escrate_ensemble_new`].
 */
size_t escrate_ensemble_n_paths(const struct EscrateEnsemble *e);

/*
 Grid points per path, 0 for NULL.

 # Safety
 `e` must be NULL or come from [`escrate_ensemble_new`].
 */
size_t escrate_ensemble_grid_len(const struct EscrateEnsemble *e);

/*
 Copies path `index` into `buf`, which must hold `grid_len` doubles.

 # Safety
 `e` must come from [`escrate_ensemble_new`]; `buf` must have room for
 `buf_len` doubles.
 */
enum EscrateStatus escrate_ensemble_path(const struct EscrateEnsemble *e,
                                         size_t index,
                                         double *buf,
                                         size_t buf_len);

/*
 # Safety
 `e` must be NULL or come from [`escrate_ensemble_new`], and is not used
 afterwards.
 */
void escrate_ensemble_free(struct EscrateEnsemble *e);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ESCRATE_H */
