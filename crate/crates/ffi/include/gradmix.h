#ifndef GRADMIX_H
#define GRADMIX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GradmixScheme {
  GRADMIX_SCHEME_FFD = 0,
  GRADMIX_SCHEME_CFD = 1,
  GRADMIX_SCHEME_GSG = 2,
  GRADMIX_SCHEME_CGSG = 3,
  GRADMIX_SCHEME_NMXFD = 4,
  GRADMIX_SCHEME_MXFD_RAW = 5,
  GRADMIX_SCHEME_AVG_CFD = 6,
} GradmixScheme;

/**
 * Status codes returned by every fallible function. `GRADMIX_STATUS_OK` is zero.
 */
typedef enum GradmixStatus {
  GRADMIX_STATUS_OK = 0,
  GRADMIX_STATUS_NULL_POINTER = 1,
  GRADMIX_STATUS_INVALID_ARGUMENT = 2,
  GRADMIX_STATUS_UNKNOWN_OBJECTIVE = 3,
  GRADMIX_STATUS_DIMENSION_MISMATCH = 4,
  GRADMIX_STATUS_NON_FINITE = 5,
  GRADMIX_STATUS_BUFFER_TOO_SMALL = 6,
  GRADMIX_STATUS_MISSING_GRADIENT = 7,
  GRADMIX_STATUS_PANIC = 8,
} GradmixStatus;

/**
 * Opaque objective handle.
 */
typedef struct GradmixObjective GradmixObjective;

/**
 * Estimator settings. Zero in `h`, `half_width`, `m` or `directions` selects the
 * library default; `lambda > 0` adds seeded Gaussian noise to every evaluation.
 */
typedef struct GradmixParams {
  enum GradmixScheme scheme;
  /**
   * Smoothing scale σ.
   */
  double sigma;
  /**
   * Quadrature step h.
   */
  double h;
  /**
   * Truncation half-width S = m·h.
   */
  double half_width;
  /**
   * Number of mixed central differences m.
   */
  size_t m;
  /**
   * Sampled directions M.
   */
  size_t directions;
  uint64_t seed;
  /**
   * Noise standard deviation λ.
   */
  double lambda;
  uint64_t noise_seed;
} GradmixParams;

/**
 * Scalar callback `value = f(x, n, user_data)`; NULL is rejected.
 */
typedef double (*GradmixCallback)(const double *x, size_t n, void *user_data);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until the next call
 * into the library from the same thread.
 */
const char *gradmix_last_error(void);

/**
 * Default settings for `scheme` at scale `sigma`.
 */
struct GradmixParams gradmix_params_default(enum GradmixScheme scheme, double sigma);

/**
 * Looks up a built-in objective. `dim = 0` keeps its default dimension.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum GradmixStatus gradmix_objective_from_registry(const char *name,
                                                   size_t dim,
                                                   struct GradmixObjective **out);

/**
 * Wraps a C callback of dimension `dim`. `user_data` is passed back unchanged and must
 * outlive the handle.
 *
 * # Safety
 * `out` must be a valid pointer; `callback` must be safe to call with any `x` of
 * length `dim`.
 */
enum GradmixStatus gradmix_objective_from_callback(size_t dim,
                                                   GradmixCallback callback,
                                                   void *user_data,
                                                   struct GradmixObjective **out);

/**
 * Releases a handle. NULL is ignored.
 *
 * # Safety
 * `obj` must come from one of the constructors and not have been freed.
 */
void gradmix_objective_free(struct GradmixObjective *obj);

/**
 * Dimension of the objective, 0 for NULL.
 *
 * # Safety
 * `obj` must be NULL or a live handle.
 */
size_t gradmix_objective_dim(const struct GradmixObjective *obj);

/**
 * Estimates the gradient at `x` (length `n`) into `out` (capacity `out_len >= n`).
 * `evals`, when non-NULL, receives the number of objective calls.
 *
 * # Safety
 * Pointers must be valid for the stated lengths; `obj` must be a live handle.
 */
enum GradmixStatus gradmix_estimate(const struct GradmixObjective *obj,
                                    const struct GradmixParams *params,
                                    const double *x,
                                    size_t n,
                                    double *out,
                                    size_t out_len,
                                    size_t *evals);

/**
 * Analytic gradient of a built-in objective.
 *
 * # Safety
 * As [`gradmix_estimate`].
 */
enum GradmixStatus gradmix_true_gradient(const struct GradmixObjective *obj,
                                         const double *x,
                                         size_t n,
                                         double *out,
                                         size_t out_len);

/**
 * Normalized weights `a_1..a_m` into `out` (capacity `out_len >= m`); the raw total
 * `C` into `total` when non-NULL.
 *
 * # Safety
 * `out` must be valid for `out_len` values.
 */
enum GradmixStatus gradmix_mixing_coefficients(size_t m,
                                               double h,
                                               double *out,
                                               size_t out_len,
                                               double *total);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRADMIX_H */
