#ifndef SAMPLING_RECOVERY_H
#define SAMPLING_RECOVERY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call.
 */
typedef enum SrStatus {
  SR_STATUS_OK = 0,
  SR_STATUS_NULL_POINTER = 1,
  SR_STATUS_INVALID_ARGUMENT = 2,
  SR_STATUS_DIMENSION_MISMATCH = 3,
  SR_STATUS_CAP_EXCEEDED = 4,
  SR_STATUS_IO = 5,
  SR_STATUS_PANIC = 6,
} SrStatus;

/**
 * Opaque finitely supported coefficient function.
 */
typedef struct SrCoefFn SrCoefFn;

/**
 * Opaque set of multi-indices.
 */
typedef struct SrIndexSet SrIndexSet;

/**
 * Opaque point set in [0, 2π)^d.
 */
typedef struct SrPointSet SrPointSet;

/**
 * Settings of [`sr_recover`]; obtain defaults from
 * [`sr_recovery_options_default`].
 */
typedef struct SrRecoveryOptions {
  size_t v;
  double p;
  double t;
  /**
   * Iteration multiplier.
   */
  double c;
  double c_user;
  /**
   * 3 or 4 for the log budgets, 0 to use `m_explicit`.
   */
  int32_t log_exponent;
  size_t m_explicit;
  uint64_t seed;
  bool verify_ud;
} SrRecoveryOptions;

typedef struct SrRecoveryResult {
  size_t m;
  double err_lp;
  double err_l2_disc;
  size_t iterations;
  /**
   * 1 pass, 0 fail, −1 when not checked.
   */
  int32_t ud_pass;
  size_t redraws;
} SrRecoveryResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or an empty string.
 * Valid until the next failure on the same thread.
 */
const char *sr_last_error_message(void);

/**
 * The hyperbolic cross Q_n in dimension d.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum SrStatus sr_hyperbolic_cross(uint32_t n, size_t d, struct SrIndexSet **out);

/**
 * The cube [−m, m]^d.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum SrStatus sr_full_cube(uint64_t m, size_t d, struct SrIndexSet **out);

/**
 * Builds a set from `len` multi-indices stored row by row in `coords`.
 *
 * # Safety
 * `coords` must point to `len * d` readable integers; `out` as above.
 */
enum SrStatus sr_index_set_from_coords(size_t d,
                                       const int64_t *coords,
                                       size_t len,
                                       struct SrIndexSet **out);

/**
 * Number of members, or 0 for NULL.
 *
 * # Safety
 * `set` must be NULL or a live handle.
 */
size_t sr_index_set_len(const struct SrIndexSet *set);

/**
 * Dimension, or 0 for NULL.
 *
 * # Safety
 * `set` must be NULL or a live handle.
 */
size_t sr_index_set_dim(const struct SrIndexSet *set);

/**
 * Copies member `i` (in sorted order) into `coords`, which holds `dim`
 * integers.
 *
 * # Safety
 * `set` must be a live handle and `coords` writable for `dim` integers.
 */
enum SrStatus sr_index_set_get(const struct SrIndexSet *set, size_t i, int64_t *coords);

/**
 * # Safety
 * `set` must be NULL or a handle not yet freed.
 */
void sr_index_set_free(struct SrIndexSet *set);

/**
 * m independent uniform points in [0, 2π)^d.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum SrStatus sr_draw_points(size_t m, size_t d, uint64_t seed, struct SrPointSet **out);

/**
 * Points from `m * d` coordinates stored row by row.
 *
 * # Safety
 * `coords` must point to `m * d` readable doubles; `out` as above.
 */
enum SrStatus sr_point_set_from_coords(size_t d,
                                       const double *coords,
                                       size_t m,
                                       struct SrPointSet **out);

/**
 * Number of points, or 0 for NULL.
 *
 * # Safety
 * `points` must be NULL or a live handle.
 */
size_t sr_point_set_len(const struct SrPointSet *points);

/**
 * # Safety
 * `points` must be NULL or a handle not yet freed.
 */
void sr_point_set_free(struct SrPointSet *points);

/**
 * Extreme eigenvalues of the discrete Gram matrix of `set` on `points`.
 *
 * # Safety
 * Handles must be live; `lo` and `hi` writable.
 */
enum SrStatus sr_gram_spectrum(const struct SrPointSet *points,
                               const struct SrIndexSet *set,
                               double *lo,
                               double *hi);

/**
 * ⌈c·v·(ln 2v)^e⌉ with e = `log_exponent`, which must be 3 or 4.
 *
 * # Safety
 * `out` must be writable.
 */
enum SrStatus sr_m_budget(size_t v, int32_t log_exponent, double c_user, size_t *out);

/**
 * The zero function in dimension d.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum SrStatus sr_coef_fn_new(size_t d, struct SrCoefFn **out);

/**
 * Sets the coefficient of frequency `k` (dim integers); zero removes it.
 *
 * # Safety
 * `f` must be live and `k` readable for the dimension of `f`.
 */
enum SrStatus sr_coef_fn_set(struct SrCoefFn *f, const int64_t *k, double re, double im);

/**
 * Number of nonzero terms, or 0 for NULL.
 *
 * # Safety
 * `f` must be NULL or a live handle.
 */
size_t sr_coef_fn_len(const struct SrCoefFn *f);

/**
 * Term `i` in lexicographic frequency order.
 *
 * # Safety
 * `f` must be live; `k` writable for the dimension; `re`, `im` writable.
 */
enum SrStatus sr_coef_fn_term(const struct SrCoefFn *f,
                              size_t i,
                              int64_t *k,
                              double *re,
                              double *im);

/**
 * # Safety
 * `f` must be NULL or a handle not yet freed.
 */
void sr_coef_fn_free(struct SrCoefFn *f);

/**
 * f at every point; `re` and `im` receive one value per point.
 *
 * # Safety
 * Handles must be live; `re` and `im` writable for the point count.
 */
enum SrStatus sr_sample(const struct SrCoefFn *f,
                        const struct SrPointSet *points,
                        double *re,
                        double *im);

/**
 * WOMP on samples (`re`, `im`, one per point) over the trigonometric
 * columns of `set`. Writes the approximant and, unless NULL, the
 * `iterations + 1` residual norms.
 *
 * # Safety
 * Handles must be live; `re`, `im` readable for the point count;
 * `residual_norms` NULL or writable for `iterations + 1` doubles.
 */
enum SrStatus sr_womp(const struct SrPointSet *points,
                      const struct SrIndexSet *set,
                      const double *re,
                      const double *im,
                      double t,
                      size_t iterations,
                      struct SrCoefFn **approximant,
                      double *residual_norms);

/**
 * # Safety
 * `out` must be writable.
 */
enum SrStatus sr_recovery_options_default(struct SrRecoveryOptions *out);

/**
 * WOMP recovery of f from random samples over the automatic hyperbolic
 * cross dictionary.
 *
 * # Safety
 * `f` and `opts` must be live; `approximant` and `result` writable.
 */
enum SrStatus sr_recover(const struct SrCoefFn *f,
                         const struct SrRecoveryOptions *opts,
                         struct SrCoefFn **approximant,
                         struct SrRecoveryResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SAMPLING_RECOVERY_H */
