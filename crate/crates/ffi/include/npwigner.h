#ifndef NPWIGNER_H
#define NPWIGNER_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NpwStatus {
  NPW_STATUS_OK = 0,
  NPW_STATUS_NULL_POINTER = 1,
  NPW_STATUS_INVALID_ARGUMENT = 2,
  NPW_STATUS_WINDOW_EXCEEDED = 3,
  NPW_STATUS_DOMAIN = 4,
  NPW_STATUS_NOT_DENSITY = 5,
  NPW_STATUS_PARSE = 6,
  NPW_STATUS_NUMERIC = 7,
  NPW_STATUS_PANIC = 8,
} NpwStatus;

/**
 * Opaque kernel handle.
 */
typedef struct NpwKernel NpwKernel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next library call on the thread.
 */
const char *npw_last_error(void);

/**
 * Library version as a static string.
 */
const char *npw_version(void);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void npw_string_free(char *s);

/**
 * Kernel with base matrix on [n_min, n_max]; `variant` is one of w1, w2, w3, s1, s2.
 *
 * # Safety
 * `variant` must be a NUL-terminated string and `out` a valid pointer.
 */
enum NpwStatus npw_kernel_new(const char *variant,
                              int64_t n_min,
                              int64_t n_max,
                              struct NpwKernel **out);

/**
 * Smallest kernel serving states on [s_min, s_max] for every n in [n_lo, n_hi].
 *
 * # Safety
 * As for [`npw_kernel_new`].
 */
enum NpwStatus npw_kernel_for_states(const char *variant,
                                     int64_t s_min,
                                     int64_t s_max,
                                     int64_t n_lo,
                                     int64_t n_hi,
                                     struct NpwKernel **out);

/**
 * # Safety
 * `kern` must come from this library or be null; it is invalid afterwards.
 */
void npw_kernel_free(struct NpwKernel *kern);

/**
 * Base window of the kernel.
 *
 * # Safety
 * All pointers must be valid.
 */
enum NpwStatus npw_kernel_window(const struct NpwKernel *kern, int64_t *n_min, int64_t *n_max);

/**
 * ⟨k|Ŵ(n,θ)|ℓ⟩.
 *
 * # Safety
 * All pointers must be valid.
 */
enum NpwStatus npw_kernel_element(const struct NpwKernel *kern,
                                  int64_t k,
                                  int64_t l,
                                  int64_t n,
                                  double theta,
                                  double *re,
                                  double *im);

/**
 * Text export of the base matrix plus `samples` replay tuples; free with [`npw_string_free`].
 *
 * # Safety
 * All pointers must be valid.
 */
enum NpwStatus npw_kernel_export(const struct NpwKernel *kern, size_t samples, char **out);

/**
 * Kernel from a text export.
 *
 * # Safety
 * `text` must be NUL-terminated and `out` valid.
 */
enum NpwStatus npw_kernel_import(const char *text, struct NpwKernel **out);

/**
 * W(n,θ) for a density matrix on [s_min, s_max].
 *
 * `rho_re`/`rho_im` are row-major dim×dim; `out` receives (n_hi−n_lo+1)×n_theta values,
 * row n, column θ-node.
 *
 * # Safety
 * Buffers must hold the stated number of elements.
 */
enum NpwStatus npw_wigner(const struct NpwKernel *kern,
                          int64_t s_min,
                          int64_t s_max,
                          const double *rho_re,
                          const double *rho_im,
                          int64_t n_lo,
                          int64_t n_hi,
                          const double *thetas,
                          size_t n_theta,
                          double *out);

/**
 * Condition report as JSON; `matches` is set to 1 when every verdict is as expected.
 * A non-positive `tol` keeps the default thresholds.
 *
 * # Safety
 * All pointers must be valid.
 */
enum NpwStatus npw_verify(const char *variant,
                          int64_t n_min,
                          int64_t n_max,
                          uint64_t seed,
                          double tol,
                          char **json,
                          int32_t *matches);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NPWIGNER_H */
