/*
 * radixtiles C API.
 *
 * Every fallible call returns an RtStatus; on anything other than
 * RT_STATUS_OK, rt_last_error() describes the failure. Handles are opaque and
 * must be released with their *_free function. Strings returned through
 * `char **` are owned by the caller and released with rt_string_free.
 */

#ifndef RADIXTILES_H
#define RADIXTILES_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum RtStatus {
  RT_STATUS_OK = 0,
  RT_STATUS_NULL_POINTER = 1,
  RT_STATUS_INVALID_ARGUMENT = 2,
  RT_STATUS_SINGULAR_MATRIX = 3,
  RT_STATUS_DIMENSION_MISMATCH = 4,
  RT_STATUS_INVALID_DIGITS = 5,
  RT_STATUS_NOT_DILATION = 6,
  RT_STATUS_RESOURCE_LIMIT = 7,
  RT_STATUS_STEP_BUDGET_EXCEEDED = 8,
  RT_STATUS_NO_BETA_FOUND = 9,
  RT_STATUS_IO = 10,
  RT_STATUS_INTERNAL = 11,
  RT_STATUS_PANIC = 12,
} RtStatus;

/**
 * Opaque validated digit set (carries its matrix).
 */
typedef struct RtDigitSet RtDigitSet;

/**
 * Opaque integer matrix.
 */
typedef struct RtMatrix RtMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread ("" after a success).
 * The pointer stays valid until the next rt_* call on the same thread.
 */
const char *rt_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void rt_string_free(char *s);

/**
 * n x n matrix from row-major entries.
 *
 * # Safety
 * `entries` must point to n*n readable values; `out` must be writable.
 */
enum RtStatus rt_matrix_new(size_t n, const int64_t *entries, struct RtMatrix **out);

/**
 * Matrix from JSON rows, e.g. `[[1,1],[-1,1]]` (numbers or decimal strings).
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum RtStatus rt_matrix_from_json(const char *json, struct RtMatrix **out);

/**
 * # Safety
 * `m` must come from rt_matrix_* and not have been freed. Null is ignored.
 */
void rt_matrix_free(struct RtMatrix *m);

/**
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum RtStatus rt_matrix_dim(const struct RtMatrix *m, size_t *out);

/**
 * All eigenvalues strictly outside the unit circle (exact test).
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum RtStatus rt_is_dilation(const struct RtMatrix *m, bool *out);

/**
 * Smallest singular value strictly above 2 (exact test).
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum RtStatus rt_mu_exceeds_two(const struct RtMatrix *m, bool *out);

/**
 * Canonical digit set A(F) ∩ Z^n; `cap` bounds the enumeration (0 = default).
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum RtStatus rt_digits_canonical(const struct RtMatrix *m, uint64_t cap, struct RtDigitSet **out);

/**
 * Validates `count` digits given as a row-major count x n array.
 *
 * # Safety
 * `m` must be a live handle, `digits` must hold count*n values and `out`
 * must be writable.
 */
enum RtStatus rt_digits_new(const struct RtMatrix *m,
                            size_t count,
                            const int64_t *digits,
                            struct RtDigitSet **out);

/**
 * Digit set from `{"matrix": [...], "digits": [...]}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum RtStatus rt_digits_from_json(const char *json, struct RtDigitSet **out);

/**
 * # Safety
 * `d` must come from rt_digits_* and not have been freed. Null is ignored.
 */
void rt_digits_free(struct RtDigitSet *d);

/**
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
enum RtStatus rt_digits_count(const struct RtDigitSet *d, size_t *out);

/**
 * # Safety
 * `d` must be a live handle; `out` must be writable. Free the result with
 * rt_string_free.
 */
enum RtStatus rt_digits_to_json(const struct RtDigitSet *d, char **out);

/**
 * Decides whether every lattice vector has a finite expansion. `cap` bounds
 * the ball enumeration (0 = default). `report`, if non-null, receives the
 * full JSON report.
 *
 * # Safety
 * `d` must be a live handle; `yields` must be writable; `report` may be null.
 */
enum RtStatus rt_decide(const struct RtDigitSet *d, uint64_t cap, bool *yields, char **report);

/**
 * Digit expansion of `x` (length n) as JSON. `max_steps` 0 = default.
 *
 * # Safety
 * `d` must be a live handle, `x` must hold n values and `out` must be
 * writable.
 */
enum RtStatus rt_expand_json(const struct RtDigitSet *d,
                             const int64_t *x,
                             size_t n,
                             size_t max_steps,
                             char **out);

/**
 * Mean number of lattice translates of T covering a uniform point of
 * [-1/2, 1/2)^n; about 1 exactly when T tiles by Z^n.
 *
 * # Safety
 * `d` must be a live handle; `mean` must be writable.
 */
enum RtStatus rt_multiplicity(const struct RtDigitSet *d,
                              size_t samples,
                              uint32_t depth,
                              uint64_t seed,
                              double *mean);

/**
 * m0(xi) = q^{-1} sum_d exp(-2 pi i d.xi).
 *
 * # Safety
 * `d` must be a live handle, `xi` must hold n values, `re` and `im` must be
 * writable.
 */
enum RtStatus rt_lowpass_symbol(const struct RtDigitSet *d,
                                const double *xi,
                                size_t n,
                                double *re,
                                double *im);

/**
 * Writes a binary PGM of the depth-k tile approximation (2-D only).
 * `style` 0 marks each point's pixel, 1 fills each point's cell.
 * `window` is {xmin, xmax, ymin, ymax} or null for the square of radius R_T.
 *
 * # Safety
 * `d` must be a live handle, `path` a NUL-terminated string and `window`
 * null or 4 readable values.
 */
enum RtStatus rt_render_pgm(const struct RtDigitSet *d,
                            uint32_t depth,
                            size_t width,
                            size_t height,
                            uint32_t style,
                            const double *window,
                            const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RADIXTILES_H */
