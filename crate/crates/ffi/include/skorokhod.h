#ifndef SKOROKHOD_H
#define SKOROKHOD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SkStatus {
  SK_STATUS_OK = 0,
  SK_STATUS_NULL_POINTER = 1,
  SK_STATUS_INVALID_ARGUMENT = 2,
  SK_STATUS_DIMENSION_MISMATCH = 3,
  SK_STATUS_DOMAIN = 4,
  SK_STATUS_RESOURCE = 5,
  SK_STATUS_PARSE = 6,
  SK_STATUS_IO = 7,
  SK_STATUS_PANIC = 8,
  SK_STATUS_OTHER = 9,
} SkStatus;

/**
 * A Lévy model.
 */
typedef struct SkModel SkModel;

/**
 * A càdlàg path.
 */
typedef struct SkPath SkPath;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf`, NUL terminated
 * and truncated to `len`. Returns the full message length, 0 if there is none.
 *
 * # Safety
 * `buf` must be NULL or point to `len` writable bytes.
 */
size_t sk_last_error(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sk_version(void);

/**
 * The maximal-inequality constant.
 */
double sk_kappa(void);

/**
 * Path from `n` breakpoints; `left` and `right` are row-major `n x dim`.
 *
 * # Safety
 * `times` must hold `n` values, `left` and `right` `n * dim` values each.
 */
enum SkStatus sk_path_new(size_t dim,
                          size_t n,
                          const double *times,
                          const double *left,
                          const double *right,
                          struct SkPath **out);

/**
 * Continuous piecewise-linear path through `n` points; `values` is row-major `n x dim`.
 *
 * # Safety
 * `times` must hold `n` values and `values` `n * dim` values.
 */
enum SkStatus sk_path_polyline(size_t dim,
                               size_t n,
                               const double *times,
                               const double *values,
                               struct SkPath **out);

/**
 * Reads a path CSV (`t, v_minus_*, v_plus_*`).
 *
 * # Safety
 * `file` must be a NUL-terminated UTF-8 path.
 */
enum SkStatus sk_path_read_csv(const char *file, struct SkPath **out);

/**
 * # Safety
 * `p` must be NULL or a handle from this library, not yet freed.
 */
void sk_path_free(struct SkPath *p);

/**
 * # Safety
 * `p` must be a live handle.
 */
size_t sk_path_dim(const struct SkPath *p);

/**
 * Number of breakpoints.
 *
 * # Safety
 * `p` must be a live handle.
 */
size_t sk_path_len(const struct SkPath *p);

/**
 * Right-continuous value at `t`, written to `out[0..dim]`.
 *
 * # Safety
 * `p` must be a live handle and `out` must have room for `out_len` values.
 */
enum SkStatus sk_path_evaluate(const struct SkPath *p, double t, double *out, size_t out_len);

/**
 * Strong M1 distance at densification `mesh` (0 selects the default).
 *
 * # Safety
 * `a` and `b` must be live handles and `out` writable.
 */
enum SkStatus sk_m1_distance(const struct SkPath *a,
                             const struct SkPath *b,
                             double mesh,
                             double *out);

/**
 * Product-mode M1 distance `sum_k 2^-(k+1) rho_k / (1 + rho_k)`.
 *
 * # Safety
 * `a` and `b` must be live handles and `out` writable.
 */
enum SkStatus sk_m1_product_distance(const struct SkPath *a,
                                     const struct SkPath *b,
                                     double mesh,
                                     double *out);

/**
 * Oscillation `M(f; delta)`.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum SkStatus sk_oscillation(const struct SkPath *p, double delta, double mesh, double *out);

/**
 * Parses and validates a model from JSON.
 *
 * # Safety
 * `json` must be a NUL-terminated UTF-8 string.
 */
enum SkStatus sk_model_from_json(const char *json, struct SkModel **out);

/**
 * # Safety
 * `m` must be NULL or a handle from this library, not yet freed.
 */
void sk_model_free(struct SkModel *m);

/**
 * # Safety
 * `m` must be a live handle.
 */
size_t sk_model_dim(const struct SkModel *m);

/**
 * Lévy symbol `Psi(u)`.
 *
 * # Safety
 * `u` must hold `d` values; `re` and `im` must be writable.
 */
enum SkStatus sk_model_symbol(const struct SkModel *m,
                              const double *u,
                              size_t d,
                              double *re,
                              double *im);

/**
 * Samples the model on `steps` uniform cells of `[0, horizon]`; the result is
 * the piecewise-constant path.
 *
 * # Safety
 * `m` must be a live handle and `out` writable.
 */
enum SkStatus sk_model_sample_path(const struct SkModel *m,
                                   double horizon,
                                   size_t steps,
                                   uint64_t seed,
                                   struct SkPath **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SKOROKHOD_H */
