#ifndef TTDESIGN_H
#define TTDESIGN_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TtdStatus {
  TTD_STATUS_OK = 0,
  TTD_STATUS_NULL_POINTER = 1,
  TTD_STATUS_INVALID_ARGUMENT = 2,
  TTD_STATUS_DIMENSION_MISMATCH = 3,
  TTD_STATUS_NOT_UNIT_NORM = 4,
  TTD_STATUS_PRECONDITION = 5,
  TTD_STATUS_IO = 6,
  TTD_STATUS_FORMAT = 7,
  TTD_STATUS_PANIC = 8,
} TtdStatus;

typedef enum TtdNormMode {
  TTD_NORM_MODE_EQUAL_NORM = 0,
  TTD_NORM_MODE_WEIGHTED = 1,
} TtdNormMode;

/**
 * Opaque configuration handle.
 */
typedef struct TtdConfiguration TtdConfiguration;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread; empty after success.
 * Valid until the next library call on this thread.
 */
const char *ttd_last_error_message(void);

/**
 * Copies `d * n` column-major entries into a new handle. Equal-norm input
 * is normalized column by column.
 *
 * # Safety
 * `entries` must point to `d * n` readable doubles; `out` must be writable.
 */
enum TtdStatus ttd_configuration_new(size_t d,
                                     size_t n,
                                     enum TtdNormMode mode,
                                     const double *entries,
                                     struct TtdConfiguration **out);

/**
 * # Safety
 * `handle` must come from this library and not be freed twice. Null is ignored.
 */
void ttd_configuration_free(struct TtdConfiguration *handle);

/**
 * Dimension d, or 0 for a null handle.
 *
 * # Safety
 * `handle` must be null or valid.
 */
size_t ttd_configuration_dim(const struct TtdConfiguration *handle);

/**
 * Number of vectors n, or 0 for a null handle.
 *
 * # Safety
 * `handle` must be null or valid.
 */
size_t ttd_configuration_len(const struct TtdConfiguration *handle);

/**
 * # Safety
 * `handle` must be valid; `out` must be writable.
 */
enum TtdStatus ttd_configuration_mode(const struct TtdConfiguration *handle, enum TtdNormMode *out);

/**
 * Copies the column-major entries into `out`, which holds `len` doubles.
 *
 * # Safety
 * `handle` must be valid; `out` must have room for `len` doubles.
 */
enum TtdStatus ttd_configuration_entries(const struct TtdConfiguration *handle,
                                         double *out,
                                         size_t len);

/**
 * Design potential at strength `t`.
 *
 * # Safety
 * `handle` must be valid; `out` must be writable.
 */
enum TtdStatus ttd_potential(const struct TtdConfiguration *handle, size_t t, double *out);

/**
 * Design verdict `f <= tolerance * n^2` after trace normalization.
 *
 * # Safety
 * `handle` must be valid; `is_design_out` and `f_out` must be writable.
 */
enum TtdStatus ttd_is_design(const struct TtdConfiguration *handle,
                             size_t t,
                             double tolerance,
                             int *is_design_out,
                             double *f_out);

/**
 * Largest monomial cubature error; unit-norm configurations only.
 *
 * # Safety
 * `handle` must be valid; `out` must be writable.
 */
enum TtdStatus ttd_cubature_residual(const struct TtdConfiguration *handle, size_t t, double *out);

/**
 * Relative Bessel-identity error over the default probe set drawn from `probe_seed`.
 *
 * # Safety
 * `handle` must be valid; `out` must be writable.
 */
enum TtdStatus ttd_bessel_residual(const struct TtdConfiguration *handle,
                                   size_t t,
                                   uint64_t probe_seed,
                                   double *out);

/**
 * Multi-start minimization; the best configuration is returned in `out`.
 *
 * # Safety
 * `out` and `f_out` must be writable.
 */
enum TtdStatus ttd_minimize(size_t t,
                            size_t d,
                            size_t n,
                            enum TtdNormMode mode,
                            size_t restarts,
                            uint64_t seed,
                            struct TtdConfiguration **out,
                            double *f_out);

/**
 * Closed-form constructions by name: `reznick_11pt`, `new_11pt_d5`,
 * `kempner_24pt`, `kempner_24pt_weighted`, `three_mubs`, `equally_spaced_lines`
 * (uses `param` as t), `stroud` (uses `param` as d and `sign` 0 plus / 1 minus),
 * `twelve_point` (reads four angles from `angles`, which may be null for zeros).
 *
 * # Safety
 * `name` must be a nul-terminated string; `angles` null or four doubles; `out` writable.
 */
enum TtdStatus ttd_construct(const char *name,
                             size_t param,
                             int sign,
                             const double *angles,
                             struct TtdConfiguration **out);

/**
 * Reads a design JSON file.
 *
 * # Safety
 * `path` must be a nul-terminated string; `out` writable.
 */
enum TtdStatus ttd_load_design(const char *path, struct TtdConfiguration **out);

/**
 * Writes a design JSON file; `t` of 0 omits the strength.
 *
 * # Safety
 * `handle` must be valid; `path` a nul-terminated string.
 */
enum TtdStatus ttd_save_design(const struct TtdConfiguration *handle, size_t t, const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TTDESIGN_H */
