/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef GRAPHSTEER_H
#define GRAPHSTEER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define GS_FAMILY_TRIPARTITE 0

#define GS_FAMILY_FOURMODE 1

typedef enum GsStatus {
  GS_STATUS_OK = 0,
  GS_STATUS_NULL_POINTER = 1,
  // Parameter outside its domain, e.g. T2 not in (0, 1).
  GS_STATUS_DOMAIN = 2,
  // Malformed input such as overlapping or out-of-range mode indices.
  GS_STATUS_VALIDATION = 3,
  GS_STATUS_NUMERICAL = 4,
  // The output buffer is too short; the required length is still written.
  GS_STATUS_BUFFER_TOO_SMALL = 5,
  // A Rust panic was caught at the boundary.
  GS_STATUS_INTERNAL = 6,
} GsStatus;

// A pure Gaussian state of one of the two graph-state families.
typedef struct GsState GsState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Builds the network output state of family `family_code` (a `GS_FAMILY_*`
// constant) at transmittance `t2` and squeezing `r`. On success `*out`
// owns a new handle.
//
// # Safety
// `out` must be null or valid for writing one pointer.
enum GsStatus gs_state_build(uint32_t family_code, double t2, double r, struct GsState **out);

// Releases a handle from `gs_state_build`. Null is ignored.
//
// # Safety
// `state` must be null or a live handle that is not used afterwards.
void gs_state_free(struct GsState *state);

// Stores the number of modes, the transmittance and the squeezing of a
// state. Any output pointer may be null.
//
// # Safety
// `state` must be a live handle; non-null outputs must be writable.
enum GsStatus gs_state_info(const struct GsState *state, size_t *n_modes, double *t2, double *r);

// Writes the 2n×2n covariance matrix in row-major order, quadratures
// ordered (x_A, p_A, x_B, p_B, ...).
//
// # Safety
// `state` must be a live handle and `buf` valid for `len` doubles;
// `written` may be null.
enum GsStatus gs_state_covariance(const struct GsState *state,
                                  double *buf,
                                  size_t len,
                                  size_t *written);

// Symplectic eigenvalues, descending.
//
// # Safety
// As for `gs_state_covariance`.
enum GsStatus gs_state_symplectic_eigenvalues(const struct GsState *state,
                                              double *buf,
                                              size_t len,
                                              size_t *written);

// Gaussian steering G from the `steering` modes to the `steered` modes.
// `regularized` (may be null) reports whether a pseudo-inverse was used.
//
// # Safety
// `state` must be a live handle, the mode arrays valid for their lengths
// and `value` writable.
enum GsStatus gs_steering(const struct GsState *state,
                          const size_t *steering,
                          size_t n_steering,
                          const size_t *steered,
                          size_t n_steered,
                          double *value,
                          bool *regularized);

// Logarithmic negativity between mode sets `a` and `b`.
//
// # Safety
// As for `gs_steering`.
enum GsStatus gs_log_negativity(const struct GsState *state,
                                const size_t *a,
                                size_t n_a,
                                const size_t *b,
                                size_t n_b,
                                double *value);

// Weight factor of a family member (C_BC for tripartite, C_A for fourmode).
//
// # Safety
// `weight` must be writable.
enum GsStatus gs_t2_to_weight(uint32_t family_code, double t2, double *weight);

// Inverse of `gs_t2_to_weight`.
//
// # Safety
// `t2` must be writable.
enum GsStatus gs_weight_to_t2(uint32_t family_code, double weight, double *t2);

// Message for the most recent failed call on this thread, or "" after a
// success. Valid until the next call into this library on the same thread.
const char *gs_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *gs_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRAPHSTEER_H */
