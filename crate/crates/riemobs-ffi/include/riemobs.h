#ifndef RIEMOBS_H
#define RIEMOBS_H

/* Generated by cbindgen from the riemobs-ffi crate; regenerate with cargo build. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible call.
typedef enum RoStatus {
  // Success.
  RoStatusOk = 0,
  // A required pointer argument was null.
  RoStatusNullPointer = 1,
  // A string argument was not valid UTF-8.
  RoStatusInvalidUtf8 = 2,
  // No benchmark, metric or condition with the given name.
  RoStatusUnknownName = 3,
  // An argument was out of range (dimension, index, non-finite value).
  RoStatusInvalidArgument = 4,
  // The computation itself failed; see the last error message.
  RoStatusComputeFailed = 5,
  // An internal panic was caught at the boundary.
  RoStatusPanicked = 6,
} RoStatus;

// Verdict of a condition check.
typedef enum RoVerdict {
  RoVerdictPass = 0,
  RoVerdictFail = 1,
  RoVerdictInconclusive = 2,
} RoVerdict;

// Opaque benchmark handle.
typedef struct RoBenchmark RoBenchmark;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copy the most recent error message of this thread into `buf`
// (NUL-terminated, truncated to `cap` bytes). Returns the full message
// length in bytes excluding the NUL; call with a null `buf` or zero
// `cap` to query the length.
//
// # Safety
// `buf` must either be null or point to at least `cap` writable bytes.
uintptr_t riemobs_last_error_message(char *buf, uintptr_t cap);

// Library version as a static NUL-terminated string; never null, do not
// free.
const char *riemobs_version(void);

// Build a catalog benchmark by name ("linear", "oscillator", "planar",
// "circle") and store the handle in `*out`. The handle must be released
// with `riemobs_benchmark_free`.
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be a valid pointer.
enum RoStatus riemobs_benchmark_new(const char *name, struct RoBenchmark **out);

// Release a benchmark handle. Null is accepted and ignored.
//
// # Safety
// `b` must be null or a handle obtained from `riemobs_benchmark_new`
// that has not been freed already.
void riemobs_benchmark_free(struct RoBenchmark *b);

// State dimension of the benchmark model.
//
// # Safety
// `b` must be a live handle; `out` must be a valid pointer.
enum RoStatus riemobs_benchmark_state_dim(const struct RoBenchmark *b, uintptr_t *out);

// Number of candidate metrics the benchmark carries.
//
// # Safety
// `b` must be a live handle; `out` must be a valid pointer.
enum RoStatus riemobs_benchmark_metric_count(const struct RoBenchmark *b, uintptr_t *out);

// Copy the name of metric `index` into `buf` (NUL-terminated, truncated
// to `cap`). Returns the status; the full length is reported through the
// return value of `riemobs_last_error_message` conventions not needed
// here because names are short; a 64-byte buffer always suffices for the
// catalog.
//
// # Safety
// `b` must be a live handle; `buf` must point to `cap` writable bytes.
enum RoStatus riemobs_benchmark_metric_name(const struct RoBenchmark *b,
                                            uintptr_t index,
                                            char *buf,
                                            uintptr_t cap);

// Run one condition check ("a2", "a3-nullity", "a3-direct",
// "submersion") on the named metric. `samples` counts region samples
// (geodesic trials for the direct check); `tol` is the residual
// tolerance, or `<= 0` for the default; the decay check uses the
// benchmark's rate floor. Writes the verdict and the margin (NaN when
// the check reports none).
//
// # Safety
// `b` must be a live handle; `metric` and `condition` must be
// NUL-terminated strings; `verdict_out` and `margin_out` must be valid
// pointers.
enum RoStatus riemobs_check(const struct RoBenchmark *b,
                            const char *metric,
                            const char *condition,
                            uintptr_t samples,
                            uint64_t seed,
                            double tol,
                            enum RoVerdict *verdict_out,
                            double *margin_out);

// Riemannian distance between two states in the named metric (two-point
// geodesic solve, unconstrained by the region).
//
// # Safety
// `b` must be a live handle; `metric` must be a NUL-terminated string;
// `x` and `y` must point to `dim` doubles; `out` must be valid.
enum RoStatus riemobs_distance(const struct RoBenchmark *b,
                               const char *metric,
                               const double *x,
                               const double *y,
                               uintptr_t dim,
                               double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RIEMOBS_H */
