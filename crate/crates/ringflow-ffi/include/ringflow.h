#ifndef RINGFLOW_H
#define RINGFLOW_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Outcome of an interface call.
typedef enum RfStatus {
  // Call succeeded.
  RF_STATUS_OK = 0,
  // A required pointer argument was null.
  RF_STATUS_NULL_ARGUMENT = 1,
  // An input string was not valid UTF-8.
  RF_STATUS_INVALID_UTF8 = 2,
  // The configuration failed to parse or validate.
  RF_STATUS_BAD_CONFIG = 3,
  // The run itself failed (integration, normalisation, eigensolve).
  RF_STATUS_NUMERIC_FAILURE = 4,
  // A buffer was too small or an index out of range.
  RF_STATUS_OUT_OF_RANGE = 5,
  // Unexpected internal failure, including caught panics.
  RF_STATUS_INTERNAL = 6,
} RfStatus;

// Opaque result of one completed flow run.  Owned by the caller once
// returned; release with [`rf_flow_free`].
typedef struct RfFlow RfFlow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Version of the underlying simulator crate as a static NUL-terminated
// string.  Never null; do not free.
const char *rf_version(void);

// Copies the message from the most recent failure on this thread into
// `buf` (NUL-terminated, truncated to `cap` bytes) and returns the full
// message length in bytes, excluding the NUL.  Call with a null `buf` or
// zero `cap` to query the length first.
//
// # Safety
// `buf` must be null or valid for `cap` writes.
size_t rf_last_error_message(char *buf, size_t cap);

// Parses `config_json`, runs the dissipative dynamics and the sign
// segmentation, and stores an owned handle in `*out`.  On failure `*out`
// is left untouched.
//
// # Safety
// `config_json` must be NUL-terminated; `out` must be a valid pointer.
enum RfStatus rf_flow_run_json(const char *config_json, struct RfFlow **out);

// Releases a handle returned by [`rf_flow_run_json`].  Null is a no-op.
//
// # Safety
// `flow` must be a pointer previously returned by this library and not
// already freed.
void rf_flow_free(struct RfFlow *flow);

// Number of time samples held by the handle, 0 if `flow` is null.
//
// # Safety
// `flow` must be null or a live handle.
size_t rf_flow_sample_count(const struct RfFlow *flow);

// Copies the sampled series into caller-provided buffers.  Each of
// `times`, `distance` and `rate` may be null to skip that column; non-null
// buffers must hold at least [`rf_flow_sample_count`] doubles (`cap` says
// how many they hold).
//
// # Safety
// Non-null buffers must be valid for `cap` writes.
enum RfStatus rf_flow_series(const struct RfFlow *flow,
                             double *times,
                             double *distance,
                             double *rate,
                             size_t cap);

// Headline numbers of the sign segmentation.  Any output pointer may be
// null to skip that value.  `degenerate` is written as 0 or 1.
//
// # Safety
// Non-null pointers must be valid for one write each.
enum RfStatus rf_flow_metrics(const struct RfFlow *flow,
                              size_t *n_switch,
                              double *a_mod,
                              double *positive_fraction,
                              uint8_t *degenerate);

// Serialises the segmentation (with full run provenance) to JSON, the same
// document the CLI writes next to its CSV.  Free the string with
// [`rf_string_free`].
//
// # Safety
// `flow` must be a live handle; `out` must be a valid pointer.
enum RfStatus rf_flow_segments_json(const struct RfFlow *flow, char **out);

// Serialises the sampled series as CSV (`t,D,R,sign` rows, CRLF line ends,
// identical to the CLI artifact).  Free the string with [`rf_string_free`].
//
// # Safety
// `flow` must be a live handle; `out` must be a valid pointer.
enum RfStatus rf_flow_csv(const struct RfFlow *flow, char **out);

// Computes the closed ring's one-excitation spectrum for `config_json`
// (dynamics settings are ignored) and returns the CLI's spectrum document.
// Free the string with [`rf_string_free`].
//
// # Safety
// `config_json` must be NUL-terminated; `out` must be a valid pointer.
enum RfStatus rf_spectrum_json(const char *config_json, char **out);

// Releases a string returned by any `*_json` or `*_csv` function.  Null is
// a no-op.
//
// # Safety
// `s` must be a pointer previously returned by this library and not
// already freed.
void rf_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RINGFLOW_H */
