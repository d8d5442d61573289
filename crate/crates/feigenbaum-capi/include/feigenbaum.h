#ifndef FEIGENBAUM_H
#define FEIGENBAUM_H

/* Generated from the feigenbaum-capi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible call.
typedef enum FgStatus {
  // Success; out-parameters are valid.
  FG_OK = 0,
  // A required pointer argument was null.
  FG_NULL_ARGUMENT = 1,
  // An argument value is outside its documented domain.
  FG_INVALID_ARGUMENT = 2,
  // Arithmetic failure, such as a divisor enclosure containing zero.
  FG_ARITHMETIC = 3,
  // The state is too shallow for the requested digits or order;
  // advance the iteration further and retry.
  FG_INSUFFICIENT_PRECISION = 4,
  // Internal certification failure; the result could not be
  // guaranteed and nothing was returned.
  FG_CERTIFICATION = 5,
  // Malformed or corrupt checkpoint text.
  FG_CORRUPT_CHECKPOINT = 6,
  // File input/output failure.
  FG_IO = 7,
  // Text crossing the boundary was not valid UTF-8 or contained an
  // interior NUL byte.
  FG_TEXT = 8,
  // A panic was caught at the boundary; treat involved handles as
  // unusable.
  FG_PANIC = 9,
} FgStatus;

// Opaque handle to one iteration state (a certified approximant of the
// fixed point, together with its depth and error bound).
typedef struct FgState FgState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Create the seed state (depth 0, certified distance 0.01 to the fixed
// point). On success writes a new handle to `out`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one pointer.
enum FgStatus fg_state_new(struct FgState **out);

// Duplicate a handle. The copy is independent of the original.
//
// # Safety
// `state` must be a live handle from this library; `out` must be
// writable.
enum FgStatus fg_state_clone(const struct FgState *state, struct FgState **out);

// Release a handle. Passing null is a no-op; passing the same handle
// twice is undefined behavior.
//
// # Safety
// `state` must be null or a live handle from this library.
void fg_state_free(struct FgState *state);

// Read the iteration depth `m` of a state.
//
// # Safety
// `state` must be a live handle; `out` must be writable.
enum FgStatus fg_state_depth(const struct FgState *state, uint32_t *out);

// Advance a state by `steps` certified iteration steps. On failure the
// state is left unchanged.
//
// # Safety
// `state` must be a live handle not aliased by concurrent calls.
enum FgStatus fg_state_advance(struct FgState *state, uint32_t steps);

// The certified coordinate-norm distance from the state to the fixed
// point (`0.01 * 0.93^m` rounded up), as a decimal string with `scale`
// fractional digits.
//
// # Safety
// `state` must be a live handle; `out` must be writable. Release the
// string with `fg_string_free`.
enum FgStatus fg_state_error_bound(const struct FgState *state, uint32_t scale, char **out);

// The iteration depth required before `alpha` can be certified to
// `digits` fractional digits.
//
// # Safety
// `out` must be writable.
enum FgStatus fg_depth_for_digits(uint32_t digits, uint32_t *out);

// Extract `alpha = 1/g(1)` from a state: a decimal value with exactly
// `digits` fractional digits and a certified bound on its distance to
// the true constant (at most `10^-digits`). Fails with
// `FG_INSUFFICIENT_PRECISION` if the state is too shallow; see
// `fg_depth_for_digits`.
//
// # Safety
// `state` must be a live handle; `value_out` and `bound_out` must be
// writable. Release both strings with `fg_string_free`.
enum FgStatus fg_alpha(const struct FgState *state,
                       uint32_t digits,
                       char **value_out,
                       char **bound_out);

// One-shot convenience: run the iteration from the seed to the depth
// required for `digits` fractional digits and extract `alpha` as with
// `fg_alpha`. Runtime grows quickly with `digits` (about ten seconds
// for 8 digits on commodity hardware, much more beyond).
//
// # Safety
// `value_out` and `bound_out` must be writable. Release both strings
// with `fg_string_free`.
enum FgStatus fg_alpha_digits(uint32_t digits, char **value_out, char **bound_out);

// Certified enclosures of the Taylor coefficients `a_1 ..= a_order` of
// the fixed point (`g(z) = 1 + a_1 z^2 + a_2 z^4 + ...`), each of
// width at most `10^-digits`. The output is one line per coefficient,
// `"<index> <lower> <upper>"`, joined by newlines.
//
// # Safety
// `state` must be a live handle; `out` must be writable. Release the
// string with `fg_string_free`.
enum FgStatus fg_taylor_enclosures(const struct FgState *state,
                                   uint32_t order,
                                   uint32_t digits,
                                   char **out);

// Serialize a state to checkpoint text (self-describing, integrity
// checked, bit-exact across save/load).
//
// # Safety
// `state` must be a live handle; `out` must be writable. Release the
// string with `fg_string_free`.
enum FgStatus fg_checkpoint_save(const struct FgState *state, char **out);

// Restore a state from checkpoint text produced by
// `fg_checkpoint_save`. Tampered or truncated text is rejected with
// `FG_CORRUPT_CHECKPOINT`.
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be writable.
enum FgStatus fg_checkpoint_load(const char *text, struct FgState **out);

// Release a string returned by this library. Passing null is a no-op.
//
// # Safety
// `s` must be null or a string returned by this library, released at
// most once.
void fg_string_free(char *s);

// Static description of a status code. The returned pointer is valid
// for the program lifetime; do not free it.
const char *fg_status_message(enum FgStatus status);

// Detail message for the most recent failure on the calling thread, or
// null if none. The pointer is valid until the next failing call on
// the same thread; do not free it.
const char *fg_last_error_message(void);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* FEIGENBAUM_H */
