#ifndef BOHR_H
#define BOHR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BohrStatus {
  BOHR_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  BOHR_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not UTF-8.
   */
  BOHR_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed JSON, unknown names, inconsistent dimensions.
   */
  BOHR_STATUS_INVALID_INPUT = 3,
  /**
   * The input is well formed but violates a mathematical precondition.
   */
  BOHR_STATUS_DOMAIN = 4,
  /**
   * A size cap or retry budget was exhausted.
   */
  BOHR_STATUS_LIMIT_EXCEEDED = 5,
  /**
   * An internal error; the library state is unaffected.
   */
  BOHR_STATUS_PANIC = 6,
} BohrStatus;

/**
 * A validated system with its context poset.
 */
typedef struct BohrSystem BohrSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds a system from its JSON description. On success `*out` owns a new
 * handle; release it with [`bohr_system_free`].
 *
 * # Safety
 * `json` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum BohrStatus bohr_system_from_json(const char *json, struct BohrSystem **out);

/**
 * # Safety
 * `system` must come from [`bohr_system_from_json`] and not be used again.
 */
void bohr_system_free(struct BohrSystem *system);

/**
 * Number of contexts in the system's poset, or 0 for a null handle.
 *
 * # Safety
 * `system` must be null or a live handle.
 */
size_t bohr_system_num_contexts(const struct BohrSystem *system);

/**
 * Poset report as JSON; `dot`, if not null, receives the Hasse diagram.
 *
 * # Safety
 * `system` must be a live handle; `out` a valid pointer; `dot` null or valid.
 */
enum BohrStatus bohr_poset(const struct BohrSystem *system, char **out, char **dot);

/**
 * Daseinisation of a named observable at `interval` (`"r,s"`, with `-inf`
 * and `inf` allowed). `*warnings` receives the number of boundary ties.
 *
 * # Safety
 * Pointer arguments must be valid; `warnings` may be null.
 */
enum BohrStatus bohr_daseinise(const struct BohrSystem *system,
                               const char *observable,
                               const char *interval_str,
                               char **out,
                               size_t *warnings);

/**
 * Truth value of "observable in interval" in a named state at stage `base`
 * (a context label, or null for the trivial context).
 *
 * # Safety
 * Pointer arguments must be valid; `base` and `warnings` may be null.
 */
enum BohrStatus bohr_pair(const struct BohrSystem *system,
                          const char *observable,
                          const char *interval_str,
                          const char *state,
                          const char *base,
                          char **out,
                          size_t *warnings);

/**
 * Searches the system's poset for a point. `*has_point` is 1 or 0.
 *
 * # Safety
 * Pointer arguments must be valid.
 */
enum BohrStatus bohr_ks(const struct BohrSystem *system, char **out, int32_t *has_point);

/**
 * As [`bohr_ks`] for a configuration `{"dim": n, "bases": [...]}`.
 *
 * # Safety
 * Pointer arguments must be valid.
 */
enum BohrStatus bohr_ks_config(const char *config, char **out, int32_t *has_point);

/**
 * Frame of a site given as JSON.
 *
 * # Safety
 * Pointer arguments must be valid.
 */
enum BohrStatus bohr_site_frame(const char *site, char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used again.
 */
void bohr_string_free(char *s);

/**
 * Message for the last failed call on this thread, or null after a
 * success. Valid until the next call on the same thread.
 */
const char *bohr_last_error(void);

/**
 * Library version, statically allocated.
 */
const char *bohr_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BOHR_H */
