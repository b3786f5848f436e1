#ifndef UDP6_H
#define UDP6_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum Udp6Status {
  UDP6_STATUS_OK = 0,
  UDP6_STATUS_NULL_POINTER = 1,
  UDP6_STATUS_INVALID_UTF8 = 2,
  UDP6_STATUS_PARSE = 3,
  UDP6_STATUS_CONSTRAINT = 4,
  UDP6_STATUS_INVALID_ARGUMENT = 5,
  UDP6_STATUS_OUT_OF_RANGE = 6,
  UDP6_STATUS_NO_CONTINUATION = 7,
  UDP6_STATUS_PANIC = 8,
} Udp6Status;

/**
 * Result of an evolution: one or more solution tables.
 */
typedef struct Udp6BranchSet Udp6BranchSet;

/**
 * Parameters of the system.
 */
typedef struct Udp6Params Udp6Params;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a params JSON object (`q`, `a1`..`a4`, `b1`..`b4`).
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum Udp6Status udp6_params_from_json(const char *json, struct Udp6Params **out);

/**
 * # Safety
 * `p` must come from [`udp6_params_from_json`] or be null.
 */
void udp6_params_free(struct Udp6Params *p);

/**
 * Writes whether `B1+B2+A3+A4 = Q+A1+A2+B3+B4` holds.
 *
 * # Safety
 * Pointers must be valid.
 */
enum Udp6Status udp6_check_constraint(const struct Udp6Params *p, bool *holds);

/**
 * Enumerates every branch from `(y, z)` at index `m0` over `[m_min, m_max]`.
 * Signs are `+1` or `-1`; amplitudes are rational strings such as `"43"`
 * or `"7/2"`. `max_branches` of 0 selects the default cap.
 *
 * # Safety
 * String arguments must be NUL-terminated; `out` must be valid.
 */
enum Udp6Status udp6_evolve(const struct Udp6Params *p,
                            int64_t m0,
                            int8_t y_sign,
                            const char *y_amp,
                            int8_t z_sign,
                            const char *z_amp,
                            int64_t m_min,
                            int64_t m_max,
                            size_t max_branches,
                            struct Udp6BranchSet **out);

/**
 * Number of branches, or 0 for null.
 *
 * # Safety
 * `b` must come from [`udp6_evolve`] or be null.
 */
size_t udp6_branches_count(const struct Udp6BranchSet *b);

/**
 * Whether the branch cap cut the enumeration short.
 *
 * # Safety
 * `b` must come from [`udp6_evolve`] or be null.
 */
bool udp6_branches_truncated(const struct Udp6BranchSet *b);

/**
 * Branch `k` as CSV with header `m,sy,Y,sz,Z`.
 *
 * # Safety
 * `b` must come from [`udp6_evolve`]; `out` must be valid.
 */
enum Udp6Status udp6_branches_to_csv(const struct Udp6BranchSet *b, size_t k, char **out);

/**
 * # Safety
 * `b` must come from [`udp6_evolve`] or be null.
 */
void udp6_branches_free(struct Udp6BranchSet *b);

/**
 * Checks a CSV table against both equations and writes the number of
 * failing `(m, equation)` pairs.
 *
 * # Safety
 * Pointers must be valid; `csv` NUL-terminated.
 */
enum Udp6Status udp6_verify_csv(const struct Udp6Params *p, const char *csv, size_t *failures);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void udp6_string_free(char *s);

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next call into this library on the same thread.
 */
const char *udp6_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UDP6_H */
