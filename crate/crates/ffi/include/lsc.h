#ifndef LSC_H
#define LSC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LscStatus {
  LSC_STATUS_OK = 0,
  LSC_STATUS_NULL_POINTER = 1,
  LSC_STATUS_INVALID_ARGUMENT = 2,
  LSC_STATUS_UNKNOWN_SYSTEM = 3,
  LSC_STATUS_PARSE = 4,
  LSC_STATUS_BUDGET_EXCEEDED = 5,
  LSC_STATUS_UNVALIDATED = 6,
  LSC_STATUS_DISCONNECTED = 7,
  LSC_STATUS_NON_CONVERGENCE = 8,
  LSC_STATUS_BUFFER_TOO_SMALL = 9,
  LSC_STATUS_COMPUTATION = 10,
  LSC_STATUS_PANIC = 11,
} LscStatus;

/**
 * Opaque cell graph handle with its energy form.
 */
typedef struct LscGraph LscGraph;

/**
 * Opaque system handle.
 */
typedef struct LscSystem LscSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into this library from the same thread.
 */
const char *lsc_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *lsc_version(void);

/**
 * Builds a catalog system (`sc8`, `carpet104`).
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LscStatus lsc_system_from_catalog(const char *name, struct LscSystem **out);

/**
 * Parses a system from IFS file text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LscStatus lsc_system_from_ifs_text(const char *text, struct LscSystem **out);

/**
 * # Safety
 * `sys` must be null or a handle from this library not yet freed.
 */
void lsc_system_free(struct LscSystem *sys);

/**
 * # Safety
 * `sys` must be a live handle and `out` a valid pointer.
 */
enum LscStatus lsc_system_map_count(const struct LscSystem *sys, size_t *out);

/**
 * Sets `*passed` to 1 if every axiom holds exactly, else 0.
 *
 * # Safety
 * `sys` must be a live handle and `passed` a valid pointer.
 */
enum LscStatus lsc_system_validate(const struct LscSystem *sys, int *passed);

/**
 * # Safety
 * `sys` must be a live handle and `out` a valid pointer.
 */
enum LscStatus lsc_system_dimension(const struct LscSystem *sys, double tol, double *out);

/**
 * Builds the level-`level` cell graph. `rule` is `unit`, `theta:<x>` or
 * null for unit conductances; `corner_edges` nonzero adds point contacts.
 *
 * # Safety
 * `sys` must be a live handle, `rule` null or NUL-terminated, `out` valid.
 */
enum LscStatus lsc_graph_build(const struct LscSystem *sys,
                               size_t level,
                               const char *rule,
                               int corner_edges,
                               struct LscGraph **out);

/**
 * # Safety
 * `g` must be null or a handle from this library not yet freed.
 */
void lsc_graph_free(struct LscGraph *g);

/**
 * # Safety
 * `g` must be a live handle; the out pointers must be valid.
 */
enum LscStatus lsc_graph_size(const struct LscGraph *g, size_t *vertices, size_t *edges);

/**
 * Effective resistance between two selectors (`edge:left`, `prefix:1`,
 * ...). Disconnected sets give `*infinite = 1` and `*out = 0`.
 *
 * # Safety
 * `g` must be a live handle, selectors NUL-terminated, out pointers valid.
 */
enum LscStatus lsc_graph_resistance(const struct LscGraph *g,
                                    const char *from,
                                    const char *to,
                                    double tol,
                                    double *out,
                                    int *infinite);

/**
 * Poincare constant with uniform cell weights.
 *
 * # Safety
 * `g` must be a live handle and `out` a valid pointer.
 */
enum LscStatus lsc_graph_poincare(const struct LscGraph *g, double *out);

/**
 * Writes the contradiction certificate as NUL-terminated text. `*needed`
 * receives the required size including the terminator; if `capacity` is
 * smaller, nothing is written and `BufferTooSmall` is returned.
 *
 * # Safety
 * `sys` must be a live handle, `buf` valid for `capacity` bytes (or null
 * with `capacity` 0), `needed` a valid pointer.
 */
enum LscStatus lsc_claims_certificate(const struct LscSystem *sys,
                                      char *buf,
                                      size_t capacity,
                                      size_t *needed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LSC_H */
