#ifndef COMMWHEEL_H
#define COMMWHEEL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CwStatus {
  CW_STATUS_OK = 0,
  CW_STATUS_NULL_ARGUMENT = 1,
  CW_STATUS_INVALID_INPUT = 2,
  CW_STATUS_NO_LEADER = 3,
  CW_STATUS_INTERNAL = 4,
  CW_STATUS_OUT_OF_RANGE = 5,
} CwStatus;

typedef enum CwClass {
  CW_CLASS_BOUNDARY = 0,
  CW_CLASS_ISOLATED_WEAK = 1,
  CW_CLASS_WEAK = 2,
  CW_CLASS_STRONG = 3,
} CwClass;

/**
 * A unit disk graph with ground-truth positions.
 */
typedef struct CwNetwork CwNetwork;

/**
 * Outcome of one protocol run.
 */
typedef struct CwResult CwResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on this thread.
 */
const char *cw_last_error(void);

/**
 * Parse a network file.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CwStatus cw_network_from_json(const char *json, struct CwNetwork **out);

/**
 * Uniform random deployment in a `width × height` region.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum CwStatus cw_network_generate_random(size_t n,
                                         double width,
                                         double height,
                                         double r,
                                         uint64_t seed,
                                         struct CwNetwork **out);

/**
 * Member `k` of the honeycomb family.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum CwStatus cw_network_generate_honeycomb(size_t k, struct CwNetwork **out);

/**
 * Node count, or 0 for a null handle.
 *
 * # Safety
 * `net` must be null or a live handle.
 */
size_t cw_network_len(const struct CwNetwork *net);

/**
 * Serialize to a network file. Free the string with [`cw_string_free`].
 *
 * # Safety
 * `net` must be a live handle and `out` a valid pointer.
 */
enum CwStatus cw_network_to_json(const struct CwNetwork *net, char **out);

/**
 * Write each node's wheel-based class into `classes`, which must hold
 * `len == cw_network_len(net)` entries, in ascending id order.
 *
 * # Safety
 * `net` must be a live handle and `classes` point to `len` writable slots.
 */
enum CwStatus cw_network_classify(const struct CwNetwork *net, enum CwClass *classes, size_t len);

/**
 * Run the protocol. On `CW_STATUS_NO_LEADER` the result handle is still
 * written (with nothing localized) so its statistics can be inspected.
 *
 * # Safety
 * `net` must be a live handle and `out` a valid pointer.
 */
enum CwStatus cw_localize(const struct CwNetwork *net,
                          uint64_t seed,
                          bool random_interleaving,
                          struct CwResult **out);

/**
 * Number of localized nodes, or 0 for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
size_t cw_result_localized_count(const struct CwResult *result);

/**
 * Position of the node at `index` (ascending id order) in the run's
 * global frame. `localized` is set to false and the coordinates left
 * untouched for unlocalized nodes.
 *
 * # Safety
 * `result` must be a live handle; the out pointers must be valid.
 */
enum CwStatus cw_result_position(const struct CwResult *result,
                                 size_t index,
                                 double *x,
                                 double *y,
                                 bool *localized);

/**
 * The result file as JSON. Free the string with [`cw_string_free`].
 *
 * # Safety
 * `result` must be a live handle and `out` a valid pointer.
 */
enum CwStatus cw_result_to_json(const struct CwResult *result, char **out);

/**
 * Hex SHA-256 of the message trace. Free the string with [`cw_string_free`].
 *
 * # Safety
 * `result` must be a live handle and `out` a valid pointer.
 */
enum CwStatus cw_result_trace_hash(const struct CwResult *result, char **out);

/**
 * Best and worst trilateration counts over every seed triangle.
 *
 * # Safety
 * `net` must be a live handle; `best` and `worst` valid pointers.
 */
enum CwStatus cw_trilateration_sweep(const struct CwNetwork *net, size_t *best, size_t *worst);

/**
 * # Safety
 * `net` must be null or a handle not yet freed.
 */
void cw_network_free(struct CwNetwork *net);

/**
 * # Safety
 * `result` must be null or a handle not yet freed.
 */
void cw_result_free(struct CwResult *result);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void cw_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COMMWHEEL_H */
