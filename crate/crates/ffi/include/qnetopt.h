#ifndef QNETOPT_H
#define QNETOPT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Result codes.
 */
typedef enum QnStatus {
  QN_STATUS_OK = 0,
  QN_STATUS_NULL_POINTER = 1,
  QN_STATUS_INVALID_UTF8 = 2,
  QN_STATUS_INVALID_INPUT = 3,
  QN_STATUS_INVALID_NETWORK = 4,
  QN_STATUS_DOMAIN = 5,
  QN_STATUS_UNREACHABLE = 6,
  QN_STATUS_BUDGET_EXCEEDED = 7,
  QN_STATUS_OUT_OF_RANGE = 8,
  QN_STATUS_INTERNAL = 9,
  QN_STATUS_PANIC = 10,
} QnStatus;

/**
 * Opaque Pareto front handle.
 */
typedef struct QnFront QnFront;

/**
 * Opaque network handle.
 */
typedef struct QnNetwork QnNetwork;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *qn_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *qn_version(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void qn_string_free(char *s);

/**
 * Parses a network from JSON.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
enum QnStatus qn_network_from_json(const char *json, struct QnNetwork **out);

/**
 * Generates a seeded chain network with default link ranges.
 *
 * # Safety
 * `out` must be writable.
 */
enum QnStatus qn_network_generate(size_t nodes,
                                  size_t switchers,
                                  uint32_t levels,
                                  uint64_t seed,
                                  struct QnNetwork **out);

/**
 * # Safety
 * `net` must come from this library and not be freed twice.
 */
void qn_network_free(struct QnNetwork *net);

/**
 * # Safety
 * `net` must be a live handle; `out` must be writable.
 */
enum QnStatus qn_network_node_count(const struct QnNetwork *net, size_t *out);

/**
 * # Safety
 * `net` must be a live handle; `out` must be writable.
 */
enum QnStatus qn_network_link_count(const struct QnNetwork *net, size_t *out);

/**
 * Serializes a network; release the result with [`qn_string_free`].
 *
 * # Safety
 * `net` must be a live handle; `out` must be writable.
 */
enum QnStatus qn_network_to_json(const struct QnNetwork *net, char **out);

/**
 * Runs the quantum-layer search between two node ids with default
 * parameters.
 *
 * # Safety
 * `net` must be a live handle; `out` must be writable.
 */
enum QnStatus qn_quantum_optimize(const struct QnNetwork *net,
                                  uint32_t source,
                                  uint32_t destination,
                                  size_t iterations,
                                  uint64_t seed,
                                  struct QnFront **out);

/**
 * # Safety
 * `front` must come from this library and not be freed twice.
 */
void qn_front_free(struct QnFront *front);

/**
 * # Safety
 * `front` must be a live handle; `out` must be writable.
 */
enum QnStatus qn_front_len(const struct QnFront *front, size_t *out);

/**
 * Objectives of member `index`: storage time, throughput and path length.
 *
 * # Safety
 * `front` must be a live handle; output pointers must be writable.
 */
enum QnStatus qn_front_objectives(const struct QnFront *front,
                                  size_t index,
                                  double *storage_time,
                                  double *throughput,
                                  uint32_t *path_length);

/**
 * Serializes a front; release the result with [`qn_string_free`].
 *
 * # Safety
 * `front` must be a live handle; `out` must be writable.
 */
enum QnStatus qn_front_to_json(const struct QnFront *front, char **out);

/**
 * Chain hops spanned by a link of `level`.
 *
 * # Safety
 * `out` must be writable.
 */
enum QnStatus qn_hop_distance(uint32_t level, uint64_t *out);

/**
 * Time units a link of `fidelity` needs per cycle.
 *
 * # Safety
 * `out` must be writable.
 */
enum QnStatus qn_link_weight(double fidelity, double f_max, uint32_t *out);

/**
 * Step size at restriction value `f` and index `j`.
 *
 * # Safety
 * `out` must be writable.
 */
enum QnStatus qn_step_size(double f, uint64_t j, double phi_min, double phi_max, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QNETOPT_H */
