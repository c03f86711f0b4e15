#ifndef VOTEBALANCE_H
#define VOTEBALANCE_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum VbProblem {
  VB_PROBLEM_CC = 0,
  VB_PROBLEM_SRCC = 1,
} VbProblem;

typedef enum VbScheme {
  VB_SCHEME_V1 = 0,
  VB_SCHEME_V2 = 1,
} VbScheme;

/**
 * Result of every fallible call.
 */
typedef enum VbStatus {
  VB_STATUS_OK = 0,
  VB_STATUS_NULL_POINTER = 1,
  VB_STATUS_INVALID_ARGUMENT = 2,
  VB_STATUS_PARSE_ERROR = 3,
  VB_STATUS_INVALID_DATA = 4,
  VB_STATUS_IO = 5,
  VB_STATUS_PANIC = 6,
} VbStatus;

/**
 * Opaque signed graph.
 */
typedef struct VbGraph VbGraph;

/**
 * Opaque partition.
 */
typedef struct VbPartition VbPartition;

/**
 * Opaque solver result.
 */
typedef struct VbSolveResult VbSolveResult;

/**
 * Solver settings; start from `vb_solver_params_default`.
 */
typedef struct VbSolverParams {
  enum VbProblem problem;
  /**
   * Cluster count for `Srcc`, ignored for `Cc`.
   */
  size_t k;
  uint64_t seed;
  size_t max_iterations;
  size_t max_no_improve;
  /**
   * Seconds; zero or negative means no limit.
   */
  double time_limit_seconds;
  double perturbation_strength;
  double construction_alpha;
  size_t restarts;
  size_t threads;
} VbSolverParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a
 * success. The pointer stays valid until the next call on this thread.
 */
const char *vb_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *vb_version(void);

/**
 * Frees a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void vb_string_free(char *s);

/**
 * Parses the plain-text graph format.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum VbStatus vb_graph_from_text(const char *text, struct VbGraph **out);

/**
 * Builds a graph on `n` anonymous vertices from `m` edges given as
 * parallel arrays.
 *
 * # Safety
 * `us`, `vs` and `weights` must each point to `m` readable elements.
 */
enum VbStatus vb_graph_from_edges(size_t n,
                                  const size_t *us,
                                  const size_t *vs,
                                  const double *weights,
                                  size_t m,
                                  struct VbGraph **out);

/**
 * Extracts the agreement graph from roll-call CSV text.
 *
 * # Safety
 * `csv` must be a NUL-terminated string; `out` must be writable.
 */
enum VbStatus vb_graph_from_votes_csv(const char *csv,
                                      enum VbScheme scheme,
                                      double threshold,
                                      struct VbGraph **out);

/**
 * Writes the graph in the plain-text format; free with `vb_string_free`.
 *
 * # Safety
 * `graph` must be a live handle; `out` must be writable.
 */
enum VbStatus vb_graph_to_text(const struct VbGraph *graph, char **out);

/**
 * Vertex count, or 0 for a null handle.
 *
 * # Safety
 * `graph` must be null or a live handle.
 */
size_t vb_graph_vertex_count(const struct VbGraph *graph);

/**
 * Edge count, or 0 for a null handle.
 *
 * # Safety
 * `graph` must be null or a live handle.
 */
size_t vb_graph_edge_count(const struct VbGraph *graph);

/**
 * # Safety
 * `graph` must be null or a handle from this library, freed once.
 */
void vb_graph_free(struct VbGraph *graph);

/**
 * Partition from arbitrary labels, relabeled densely by first appearance.
 *
 * # Safety
 * `labels` must point to `n` readable elements; `out` must be writable.
 */
enum VbStatus vb_partition_from_labels(const size_t *labels, size_t n, struct VbPartition **out);

/**
 * Number of labelled vertices, or 0 for a null handle.
 *
 * # Safety
 * `partition` must be null or a live handle.
 */
size_t vb_partition_len(const struct VbPartition *partition);

/**
 * Number of clusters, or 0 for a null handle.
 *
 * # Safety
 * `partition` must be null or a live handle.
 */
size_t vb_partition_cluster_count(const struct VbPartition *partition);

/**
 * Copies the labels into `buffer`, which must hold `vb_partition_len`
 * elements.
 *
 * # Safety
 * `buffer` must point to `len` writable elements.
 */
enum VbStatus vb_partition_labels(const struct VbPartition *partition, size_t *buffer, size_t len);

/**
 * # Safety
 * `partition` must be null or a handle from this library, freed once.
 */
void vb_partition_free(struct VbPartition *partition);

/**
 * CC imbalance: negative weight inside clusters plus positive weight
 * between them.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum VbStatus vb_cc_imbalance(const struct VbGraph *graph,
                              const struct VbPartition *partition,
                              double *out);

/**
 * Symmetric relaxed imbalance.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum VbStatus vb_srcc_imbalance(const struct VbGraph *graph,
                                const struct VbPartition *partition,
                                double *out);

/**
 * Writes one flag per cluster (1 = mediator) into `flags`, which must
 * hold `vb_partition_cluster_count` bytes.
 *
 * # Safety
 * Handles must be live; `flags` must point to `len` writable bytes.
 */
enum VbStatus vb_detect_mediation(const struct VbGraph *graph,
                                  const struct VbPartition *partition,
                                  double threshold,
                                  uint8_t *flags,
                                  size_t len);

/**
 * Library defaults for `problem` (and `k` for the relaxed problem).
 */
struct VbSolverParams vb_solver_params_default(enum VbProblem problem, size_t k);

/**
 * Runs iterated local search.
 *
 * # Safety
 * `graph` and `params` must be valid; `out` must be writable.
 */
enum VbStatus vb_solve(const struct VbGraph *graph,
                       const struct VbSolverParams *params,
                       struct VbSolveResult **out);

/**
 * Best objective value, or NaN for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
double vb_solve_result_value(const struct VbSolveResult *result);

/**
 * Imbalance as a percentage of total absolute weight.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum VbStatus vb_solve_result_relative_imbalance(const struct VbGraph *graph,
                                                 const struct VbSolveResult *result,
                                                 double *out);

/**
 * Copies the best partition into a new handle.
 *
 * # Safety
 * `result` must be live; `out` must be writable.
 */
enum VbStatus vb_solve_result_partition(const struct VbSolveResult *result,
                                        struct VbPartition **out);

/**
 * # Safety
 * `result` must be null or a handle from this library, freed once.
 */
void vb_solve_result_free(struct VbSolveResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VOTEBALANCE_H */
