#ifndef BDSCORE_H
#define BDSCORE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum BdsStatus {
  BDS_STATUS_OK = 0,
  BDS_STATUS_NULL_POINTER = 1,
  BDS_STATUS_INVALID_ARGUMENT = 2,
  BDS_STATUS_IO = 3,
  BDS_STATUS_FORMAT = 4,
  BDS_STATUS_MISSING_DATA = 5,
  BDS_STATUS_DOMAIN = 6,
  BDS_STATUS_PRIOR_SUPPORT = 7,
  BDS_STATUS_SIZE = 8,
  BDS_STATUS_PANIC = 9,
} BdsStatus;

/**
 * Score family selector.
 */
typedef enum BdsScoreKind {
  BDS_SCORE_KIND_BDEU = 0,
  BDS_SCORE_KIND_BDS = 1,
  BDS_SCORE_KIND_BDJ = 2,
  BDS_SCORE_KIND_K2 = 3,
  BDS_SCORE_KIND_BDLA = 4,
  /**
   * BIC with `q (r - 1)` free parameters.
   */
  BDS_SCORE_KIND_BIC = 5,
  /**
   * BIC with the effective number of parameters.
   */
  BDS_SCORE_KIND_BIC_EFFECTIVE = 6,
} BdsScoreKind;

/**
 * Opaque DAG handle.
 */
typedef struct BdsDag BdsDag;

/**
 * Opaque dataset handle.
 */
typedef struct BdsDataset BdsDataset;

/**
 * A score choice. `alpha` is the imaginary sample size (BDeu, BDs, BDla);
 * `bdla_levels` is the BDla half-width `L`.
 */
typedef struct BdsScoreSpec {
  enum BdsScoreKind kind;
  double alpha;
  uint32_t bdla_levels;
} BdsScoreSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *bds_last_error_message(void);

/**
 * Loads a categorical CSV file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum BdsStatus bds_dataset_load_csv(const char *path, bool has_header, struct BdsDataset **out);

/**
 * Builds a dataset from integer codes, row-major `n_rows × n_vars`.
 * Variables are named `V1..Vn`.
 *
 * # Safety
 * `cardinalities` must hold `n_vars` values and `codes` `n_rows * n_vars`.
 */
enum BdsStatus bds_dataset_from_codes(uintptr_t n_vars,
                                      const uint32_t *cardinalities,
                                      uintptr_t n_rows,
                                      const uint32_t *codes,
                                      struct BdsDataset **out);

/**
 * Number of variables; 0 for NULL.
 *
 * # Safety
 * `data` must be NULL or a live handle.
 */
uintptr_t bds_dataset_n_vars(const struct BdsDataset *data);

/**
 * Number of rows; 0 for NULL.
 *
 * # Safety
 * `data` must be NULL or a live handle.
 */
uintptr_t bds_dataset_n_rows(const struct BdsDataset *data);

/**
 * # Safety
 * `data` must be NULL or a handle not yet freed.
 */
void bds_dataset_free(struct BdsDataset *data);

/**
 * Builds a DAG from `n_arcs` `(parent, child)` pairs stored flat in `arcs`.
 *
 * # Safety
 * `arcs` must hold `2 * n_arcs` values; `out` must be writable.
 */
enum BdsStatus bds_dag_new(uintptr_t n_nodes,
                           const uint32_t *arcs,
                           uintptr_t n_arcs,
                           struct BdsDag **out);

/**
 * Number of arcs; 0 for NULL.
 *
 * # Safety
 * `dag` must be NULL or a live handle.
 */
uintptr_t bds_dag_arc_count(const struct BdsDag *dag);

/**
 * Copies up to `capacity` arcs as flat `(parent, child)` pairs into `buf`
 * (which must hold `2 * capacity` values) and returns the total arc count.
 *
 * # Safety
 * `dag` must be a live handle; `buf` must be NULL or hold `2 * capacity` values.
 */
uintptr_t bds_dag_arcs(const struct BdsDag *dag, uint32_t *buf, uintptr_t capacity);

/**
 * # Safety
 * `dag` must be NULL or a handle not yet freed.
 */
void bds_dag_free(struct BdsDag *dag);

/**
 * Log score of `child` given `parents`.
 *
 * # Safety
 * Handles must be live; `parents` must hold `n_parents` values; `spec` and `out` non-NULL.
 */
enum BdsStatus bds_local_log_score(const struct BdsDataset *data,
                                   uintptr_t child,
                                   const uint32_t *parents,
                                   uintptr_t n_parents,
                                   const struct BdsScoreSpec *spec,
                                   double *out);

/**
 * Total log score of `dag`.
 *
 * # Safety
 * Handles must be live; `spec` and `out` non-NULL.
 */
enum BdsStatus bds_total_log_score(const struct BdsDataset *data,
                                   const struct BdsDag *dag,
                                   const struct BdsScoreSpec *spec,
                                   double *out);

/**
 * Posterior expected conditional entropy of `child` given `parents`
 * (BDla: posterior-weighted over the grid).
 *
 * # Safety
 * As for [`bds_local_log_score`].
 */
enum BdsStatus bds_expected_entropy(const struct BdsDataset *data,
                                    uintptr_t child,
                                    const uint32_t *parents,
                                    uintptr_t n_parents,
                                    const struct BdsScoreSpec *spec,
                                    double *out);

/**
 * Natural log of the ME score (expected entropy times marginal likelihood).
 *
 * # Safety
 * As for [`bds_local_log_score`].
 */
enum BdsStatus bds_log_me_score(const struct BdsDataset *data,
                                uintptr_t child,
                                const uint32_t *parents,
                                uintptr_t n_parents,
                                const struct BdsScoreSpec *spec,
                                double *out);

/**
 * `ln BD(G-) - ln BD(G+)` for DAGs that differ in one parent set.
 *
 * # Safety
 * Handles must be live; `spec` and `out` non-NULL.
 */
enum BdsStatus bds_log_bayes_factor(const struct BdsDataset *data,
                                    const struct BdsDag *g_minus,
                                    const struct BdsDag *g_plus,
                                    const struct BdsScoreSpec *spec,
                                    double *out);

/**
 * Greedy hill climbing from the empty graph. Writes a new DAG handle to
 * `out_dag` and its total log score to `out_score`.
 *
 * # Safety
 * `data` must be live; `spec`, `out_dag` and `out_score` non-NULL.
 */
enum BdsStatus bds_hill_climb(const struct BdsDataset *data,
                              const struct BdsScoreSpec *spec,
                              uintptr_t max_parents,
                              uintptr_t max_iter,
                              struct BdsDag **out_dag,
                              double *out_score);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BDSCORE_H */
