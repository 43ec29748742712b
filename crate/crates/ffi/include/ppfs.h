#ifndef PPFS_H
#define PPFS_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PpfsFoldMode {
  PPFS_FOLD_MODE_SUBSET = 0,
  PPFS_FOLD_MODE_COMPLEMENT = 1,
} PpfsFoldMode;

typedef enum PpfsShrinkMode {
  PPFS_SHRINK_MODE_IMPROVED = 0,
  PPFS_SHRINK_MODE_RESTART = 1,
} PpfsShrinkMode;

typedef enum PpfsStatus {
  PPFS_STATUS_OK = 0,
  PPFS_STATUS_NULL_POINTER = 1,
  PPFS_STATUS_INVALID_ARGUMENT = 2,
  PPFS_STATUS_INVALID_CONFIG = 3,
  PPFS_STATUS_INVALID_DATA = 4,
  PPFS_STATUS_IO = 5,
  PPFS_STATUS_DEGENERATE = 6,
  PPFS_STATUS_OUT_OF_RANGE = 7,
  PPFS_STATUS_PANIC = 99,
} PpfsStatus;

typedef enum PpfsTask {
  PPFS_TASK_CLASSIFICATION = 0,
  PPFS_TASK_REGRESSION = 1,
} PpfsTask;

/**
 * Opaque dataset handle.
 */
typedef struct PpfsDataset PpfsDataset;

/**
 * Opaque selection report handle.
 */
typedef struct PpfsReport PpfsReport;

/**
 * Selector configuration. Start from [`ppfs_config_default`].
 */
typedef struct PpfsConfigC {
  size_t copies;
  size_t folds;
  double alpha;
  double test_fraction;
  uint64_t seed;
  /**
   * 0 means unlimited.
   */
  size_t max_depth;
  size_t min_samples_split;
  size_t min_samples_leaf;
  size_t exact_max;
  enum PpfsFoldMode fold_mode;
  enum PpfsShrinkMode shrink_mode;
} PpfsConfigC;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library defaults: B = 10, no aggregation, alpha = 0.05, 80/20 splits.
 */
struct PpfsConfigC ppfs_config_default(void);

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next library call on this thread; do not free.
 */
const char *ppfs_last_error_message(void);

/**
 * Loads a headed CSV file. Text columns become categorical.
 *
 * # Safety
 * `path` and `target` must be NUL-terminated strings; `out` must be writable.
 */
enum PpfsStatus ppfs_dataset_load_csv(const char *path,
                                      const char *target,
                                      enum PpfsTask task,
                                      struct PpfsDataset **out);

/**
 * Builds a dataset from a row-major `n_rows x n_cols` continuous matrix.
 * Feature names are `x0`, `x1`, ...
 *
 * # Safety
 * `values` must hold `n_rows * n_cols` doubles, `target` `n_rows` doubles;
 * `out` must be writable.
 */
enum PpfsStatus ppfs_dataset_from_rows(const double *values,
                                       size_t n_rows,
                                       size_t n_cols,
                                       const double *target,
                                       enum PpfsTask task,
                                       struct PpfsDataset **out);

/**
 * # Safety
 * `ds` must come from this library and not be freed twice. Null is ignored.
 */
void ppfs_dataset_free(struct PpfsDataset *ds);

/**
 * Row count, or 0 for a null handle.
 *
 * # Safety
 * `ds` must be null or a live handle.
 */
size_t ppfs_dataset_rows(const struct PpfsDataset *ds);

/**
 * Feature count, or 0 for a null handle.
 *
 * # Safety
 * `ds` must be null or a live handle.
 */
size_t ppfs_dataset_features(const struct PpfsDataset *ds);

/**
 * Runs feature selection.
 *
 * # Safety
 * `ds` must be a live handle, `cfg` readable, `out` writable.
 */
enum PpfsStatus ppfs_select(const struct PpfsDataset *ds,
                            const struct PpfsConfigC *cfg,
                            struct PpfsReport **out);

/**
 * # Safety
 * `report` must come from this library and not be freed twice. Null is ignored.
 */
void ppfs_report_free(struct PpfsReport *report);

/**
 * Number of selected features, or 0 for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
size_t ppfs_report_selected_count(const struct PpfsReport *report);

/**
 * Column index of the `k`-th selected feature (ascending order).
 *
 * # Safety
 * `report` must be a live handle and `out` writable.
 */
enum PpfsStatus ppfs_report_selected_index(const struct PpfsReport *report, size_t k, size_t *out);

/**
 * Report as JSON. `include_timings = false` drops wall-clock fields.
 * Release the string with [`ppfs_string_free`].
 *
 * # Safety
 * `report` must be a live handle and `out` writable.
 */
enum PpfsStatus ppfs_report_to_json(const struct PpfsReport *report,
                                    bool include_timings,
                                    char **out);

/**
 * # Safety
 * `s` must come from this library and not be freed twice. Null is ignored.
 */
void ppfs_string_free(char *s);

/**
 * One-sided paired Wilcoxon signed-rank p-value for `b - a > 0`.
 *
 * # Safety
 * `a` and `b` must hold `n` doubles; `p_value` must be writable.
 */
enum PpfsStatus ppfs_wilcoxon_one_sided(const double *a,
                                        const double *b,
                                        size_t n,
                                        double *p_value);

/**
 * Permutation independence test of `feature` given `conditioning` columns.
 *
 * # Safety
 * `ds` must be a live handle, `cfg` readable, `conditioning` must hold
 * `n_conditioning` indices (may be null when zero), `p_value` writable.
 */
enum PpfsStatus ppfs_ppi_test(const struct PpfsDataset *ds,
                              size_t feature,
                              const size_t *conditioning,
                              size_t n_conditioning,
                              const struct PpfsConfigC *cfg,
                              double *p_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PPFS_H */
