#ifndef DEPSMELL_H
#define DEPSMELL_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  DS_LABEL_UNLABELED = 0,
  DS_LABEL_FAST = 1,
  DS_LABEL_SLOW = 2,
} DsLabel;

/**
 * Constraint smell of a single dependency string; `DS_SMELL_NONE` when clean.
 */
typedef enum {
  DS_SMELL_NONE = 0,
  DS_SMELL_PINNED = 1,
  DS_SMELL_URL = 2,
  DS_SMELL_RESTRICTIVE = 3,
  DS_SMELL_PERMISSIVE = 4,
  DS_SMELL_NO_LOCK = 5,
  DS_SMELL_UNUSED = 6,
  DS_SMELL_MISSING = 7,
} DsSmell;

typedef enum {
  DS_STATUS_OK = 0,
  DS_STATUS_NULL_POINTER = 1,
  DS_STATUS_INVALID_UTF8 = 2,
  DS_STATUS_PARSE = 3,
  DS_STATUS_IO = 4,
  DS_STATUS_NOT_FOUND = 5,
  DS_STATUS_INVALID_ARGUMENT = 6,
  DS_STATUS_MODEL = 7,
  DS_STATUS_PANIC = 8,
} DsStatus;

typedef enum {
  DS_STRATEGY_RESTRICTIVE = 0,
  DS_STRATEGY_BALANCED = 1,
  DS_STRATEGY_PERMISSIVE = 2,
  DS_STRATEGY_UNCLASSIFIED = 3,
} DsStrategy;

/**
 * Trained random forest. Safe to share across threads for prediction.
 */
typedef struct DsForest DsForest;

/**
 * Immutable ecosystem snapshot. Safe to share across threads for reads.
 */
typedef struct DsSnapshot DsSnapshot;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string. Do not free.
 */
const char *ds_version(void);

/**
 * Message for the most recent failure on this thread, or NULL.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *ds_last_error(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and must not be used afterwards.
 */
void ds_string_free(char *s);

/**
 * Whether `version` satisfies `range` under npm semantics.
 *
 * # Safety
 * String arguments must be NUL-terminated; `out` must be writable.
 */
DsStatus ds_semver_satisfies(const char *version_text,
                             const char *range_text,
                             bool include_prerelease,
                             bool *out_result);

/**
 * Index of the highest of `versions` satisfying `range`, or -1.
 *
 * # Safety
 * `versions` must point to `count` NUL-terminated strings.
 */
DsStatus ds_semver_max_satisfying(const char *const *versions,
                                  size_t count,
                                  const char *range_text,
                                  ptrdiff_t *out_index);

/**
 * Three-way SemVer precedence comparison: -1, 0 or 1.
 *
 * # Safety
 * String arguments must be NUL-terminated; `out` must be writable.
 */
DsStatus ds_semver_compare(const char *a, const char *b, int32_t *out_order);

/**
 * Update strategy of a dependency constraint string.
 *
 * # Safety
 * `constraint` must be NUL-terminated; `out` must be writable.
 */
DsStatus ds_classify_constraint(const char *constraint, DsStrategy *out_strategy);

/**
 * Constraint smell (pinned, URL, restrictive, permissive) of one runtime
 * dependency string.
 *
 * # Safety
 * `constraint` must be NUL-terminated; `out` must be writable.
 */
DsStatus ds_constraint_smell(const char *constraint, DsSmell *out_smell);

/**
 * Lints the project in `dir` and returns the outcome as JSON
 * (`findings`, `manifest_warnings`, `notices`).
 *
 * # Safety
 * `dir` must be NUL-terminated; `out_json` must be writable.
 */
DsStatus ds_lint_project(const char *dir,
                         bool include_dev,
                         bool check_lockfile,
                         bool check_imports,
                         char **out_json);

/**
 * Loads a snapshot from its three line-delimited files.
 *
 * # Safety
 * Paths must be NUL-terminated; `out_snapshot` must be writable.
 */
DsStatus ds_snapshot_load(const char *releases_path,
                          const char *deps_path,
                          const char *advisories_path,
                          DsSnapshot **out_snapshot);

/**
 * Releases a snapshot. NULL is ignored.
 *
 * # Safety
 * `snapshot` must come from [`ds_snapshot_load`] and not be used afterwards.
 */
void ds_snapshot_free(DsSnapshot *snapshot);

/**
 * Snapshot horizon as Unix seconds.
 *
 * # Safety
 * `snapshot` must be a live handle; `out` must be writable.
 */
DsStatus ds_snapshot_horizon(const DsSnapshot *snapshot, int64_t *out_unix_seconds);

/**
 * Number of advisories in the snapshot.
 *
 * # Safety
 * `snapshot` must be a live handle; `out` must be writable.
 */
DsStatus ds_snapshot_advisory_count(const DsSnapshot *snapshot, size_t *out_count);

/**
 * Version of `package` a fresh install of `range` would pick at
 * `at_unix_seconds`. Writes NULL when nothing published by then satisfies.
 *
 * # Safety
 * Strings must be NUL-terminated; `out_version` must be writable.
 */
DsStatus ds_snapshot_resolve_at(const DsSnapshot *snapshot,
                                const char *package,
                                const char *range_text,
                                int64_t at_unix_seconds,
                                char **out_version);

/**
 * Fix and adoption timeline as JSON: one advisory object when
 * `advisory_id` is given, otherwise an array over every advisory.
 *
 * # Safety
 * `snapshot` must be a live handle; `advisory_id` is NULL or NUL-terminated.
 */
DsStatus ds_snapshot_timeline_json(const DsSnapshot *snapshot,
                                   const char *advisory_id,
                                   char **out_json);

/**
 * Adoption label for a delay in days under the given thresholds.
 *
 * # Safety
 * `out_label` must be writable.
 */
DsStatus ds_label(double delay_days,
                  double fast_below_days,
                  double slow_above_days,
                  DsLabel *out_label);

/**
 * Parses a serialized model.
 *
 * # Safety
 * `json` must be NUL-terminated; `out_forest` must be writable.
 */
DsStatus ds_forest_from_json(const char *json, DsForest **out_forest);

/**
 * Loads a model file written by `depsmell train`.
 *
 * # Safety
 * `path` must be NUL-terminated; `out_forest` must be writable.
 */
DsStatus ds_forest_load(const char *path, DsForest **out_forest);

/**
 * Releases a forest. NULL is ignored.
 *
 * # Safety
 * `forest` must come from this library and not be used afterwards.
 */
void ds_forest_free(DsForest *forest);

/**
 * Number of input features the forest expects.
 *
 * # Safety
 * `forest` must be a live handle; `out_count` must be writable.
 */
DsStatus ds_forest_feature_count(const DsForest *forest, size_t *out_count);

/**
 * Probability of the fast class for one feature row.
 *
 * # Safety
 * `features` must point to `n_features` doubles.
 */
DsStatus ds_forest_predict(const DsForest *forest,
                           const double *features,
                           size_t n_features,
                           double *out_probability);

/**
 * Fast-class probabilities for `n_rows` row-major feature rows.
 *
 * # Safety
 * `rows` must hold `n_rows * n_features` doubles and `out_probabilities`
 * room for `n_rows`.
 */
DsStatus ds_forest_predict_many(const DsForest *forest,
                                const double *rows,
                                size_t n_rows,
                                size_t n_features,
                                double *out_probabilities);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DEPSMELL_H */
