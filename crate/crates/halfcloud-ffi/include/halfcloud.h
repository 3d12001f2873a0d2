#ifndef HALFCLOUD_H
#define HALFCLOUD_H

/* Generated by cbindgen from halfcloud-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible function.
 */
typedef enum HcStatus {
  HC_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  HC_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  HC_STATUS_INVALID_UTF8 = 2,
  /**
   * File system failure (path in the error message).
   */
  HC_STATUS_IO = 3,
  /**
   * Malformed input file.
   */
  HC_STATUS_PARSE = 4,
  /**
   * Parameter or precondition violation.
   */
  HC_STATUS_INVALID_ARGUMENT = 5,
  /**
   * A cloud failed the oriented-point invariants.
   */
  HC_STATUS_INVALID_CLOUD = 6,
  /**
   * Index past the end of the cloud.
   */
  HC_STATUS_INDEX_OUT_OF_RANGE = 7,
  /**
   * Internal panic, caught at the boundary.
   */
  HC_STATUS_PANIC = 8,
} HcStatus;

/**
 * Where a cloud's points came from.
 */
typedef enum HcSource {
  HC_SOURCE_STRUCTURED = 0,
  HC_SOURCE_UNSTRUCTURED = 1,
  HC_SOURCE_HALF_STRUCTURED = 2,
} HcSource;

/**
 * On-disk encoding for `hc_cloud_write`.
 */
typedef enum HcFormat {
  HC_FORMAT_PLY_BINARY = 0,
  HC_FORMAT_PLY_ASCII = 1,
  HC_FORMAT_XYZN = 2,
} HcFormat;

/**
 * Opaque point-cloud handle.
 */
typedef struct HcCloud HcCloud;

/**
 * A regular grid: `dims` cells of side `spacing` starting at `origin`.
 */
typedef struct HcGrid {
  double origin[3];
  double spacing;
  uint32_t dims[3];
} HcGrid;

/**
 * Merge thresholds; see the library documentation for the semantics.
 */
typedef struct HcMergeParams {
  size_t k;
  double d_un;
  double cos_theta_min;
  size_t fill_min_support;
  double outlier_radius_un;
  double outlier_radius_struct;
} HcMergeParams;

/**
 * Merge statistics. `measured_d_half` is NaN when the output has fewer
 * than two points.
 */
typedef struct HcMergeStats {
  size_t n_struct_in;
  size_t n_un_in;
  size_t n_selected_un;
  size_t n_fill_struct;
  size_t n_outliers_un;
  size_t n_outliers_struct;
  double measured_d_half;
} HcMergeStats;

/**
 * Condensed outcome of a bound verification.
 */
typedef struct HcBoundSummary {
  bool holds;
  double worst_measured;
  double worst_allowed;
} HcBoundSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *hc_version(void);

/**
 * Message of the last error on this thread. Valid until the next failing
 * call on the same thread; never null.
 */
const char *hc_last_error_message(void);

/**
 * Builds a cloud from `count` interleaved records `x y z nx ny nz`.
 *
 * # Safety
 * `points` must reference `6 * count` readable doubles (or be null only
 * when `count == 0`); `out` must be a valid destination pointer. The
 * returned handle must be released with [`hc_cloud_free`].
 */
enum HcStatus hc_cloud_new(const double *points,
                           size_t count,
                           enum HcSource source,
                           struct HcCloud **out);

/**
 * Reads a cloud from a PLY or XYZN file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be a valid
 * destination pointer. The returned handle must be released with
 * [`hc_cloud_free`].
 */
enum HcStatus hc_cloud_read(const char *path, enum HcSource source, struct HcCloud **out);

/**
 * Writes a cloud to disk in the given format.
 *
 * # Safety
 * `cloud` must be a live handle from this library; `path` must be a
 * NUL-terminated string.
 */
enum HcStatus hc_cloud_write(const struct HcCloud *cloud, const char *path, enum HcFormat format);

/**
 * Releases a handle returned by this library. Null is a no-op.
 *
 * # Safety
 * `cloud` must be a handle from this library that has not been freed yet.
 */
void hc_cloud_free(struct HcCloud *cloud);

/**
 * Number of points; 0 for a null handle.
 *
 * # Safety
 * `cloud` must be null or a live handle from this library.
 */
size_t hc_cloud_len(const struct HcCloud *cloud);

/**
 * Copies one point's position and normal into the given arrays.
 *
 * # Safety
 * `cloud` must be a live handle; `position` and `normal` must each point
 * at three writable doubles.
 */
enum HcStatus hc_cloud_point(const struct HcCloud *cloud,
                             size_t index,
                             double *position,
                             double *normal);

/**
 * Grid metadata carried by a structured cloud, if any.
 *
 * # Safety
 * `cloud` must be a live handle; `out` must be a valid destination pointer.
 */
enum HcStatus hc_cloud_grid(const struct HcCloud *cloud, struct HcGrid *out);

/**
 * Maximum over all points of the distance to their nearest other point.
 *
 * # Safety
 * `cloud` must be a live handle; `out` must be a valid destination pointer.
 */
enum HcStatus hc_max_nn_distance(const struct HcCloud *cloud, double *out);

/**
 * Merges a structured and an unstructured cloud into a half-structured one.
 * `out_stats` may be null when only the cloud is wanted.
 *
 * # Safety
 * `p_struct`, `p_un` must be live handles; `params` must point at a valid
 * parameter struct; `out_half` must be a valid destination pointer;
 * `out_stats` must be null or a valid destination pointer. The returned
 * handle must be released with [`hc_cloud_free`].
 */
enum HcStatus hc_merge(const struct HcCloud *p_struct,
                       const struct HcCloud *p_un,
                       const struct HcMergeParams *params,
                       struct HcCloud **out_half,
                       struct HcMergeStats *out_stats);

/**
 * Checks the three-case nearest-neighbor distance bound.
 * `tags[i]` is 0 for a structured-origin point, 1 for unstructured.
 *
 * # Safety
 * `cloud` must be a live handle; `tags` must reference `tag_count` readable
 * bytes; `out` must be a valid destination pointer.
 */
enum HcStatus hc_verify_distance_bound(const struct HcCloud *cloud,
                                       const uint8_t *tags,
                                       size_t tag_count,
                                       double d_struct,
                                       double d_un,
                                       struct HcBoundSummary *out);

/**
 * Checks the per-cell and sliding-cube density bounds.
 *
 * # Safety
 * `cloud` must be a live handle; `grid` and `out` must be valid pointers.
 */
enum HcStatus hc_verify_density_bound(const struct HcCloud *cloud,
                                      const struct HcGrid *grid,
                                      size_t k,
                                      double probe_width,
                                      struct HcBoundSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HALFCLOUD_H */
