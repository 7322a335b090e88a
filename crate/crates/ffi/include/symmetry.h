#ifndef SYMMETRY_H
#define SYMMETRY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum SymStatus {
  SYM_STATUS_OK = 0,
  SYM_STATUS_NULL_POINTER = 1,
  /**
   * Bad vector, plane, quaternion, configuration or argument.
   */
  SYM_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Empty, degenerate or inconsistent mesh or cloud.
   */
  SYM_STATUS_INVALID_GEOMETRY = 3,
  /**
   * Alignment turned too far from the requested direction.
   */
  SYM_STATUS_DIRECTION_REJECTED = 4,
  SYM_STATUS_EMPTY_GROUND_TRUTH = 5,
  SYM_STATUS_PARSE_ERROR = 6,
  SYM_STATUS_UNSUPPORTED_FORMAT = 7,
  SYM_STATUS_IO_ERROR = 8,
  SYM_STATUS_DOCUMENT_ERROR = 9,
  /**
   * A Rust panic was caught at the boundary.
   */
  SYM_STATUS_PANIC = 99,
} SymStatus;

/**
 * Nearest-neighbor or one-to-one matching for [`sym_evaluate`].
 */
typedef enum SymMatching {
  SYM_MATCHING_NEAREST = 0,
  SYM_MATCHING_ONE_TO_ONE = 1,
} SymMatching;

typedef struct SymCloud SymCloud;

typedef struct SymMesh SymMesh;

typedef struct SymPlaneSet SymPlaneSet;

typedef struct SymDetectorConfig {
  size_t n_points;
  size_t n_candidates;
  double chamfer_gate;
  double candidate_gate;
  double merge_threshold_deg;
  double ubiquity_fraction;
} SymDetectorConfig;

/**
 * Plane `normal · x + offset = 0` with the detector's residual and score
 * (residual 0 and score 1 where not applicable).
 */
typedef struct SymPlane {
  double normal[3];
  double offset;
  double residual;
  double score;
} SymPlane;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if none. Valid
 * until the next failing call on the same thread.
 */
const char *sym_last_error(void);

/**
 * Fills `out` with the library defaults.
 *
 * # Safety
 * `out` must be null or valid for a write.
 */
enum SymStatus sym_detector_config_default(struct SymDetectorConfig *out);

/**
 * Builds a mesh from `n_vertices` xyz triples and `n_faces` index triples.
 *
 * # Safety
 * `vertices` must hold `3 * n_vertices` doubles, `faces` `3 * n_faces`
 * indices, and `out` must be valid for a write.
 */
enum SymStatus sym_mesh_new(const double *vertices,
                            size_t n_vertices,
                            const uint32_t *faces,
                            size_t n_faces,
                            struct SymMesh **out);

/**
 * Loads an OBJ or PLY mesh.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` valid for a write.
 */
enum SymStatus sym_mesh_load(const char *path, struct SymMesh **out);

/**
 * # Safety
 * `mesh` must be null or a handle from this library not yet freed.
 */
void sym_mesh_free(struct SymMesh *mesh);

/**
 * Builds a cloud from `n_points` xyz triples.
 *
 * # Safety
 * `xyz` must hold `3 * n_points` doubles and `out` be valid for a write.
 */
enum SymStatus sym_cloud_new(const double *xyz, size_t n_points, struct SymCloud **out);

/**
 * Loads the vertex positions of an OBJ or PLY file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` valid for a write.
 */
enum SymStatus sym_cloud_load(const char *path, struct SymCloud **out);

/**
 * Number of points, 0 for a null handle.
 *
 * # Safety
 * `cloud` must be null or a live handle.
 */
size_t sym_cloud_len(const struct SymCloud *cloud);

/**
 * Copies the points into `xyz`, which must have room for `3 * capacity`
 * doubles; fails if `capacity` is smaller than the cloud.
 *
 * # Safety
 * `cloud` must be a live handle and `xyz` valid for `3 * capacity` writes.
 */
enum SymStatus sym_cloud_copy_points(const struct SymCloud *cloud, double *xyz, size_t capacity);

/**
 * # Safety
 * `cloud` must be null or a handle from this library not yet freed.
 */
void sym_cloud_free(struct SymCloud *cloud);

/**
 * Detects the reflection planes of a mesh. Planes are in the mesh's frame.
 *
 * # Safety
 * `mesh` must be a live handle, `config` null (defaults) or valid, and
 * `out` valid for a write.
 */
enum SymStatus sym_detect(const struct SymMesh *mesh,
                          const struct SymDetectorConfig *config,
                          uint64_t seed,
                          struct SymPlaneSet **out);

/**
 * Detects reflection planes directly from a point cloud.
 *
 * # Safety
 * As for [`sym_detect`].
 */
enum SymStatus sym_detect_cloud(const struct SymCloud *cloud,
                                const struct SymDetectorConfig *config,
                                struct SymPlaneSet **out);

/**
 * # Safety
 * `set` must be null or a live handle.
 */
size_t sym_plane_set_len(const struct SymPlaneSet *set);

/**
 * True when the shape is symmetric about (nearly) every plane tried.
 *
 * # Safety
 * `set` must be null or a live handle.
 */
bool sym_plane_set_ubiquitous(const struct SymPlaneSet *set);

/**
 * Plane `index`, in ascending residual order.
 *
 * # Safety
 * `set` must be a live handle and `out` valid for a write.
 */
enum SymStatus sym_plane_set_get(const struct SymPlaneSet *set, size_t index, struct SymPlane *out);

/**
 * # Safety
 * `set` must be null or a handle from this library not yet freed.
 */
void sym_plane_set_free(struct SymPlaneSet *set);

/**
 * Scores predicted normals against ground-truth normals (xyz triples).
 * `precision`, `recall` and `f` receive one value per threshold, in the
 * order given; `gd_deg` the average geodesic distance.
 *
 * # Safety
 * Array pointers must be valid for the stated lengths (`3 * n` for
 * normals) and outputs valid for writes.
 */
enum SymStatus sym_evaluate(const double *pred,
                            size_t n_pred,
                            const double *gt,
                            size_t n_gt,
                            const double *thresholds_deg,
                            size_t n_thresholds,
                            enum SymMatching matching,
                            double *precision,
                            double *recall,
                            double *f,
                            double *gd_deg);

/**
 * Resolves the offset of a plane with normal `direction` against the cloud.
 *
 * # Safety
 * `cloud` must be a live handle, `direction` point to 3 doubles and `out`
 * be valid for a write.
 */
enum SymStatus sym_align_plane(const struct SymCloud *cloud,
                               const double *direction,
                               struct SymPlane *out);

/**
 * Appends reflections of `floor(fraction * n)` distinct random points.
 *
 * # Safety
 * `cloud` and `plane` must be valid and `out` valid for a write.
 */
enum SymStatus sym_densify(const struct SymCloud *cloud,
                           const struct SymPlane *plane,
                           double fraction,
                           uint64_t seed,
                           struct SymCloud **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYMMETRY_H */
