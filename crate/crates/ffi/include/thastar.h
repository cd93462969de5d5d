#ifndef THASTAR_H
#define THASTAR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ThaStatus {
  THA_STATUS_OK = 0,
  THA_STATUS_NULL_POINTER = 1,
  THA_STATUS_INVALID_ARGUMENT = 2,
  THA_STATUS_PARSE_ERROR = 3,
  THA_STATUS_START_IN_COLLISION = 4,
  THA_STATUS_OUT_OF_RANGE = 5,
  THA_STATUS_INTERNAL = 6,
} ThaStatus;

typedef enum ThaHeuristic {
  THA_HEURISTIC_EUCLIDEAN = 0,
  THA_HEURISTIC_GRID = 1,
} ThaHeuristic;

typedef struct ThaMap ThaMap;

typedef struct ThaPath ThaPath;

typedef struct ThaPredictions ThaPredictions;

typedef struct ThaScenario ThaScenario;

/**
 * Rear-axle pose; heading in radians.
 */
typedef struct ThaState {
  double x;
  double y;
  double theta;
} ThaState;

typedef struct ThaPoint {
  double x;
  double y;
} ThaPoint;

typedef struct ThaBounds {
  double min_x;
  double min_y;
  double max_x;
  double max_y;
} ThaBounds;

typedef struct ThaObstacle {
  double x;
  double y;
  double vx;
  double vy;
  double radius;
} ThaObstacle;

/**
 * One path sample. `v` and `delta` are the control held until the next
 * sample and are zero on the last one.
 */
typedef struct ThaSample {
  double time;
  struct ThaState state;
  double v;
  double delta;
} ThaSample;

typedef struct ThaSafety {
  double min_clearance;
  size_t violations;
  size_t checked_states;
} ThaSafety;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *tha_last_error(void);

/**
 * Clearance of `point` to the default vehicle footprint at `state`.
 * Negative inside the footprint.
 */
double tha_clearance(struct ThaState state, struct ThaPoint point);

/**
 * # Safety
 * `json` and `name` must be NUL-terminated strings; `out` must be writable.
 */
enum ThaStatus tha_scenario_from_json(const char *json, const char *name, struct ThaScenario **out);

/**
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum ThaStatus tha_scenario_bundled(const char *name, struct ThaScenario **out);

/**
 * # Safety
 * `scenario` must be a live handle; `start` and `goal` may be null.
 */
enum ThaStatus tha_scenario_endpoints(const struct ThaScenario *scenario,
                                      struct ThaState *start,
                                      struct ThaState *goal);

/**
 * # Safety
 * `scenario` must be null or a handle not yet freed.
 */
void tha_scenario_free(struct ThaScenario *scenario);

/**
 * Static map of a scenario: parked vehicles and the area outline.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be writable.
 */
enum ThaStatus tha_map_from_scenario(const struct ThaScenario *scenario, struct ThaMap **out);

/**
 * Static map from raw boundary points.
 *
 * # Safety
 * `points` must reference `count` readable entries (it may be null when
 * `count` is zero); `out` must be writable.
 */
enum ThaStatus tha_map_from_points(const struct ThaPoint *points,
                                   size_t count,
                                   struct ThaBounds bounds,
                                   double cell_size,
                                   struct ThaMap **out);

/**
 * # Safety
 * `map` must be a live handle.
 */
size_t tha_map_point_count(const struct ThaMap *map);

/**
 * # Safety
 * `map` must be null or a handle not yet freed.
 */
void tha_map_free(struct ThaMap *map);

/**
 * Empty obstacle set; positions extrapolate linearly up to `horizon`
 * seconds and stay put afterwards.
 *
 * # Safety
 * `out` must be writable.
 */
enum ThaStatus tha_predictions_new(double horizon, struct ThaPredictions **out);

/**
 * # Safety
 * `preds` must be a live handle.
 */
enum ThaStatus tha_predictions_add(struct ThaPredictions *preds, struct ThaObstacle obstacle);

/**
 * # Safety
 * `preds` must be null or a handle not yet freed.
 */
void tha_predictions_free(struct ThaPredictions *preds);

/**
 * Plans from `start` to `goal` with the default vehicle and planner
 * settings. A search that exhausts its budget still succeeds and yields a
 * one-sample stationary path; check [`tha_path_reached_goal`].
 *
 * # Safety
 * `map` must be a live handle, `preds` a live handle or null for no
 * obstacles, and `out` writable.
 */
enum ThaStatus tha_plan(const struct ThaMap *map,
                        const struct ThaPredictions *preds,
                        struct ThaState start,
                        struct ThaState goal,
                        enum ThaHeuristic heuristic,
                        size_t max_iterations,
                        struct ThaPath **out);

/**
 * # Safety
 * `path` must be a live handle.
 */
size_t tha_path_len(const struct ThaPath *path);

/**
 * # Safety
 * `path` must be a live handle.
 */
bool tha_path_reached_goal(const struct ThaPath *path);

/**
 * # Safety
 * `path` must be a live handle.
 */
size_t tha_path_iterations(const struct ThaPath *path);

/**
 * # Safety
 * `path` must be a live handle and `out` writable.
 */
enum ThaStatus tha_path_sample(const struct ThaPath *path, size_t index, struct ThaSample *out);

/**
 * Re-checks `path` against the map and obstacles every `step` seconds.
 *
 * # Safety
 * `path` and `map` must be live handles, `preds` a live handle or null,
 * and `out` writable.
 */
enum ThaStatus tha_path_verify(const struct ThaPath *path,
                               const struct ThaMap *map,
                               const struct ThaPredictions *preds,
                               double step,
                               struct ThaSafety *out);

/**
 * # Safety
 * `path` must be null or a handle not yet freed.
 */
void tha_path_free(struct ThaPath *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* THASTAR_H */
