//! C ABI over the planner.
//!
//! Every object crosses the boundary as an opaque handle created by a
//! `tha_*_new`/`tha_*_from_*` function and released with the matching
//! `tha_*_free`. Fallible calls return a [`ThaStatus`]; on anything but
//! `THA_OK` a description is available from [`tha_last_error`] on the same
//! thread.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use thastar::geometry::{clearance, verify_path};
use thastar::harness::scenario::Scenario;
use thastar::harness::suite::{FIELD_CLEARANCE, FIELD_RESOLUTION};
use thastar::heuristic::precompute_field;
use thastar::{
    plan, Bounds, DynamicObstacle, Heuristic, PlannerConfig, Point2, PredictionSet, StaticMap, TimedPath,
    VehicleGeometry, VehicleState,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    StartInCollision = 4,
    OutOfRange = 5,
    Internal = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThaHeuristic {
    Euclidean = 0,
    Grid = 1,
}

/// Rear-axle pose; heading in radians.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThaState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThaPoint {
    pub x: f64,
    pub y: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThaBounds {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThaObstacle {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub radius: f64,
}

/// One path sample. `v` and `delta` are the control held until the next
/// sample and are zero on the last one.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThaSample {
    pub time: f64,
    pub state: ThaState,
    pub v: f64,
    pub delta: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThaSafety {
    pub min_clearance: f64,
    pub violations: usize,
    pub checked_states: usize,
}

pub struct ThaScenario(Scenario);
pub struct ThaMap(StaticMap);
pub struct ThaPredictions(PredictionSet);
pub struct ThaPath {
    path: TimedPath,
    iterations: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn fail(status: ThaStatus, msg: impl Into<String>) -> ThaStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning panics into `THA_INTERNAL`.
fn guard(f: impl FnOnce() -> ThaStatus) -> ThaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            fail(ThaStatus::Internal, msg)
        }
    }
}

fn to_state(s: &ThaState) -> VehicleState {
    VehicleState::new(s.x, s.y, s.theta)
}

fn from_state(s: &VehicleState) -> ThaState {
    ThaState {
        x: s.x,
        y: s.y,
        theta: s.theta,
    }
}

/// # Safety
/// `p` must be null or a valid NUL-terminated string.
unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, ThaStatus> {
    if p.is_null() {
        return Err(fail(ThaStatus::NullPointer, "string argument is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(ThaStatus::InvalidArgument, "string is not valid UTF-8"))
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tha_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Clearance of `point` to the default vehicle footprint at `state`.
/// Negative inside the footprint.
#[no_mangle]
pub extern "C" fn tha_clearance(state: ThaState, point: ThaPoint) -> f64 {
    clearance(&to_state(&state), &VehicleGeometry::default(), &Point2::new(point.x, point.y)).value()
}

/// # Safety
/// `json` and `name` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tha_scenario_from_json(
    json: *const c_char,
    name: *const c_char,
    out: *mut *mut ThaScenario,
) -> ThaStatus {
    guard(|| {
        if out.is_null() {
            return fail(ThaStatus::NullPointer, "out is null");
        }
        let (text, name) = match (read_str(json), read_str(name)) {
            (Ok(t), Ok(n)) => (t, n),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match Scenario::from_json(text, name) {
            Ok(s) => {
                put(out, ThaScenario(s));
                ThaStatus::Ok
            }
            Err(e) => fail(ThaStatus::ParseError, e.to_string()),
        }
    })
}

/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tha_scenario_bundled(name: *const c_char, out: *mut *mut ThaScenario) -> ThaStatus {
    guard(|| {
        if out.is_null() {
            return fail(ThaStatus::NullPointer, "out is null");
        }
        let name = match read_str(name) {
            Ok(n) => n,
            Err(s) => return s,
        };
        match Scenario::bundled(name) {
            Ok(s) => {
                put(out, ThaScenario(s));
                ThaStatus::Ok
            }
            Err(e) => fail(ThaStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// # Safety
/// `scenario` must be a live handle; `start` and `goal` may be null.
#[no_mangle]
pub unsafe extern "C" fn tha_scenario_endpoints(
    scenario: *const ThaScenario,
    start: *mut ThaState,
    goal: *mut ThaState,
) -> ThaStatus {
    let Some(s) = scenario.as_ref() else {
        return fail(ThaStatus::NullPointer, "scenario is null");
    };
    if let Some(p) = start.as_mut() {
        *p = from_state(&s.0.start_state());
    }
    if let Some(p) = goal.as_mut() {
        *p = from_state(&s.0.goal_state());
    }
    ThaStatus::Ok
}

/// # Safety
/// `scenario` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tha_scenario_free(scenario: *mut ThaScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Static map of a scenario: parked vehicles and the area outline.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tha_map_from_scenario(scenario: *const ThaScenario, out: *mut *mut ThaMap) -> ThaStatus {
    guard(|| {
        let Some(s) = scenario.as_ref() else {
            return fail(ThaStatus::NullPointer, "scenario is null");
        };
        if out.is_null() {
            return fail(ThaStatus::NullPointer, "out is null");
        }
        put(out, ThaMap(s.0.build_map()));
        ThaStatus::Ok
    })
}

/// Static map from raw boundary points.
///
/// # Safety
/// `points` must reference `count` readable entries (it may be null when
/// `count` is zero); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tha_map_from_points(
    points: *const ThaPoint,
    count: usize,
    bounds: ThaBounds,
    cell_size: f64,
    out: *mut *mut ThaMap,
) -> ThaStatus {
    guard(|| {
        if out.is_null() || (points.is_null() && count > 0) {
            return fail(ThaStatus::NullPointer, "points or out is null");
        }
        if !(cell_size > 0.0) || !(bounds.max_x > bounds.min_x && bounds.max_y > bounds.min_y) {
            return fail(ThaStatus::InvalidArgument, "cell size must be positive and bounds non-empty");
        }
        let pts = if count == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(points, count)
                .iter()
                .map(|p| Point2::new(p.x, p.y))
                .collect()
        };
        let b = Bounds::new(bounds.min_x, bounds.min_y, bounds.max_x, bounds.max_y);
        put(out, ThaMap(StaticMap::new(pts, b, cell_size)));
        ThaStatus::Ok
    })
}

/// # Safety
/// `map` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tha_map_point_count(map: *const ThaMap) -> usize {
    map.as_ref().map_or(0, |m| m.0.points().len())
}

/// # Safety
/// `map` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tha_map_free(map: *mut ThaMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Empty obstacle set; positions extrapolate linearly up to `horizon`
/// seconds and stay put afterwards.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tha_predictions_new(horizon: f64, out: *mut *mut ThaPredictions) -> ThaStatus {
    if out.is_null() {
        return fail(ThaStatus::NullPointer, "out is null");
    }
    if !(horizon >= 0.0) {
        return fail(ThaStatus::InvalidArgument, "horizon must be non-negative");
    }
    put(out, ThaPredictions(PredictionSet::new(Vec::new(), horizon)));
    ThaStatus::Ok
}

/// # Safety
/// `preds` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tha_predictions_add(preds: *mut ThaPredictions, obstacle: ThaObstacle) -> ThaStatus {
    let Some(p) = preds.as_mut() else {
        return fail(ThaStatus::NullPointer, "predictions is null");
    };
    if !(obstacle.radius >= 0.0) {
        return fail(ThaStatus::InvalidArgument, "radius must be non-negative");
    }
    p.0.obstacles.push(DynamicObstacle::new(
        Point2::new(obstacle.x, obstacle.y),
        Point2::new(obstacle.vx, obstacle.vy),
        obstacle.radius,
    ));
    ThaStatus::Ok
}

/// # Safety
/// `preds` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tha_predictions_free(preds: *mut ThaPredictions) {
    if !preds.is_null() {
        drop(Box::from_raw(preds));
    }
}

/// Plans from `start` to `goal` with the default vehicle and planner
/// settings. A search that exhausts its budget still succeeds and yields a
/// one-sample stationary path; check [`tha_path_reached_goal`].
///
/// # Safety
/// `map` must be a live handle, `preds` a live handle or null for no
/// obstacles, and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tha_plan(
    map: *const ThaMap,
    preds: *const ThaPredictions,
    start: ThaState,
    goal: ThaState,
    heuristic: ThaHeuristic,
    max_iterations: usize,
    out: *mut *mut ThaPath,
) -> ThaStatus {
    guard(|| {
        let Some(map) = map.as_ref() else {
            return fail(ThaStatus::NullPointer, "map is null");
        };
        if out.is_null() {
            return fail(ThaStatus::NullPointer, "out is null");
        }
        let empty = PredictionSet::empty();
        let preds = preds.as_ref().map_or(&empty, |p| &p.0);
        let (x0, e) = (to_state(&start), to_state(&goal));
        let field = match heuristic {
            ThaHeuristic::Grid => match precompute_field(&map.0, &e.position(), FIELD_RESOLUTION, FIELD_CLEARANCE) {
                Ok(f) => Some(f),
                Err(err) => return fail(ThaStatus::InvalidArgument, err.to_string()),
            },
            ThaHeuristic::Euclidean => None,
        };
        let h = field.as_ref().map_or(Heuristic::Euclidean, Heuristic::Grid);
        match plan(&x0, &e, &map.0, preds, &h, max_iterations, &PlannerConfig::default()) {
            Ok(o) => {
                put(
                    out,
                    ThaPath {
                        path: o.path,
                        iterations: o.iterations,
                    },
                );
                ThaStatus::Ok
            }
            Err(thastar::planner::PlanError::StartInCollision { x, y }) => fail(
                ThaStatus::StartInCollision,
                format!("start state ({x:.3}, {y:.3}) is in collision"),
            ),
            Err(err) => fail(ThaStatus::InvalidArgument, err.to_string()),
        }
    })
}

/// # Safety
/// `path` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tha_path_len(path: *const ThaPath) -> usize {
    path.as_ref().map_or(0, |p| p.path.samples.len())
}

/// # Safety
/// `path` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tha_path_reached_goal(path: *const ThaPath) -> bool {
    path.as_ref().is_some_and(|p| !p.path.is_stationary())
}

/// # Safety
/// `path` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tha_path_iterations(path: *const ThaPath) -> usize {
    path.as_ref().map_or(0, |p| p.iterations)
}

/// # Safety
/// `path` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tha_path_sample(path: *const ThaPath, index: usize, out: *mut ThaSample) -> ThaStatus {
    let (Some(p), Some(out)) = (path.as_ref(), out.as_mut()) else {
        return fail(ThaStatus::NullPointer, "path or out is null");
    };
    let Some(s) = p.path.samples.get(index) else {
        return fail(
            ThaStatus::OutOfRange,
            format!("sample {index} out of range (len {})", p.path.samples.len()),
        );
    };
    let u = s.control.unwrap_or_default();
    *out = ThaSample {
        time: s.time,
        state: from_state(&s.state),
        v: u.v,
        delta: u.delta,
    };
    ThaStatus::Ok
}

/// Re-checks `path` against the map and obstacles every `step` seconds.
///
/// # Safety
/// `path` and `map` must be live handles, `preds` a live handle or null,
/// and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tha_path_verify(
    path: *const ThaPath,
    map: *const ThaMap,
    preds: *const ThaPredictions,
    step: f64,
    out: *mut ThaSafety,
) -> ThaStatus {
    guard(|| {
        let (Some(p), Some(m), Some(out)) = (path.as_ref(), map.as_ref(), out.as_mut()) else {
            return fail(ThaStatus::NullPointer, "path, map or out is null");
        };
        if !(step > 0.0) {
            return fail(ThaStatus::InvalidArgument, "step must be positive");
        }
        let empty = PredictionSet::empty();
        let preds = preds.as_ref().map_or(&empty, |x| &x.0);
        let r = verify_path(&p.path, &VehicleGeometry::default(), &m.0, preds, step);
        *out = ThaSafety {
            min_clearance: r.min_clearance,
            violations: r.violations,
            checked_states: r.checked_states,
        };
        ThaStatus::Ok
    })
}

/// # Safety
/// `path` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tha_path_free(path: *mut ThaPath) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}
