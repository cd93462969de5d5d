//! Vehicle footprint, the point-vs-rectangle clearance rule and trajectory
//! level collision validation.
//!
//! The vehicle is a rectangle of length `V_L` and width `V_W` whose
//! longitudinal center sits `V_L/2 - rear_overhang` ahead of the rear axle.
//! An obstacle point is safe when the larger of its longitudinal and lateral
//! slab distances to the rectangle edge is at least the safety margin `d`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dynamics;
use crate::planner::TimedPath;
use crate::prediction::PredictionSet;
use crate::world::StaticMap;

/// Wraps an angle into `(-pi, pi]`.
pub fn normalize_angle(theta: f64) -> f64 {
    let mut a = theta % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Smallest signed difference `a - b` wrapped into `(-pi, pi]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    normalize_angle(a - b)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn distance_sq(&self, other: &Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// Pose of the rear-axle center.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    /// Heading in radians, counterclockwise from +X, kept in `(-pi, pi]`.
    pub theta: f64,
}

impl VehicleState {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn from_degrees(x: f64, y: f64, theta_deg: f64) -> Self {
        Self::new(x, y, theta_deg.to_radians())
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    pub fn distance(&self, other: &VehicleState) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleGeometry {
    pub wheelbase: f64,
    pub length: f64,
    pub width: f64,
    /// Distance from the rear axle to the rear edge.
    pub rear_overhang: f64,
    pub safety_margin: f64,
}

impl Default for VehicleGeometry {
    fn default() -> Self {
        Self {
            wheelbase: 3.0,
            length: 5.0,
            width: 2.0,
            rear_overhang: 1.0,
            safety_margin: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("invalid vehicle geometry: {0}")]
    Invalid(&'static str),
}

impl VehicleGeometry {
    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.wheelbase > 0.0) {
            return Err(GeometryError::Invalid("wheelbase must be positive"));
        }
        if !(self.length > self.wheelbase) {
            return Err(GeometryError::Invalid("length must exceed wheelbase"));
        }
        if !(self.width > 0.0) {
            return Err(GeometryError::Invalid("width must be positive"));
        }
        if !(self.rear_overhang >= 0.0 && self.rear_overhang <= self.length - self.wheelbase) {
            return Err(GeometryError::Invalid(
                "rear overhang must lie in [0, length - wheelbase]",
            ));
        }
        if !(self.safety_margin >= 0.0) {
            return Err(GeometryError::Invalid("safety margin must be non-negative"));
        }
        Ok(())
    }

    /// Longitudinal offset of the footprint center ahead of the rear axle.
    pub fn center_offset(&self) -> f64 {
        self.length / 2.0 - self.rear_overhang
    }

    pub fn half_length(&self) -> f64 {
        self.length / 2.0
    }

    pub fn half_width(&self) -> f64 {
        self.width / 2.0
    }

    pub fn footprint_center(&self, state: &VehicleState) -> Point2 {
        let c = self.center_offset();
        Point2::new(state.x + c * state.theta.cos(), state.y + c * state.theta.sin())
    }

    /// Radius around the footprint center beyond which no point can have
    /// clearance below `margin`.
    pub fn reach_radius(&self, margin: f64) -> f64 {
        (self.half_length() + margin).hypot(self.half_width() + margin)
    }

    /// Corners in counterclockwise order starting rear-right.
    pub fn corners(&self, state: &VehicleState) -> [Point2; 4] {
        let center = self.footprint_center(state);
        let (s, c) = state.theta.sin_cos();
        let (hl, hw) = (self.half_length(), self.half_width());
        let local = [(-hl, -hw), (hl, -hw), (hl, hw), (-hl, hw)];
        local.map(|(lx, ly)| Point2::new(center.x + lx * c - ly * s, center.y + lx * s + ly * c))
    }
}

/// Signed slab clearance of a point to the footprint, `max(o_x, o_y)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Clearance(pub f64);

impl Clearance {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn satisfies(self, margin: f64) -> bool {
        self.0 >= margin
    }
}

pub fn clearance(state: &VehicleState, geom: &VehicleGeometry, point: &Point2) -> Clearance {
    let center = geom.footprint_center(state);
    let (s, c) = state.theta.sin_cos();
    let dx = point.x - center.x;
    let dy = point.y - center.y;
    let xf = dx * c + dy * s;
    let yf = -dx * s + dy * c;
    Clearance((xf.abs() - geom.half_length()).max(yf.abs() - geom.half_width()))
}

pub fn state_collision_free(
    state: &VehicleState,
    geom: &VehicleGeometry,
    static_pts: &[Point2],
    dyn_pts: &[Point2],
    dyn_radius: f64,
) -> bool {
    let d = geom.safety_margin;
    static_pts
        .iter()
        .all(|p| clearance(state, geom, p).satisfies(d))
        && dyn_pts
            .iter()
            .all(|p| clearance(state, geom, p).satisfies(d + dyn_radius))
}

/// Smallest clearance of the state against the static map and the
/// obstacles' positions at time `t`. Dynamic values have the obstacle radius
/// subtracted so they compare directly against `d`.
pub fn state_min_clearance(
    state: &VehicleState,
    t: f64,
    geom: &VehicleGeometry,
    map: &StaticMap,
    preds: &PredictionSet,
) -> f64 {
    let static_min = map
        .points()
        .iter()
        .map(|p| clearance(state, geom, p).value())
        .fold(f64::INFINITY, f64::min);
    let dyn_min = preds
        .obstacles
        .iter()
        .map(|o| clearance(state, geom, &preds.predict(o, t)).value() - o.radius)
        .fold(f64::INFINITY, f64::min);
    static_min.min(dyn_min)
}

/// Minimum clearance over every sample of the path. Uses a linear scan of
/// the static points rather than the spatial index so it can serve as an
/// independent check of the planner.
pub fn path_min_clearance(
    path: &TimedPath,
    geom: &VehicleGeometry,
    map: &StaticMap,
    preds: &PredictionSet,
) -> f64 {
    path.samples
        .iter()
        .map(|s| state_min_clearance(&s.state, s.time, geom, map, preds))
        .fold(f64::INFINITY, f64::min)
}

/// Result of re-checking a path at a finer time step than it was planned at.
#[derive(Debug, Clone, PartialEq)]
pub struct SafetyReport {
    pub min_clearance: f64,
    pub violations: usize,
    pub first_violation_time: Option<f64>,
    pub checked_states: usize,
}

impl SafetyReport {
    pub fn is_safe(&self) -> bool {
        self.violations == 0
    }
}

/// Replays every hop of `path` under its recorded control at resolution
/// `step` and evaluates the clearance rule against `truth` at each instant.
pub fn verify_path(
    path: &TimedPath,
    geom: &VehicleGeometry,
    map: &StaticMap,
    truth: &PredictionSet,
    step: f64,
) -> SafetyReport {
    let d = geom.safety_margin;
    let mut report = SafetyReport {
        min_clearance: f64::INFINITY,
        violations: 0,
        first_violation_time: None,
        checked_states: 0,
    };
    let mut visit = |state: &VehicleState, t: f64| {
        let c = state_min_clearance(state, t, geom, map, truth);
        report.checked_states += 1;
        report.min_clearance = report.min_clearance.min(c);
        // 1e-9 absorbs rounding on states that sit exactly on the margin.
        if c < d - 1e-9 {
            report.violations += 1;
            report.first_violation_time.get_or_insert(t);
        }
    };
    for pair in path.samples.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let hop = b.time - a.time;
        let substeps = ((hop / step).round() as usize).max(1);
        let control = a.control.unwrap_or_default();
        for k in 0..substeps {
            let s = hop * k as f64 / substeps as f64;
            let state = dynamics::arc_closed_form(&a.state, &control, s, geom.wheelbase);
            visit(&state, a.time + s);
        }
    }
    if let Some(last) = path.samples.last() {
        visit(&last.state, last.time);
    }
    report
}
