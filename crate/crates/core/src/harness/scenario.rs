//! Scenario documents: static layout, start and goal, obstacle sampling
//! boxes and planner overrides.
//!
//! A scenario is a JSON object:
//!
//! ```json
//! {
//!   "name": "perpendicular_head_in",
//!   "mode": "one_time",
//!   "bounds": { "min_x": -2, "min_y": -2, "max_x": 40, "max_y": 20 },
//!   "spot": { "length": 6.5, "width": 3.5, "angle_deg": 90 },
//!   "parked": [ { "x": 13, "y": 2.5, "heading_deg": 90, "length": 5, "width": 2 } ],
//!   "rows": [ { "origin": [0, 2.5], "direction_deg": 0, "pitch": 3.5, "count": 8,
//!               "heading_deg": 90, "skip": [3] } ],
//!   "start": [2, 11.5, 0],
//!   "goal": [20, 5, -90],
//!   "obstacle_boxes": [ { "x": [15, 30], "y": [7, 17], "count": 1 } ],
//!   "speed_range": [-0.7, 0.7],
//!   "obstacle_radius": 0.5,
//!   "max_iterations": 500
//! }
//! ```
//!
//! `rows` expands into parked vehicles of the default size placed every
//! `pitch` meters from `origin` along `direction_deg`, leaving out the
//! indices in `skip`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geometry::{clearance, Point2, VehicleGeometry, VehicleState};
use crate::world::{build_boundary_points, Bounds, ParkedVehicle, StaticMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    OneTime,
    Online,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpotDims {
    pub length: f64,
    pub width: f64,
    pub angle_deg: f64,
}

impl Default for SpotDims {
    fn default() -> Self {
        Self {
            length: 6.5,
            width: 3.5,
            angle_deg: 90.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParkedRow {
    pub origin: [f64; 2],
    #[serde(default)]
    pub direction_deg: f64,
    pub pitch: f64,
    pub count: usize,
    pub heading_deg: f64,
    #[serde(default)]
    pub skip: Vec<usize>,
    #[serde(default = "default_car_length")]
    pub length: f64,
    #[serde(default = "default_car_width")]
    pub width: f64,
}

fn default_car_length() -> f64 {
    5.0
}

fn default_car_width() -> f64 {
    2.0
}

impl ParkedRow {
    pub fn vehicles(&self) -> Vec<ParkedVehicle> {
        let (s, c) = self.direction_deg.to_radians().sin_cos();
        (0..self.count)
            .filter(|i| !self.skip.contains(i))
            .map(|i| {
                let d = i as f64 * self.pitch;
                ParkedVehicle {
                    x: self.origin[0] + d * c,
                    y: self.origin[1] + d * s,
                    heading_deg: self.heading_deg,
                    length: self.length,
                    width: self.width,
                }
            })
            .collect()
    }
}

/// Axis-aligned region from which `count` obstacle start positions are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObstacleBox {
    pub x: [f64; 2],
    pub y: [f64; 2],
    #[serde(default = "one")]
    pub count: usize,
}

fn one() -> usize {
    1
}

impl ObstacleBox {
    pub fn contains(&self, p: &Point2) -> bool {
        p.x >= self.x[0] && p.x <= self.x[1] && p.y >= self.y[0] && p.y <= self.y[1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub mode: Mode,
    pub bounds: Bounds,
    #[serde(default)]
    pub spot: SpotDims,
    #[serde(default)]
    pub road_width: Option<f64>,
    #[serde(default)]
    pub parked: Vec<ParkedVehicle>,
    #[serde(default)]
    pub rows: Vec<ParkedRow>,
    /// `[x, y, heading_deg]` of the rear axle.
    pub start: [f64; 3],
    pub goal: [f64; 3],
    #[serde(default)]
    pub obstacle_boxes: Vec<ObstacleBox>,
    #[serde(default = "default_speed_range")]
    pub speed_range: [f64; 2],
    #[serde(default = "default_radius")]
    pub obstacle_radius: f64,
    #[serde(default = "default_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_lookahead")]
    pub lookahead: usize,
}

fn default_speed_range() -> [f64; 2] {
    [-0.7, 0.7]
}

fn default_radius() -> f64 {
    0.5
}

fn default_iterations() -> usize {
    500
}

fn default_lookahead() -> usize {
    5
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{name}: line {line}, column {column}: {message}")]
    Parse {
        name: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{name}: {field}: {message}")]
    Invalid {
        name: String,
        field: &'static str,
        message: String,
    },
    #[error("unknown bundled scenario '{0}'")]
    Unknown(String),
}

pub const BUNDLED: [(&str, &str); 5] = [
    ("perpendicular_head_in", include_str!("../../scenarios/perpendicular_head_in.json")),
    ("perpendicular_reverse_in", include_str!("../../scenarios/perpendicular_reverse_in.json")),
    ("angle_head_in", include_str!("../../scenarios/angle_head_in.json")),
    ("parallel", include_str!("../../scenarios/parallel.json")),
    ("surface_lot", include_str!("../../scenarios/surface_lot.json")),
];

/// Names of the four single-plan scenarios in table order.
pub const ONE_TIME_SCENARIOS: [&str; 4] = ["perpendicular_head_in", "perpendicular_reverse_in", "angle_head_in", "parallel"];

impl Scenario {
    pub fn from_json(text: &str, name: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
            name: name.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        s.validate(&VehicleGeometry::default())?;
        Ok(s)
    }

    pub fn bundled(name: &str) -> Result<Self, ScenarioError> {
        let (_, text) = BUNDLED
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| ScenarioError::Unknown(name.to_string()))?;
        Self::from_json(text, name)
    }

    pub fn start_state(&self) -> VehicleState {
        VehicleState::from_degrees(self.start[0], self.start[1], self.start[2])
    }

    pub fn goal_state(&self) -> VehicleState {
        VehicleState::from_degrees(self.goal[0], self.goal[1], self.goal[2])
    }

    /// Explicit parked vehicles followed by every row expansion.
    pub fn parked_vehicles(&self) -> Vec<ParkedVehicle> {
        let mut out = self.parked.clone();
        for row in &self.rows {
            out.extend(row.vehicles());
        }
        out
    }

    pub fn obstacle_count(&self) -> usize {
        self.obstacle_boxes.iter().map(|b| b.count).sum()
    }

    pub fn build_map(&self) -> StaticMap {
        build_boundary_points(&self.parked_vehicles(), self.bounds, StaticMap::DEFAULT_SPACING, 2.0)
    }

    fn invalid(&self, field: &'static str, message: impl Into<String>) -> ScenarioError {
        ScenarioError::Invalid {
            name: self.name.clone(),
            field,
            message: message.into(),
        }
    }

    pub fn validate(&self, geom: &VehicleGeometry) -> Result<(), ScenarioError> {
        let b = &self.bounds;
        if !(b.max_x > b.min_x && b.max_y > b.min_y) {
            return Err(self.invalid("bounds", "empty drivable area"));
        }
        if self.speed_range[0] > self.speed_range[1] {
            return Err(self.invalid("speed_range", "lower bound exceeds upper bound"));
        }
        if !(self.obstacle_radius >= 0.0) {
            return Err(self.invalid("obstacle_radius", "must be non-negative"));
        }
        for bx in &self.obstacle_boxes {
            if bx.x[0] > bx.x[1] || bx.y[0] > bx.y[1] {
                return Err(self.invalid("obstacle_boxes", "box bounds are reversed"));
            }
        }
        for row in &self.rows {
            if !(row.pitch > 0.0) {
                return Err(self.invalid("rows", "pitch must be positive"));
            }
        }
        let parked = self.parked_vehicles();
        let goal = self.goal_state();
        if parked.iter().any(|p| p.contains(&goal.position()) || p.contains(&geom.footprint_center(&goal))) {
            return Err(self.invalid("goal", "goal lies inside a parked vehicle"));
        }
        let map = self.build_map();
        for (field, state) in [("start", self.start_state()), ("goal", goal)] {
            if !b.contains(&state.position()) {
                return Err(self.invalid(field, "outside the bounds"));
            }
            let worst = map
                .points()
                .iter()
                .map(|p| clearance(&state, geom, p).value())
                .fold(f64::INFINITY, f64::min);
            if worst < geom.safety_margin {
                return Err(self.invalid(
                    field,
                    format!("in collision with the static map (clearance {worst:.3} m)"),
                ));
            }
        }
        Ok(())
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
    Scenario::from_json(&text, name)
}
