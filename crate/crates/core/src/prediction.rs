//! Constant-velocity prediction of dynamic obstacles.

use serde::{Deserialize, Serialize};

use crate::geometry::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicObstacle {
    /// Position at `t = 0`.
    pub p0: Point2,
    pub velocity: Point2,
    pub radius: f64,
}

impl DynamicObstacle {
    pub fn new(p0: Point2, velocity: Point2, radius: f64) -> Self {
        Self { p0, velocity, radius }
    }

    /// Unbounded straight-line motion; the ground truth used by the
    /// simulator.
    pub fn position_at(&self, t: f64) -> Point2 {
        Point2::new(self.p0.x + self.velocity.x * t, self.p0.y + self.velocity.y * t)
    }

    pub fn speed(&self) -> f64 {
        self.velocity.x.hypot(self.velocity.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub obstacles: Vec<DynamicObstacle>,
    /// Positions are frozen after this many seconds.
    pub horizon: f64,
}

impl Default for PredictionSet {
    fn default() -> Self {
        Self::empty()
    }
}

impl PredictionSet {
    pub const DEFAULT_HORIZON: f64 = 120.0;

    pub fn new(obstacles: Vec<DynamicObstacle>, horizon: f64) -> Self {
        assert!(horizon > 0.0, "prediction horizon must be positive");
        Self { obstacles, horizon }
    }

    pub fn empty() -> Self {
        Self::new(Vec::new(), Self::DEFAULT_HORIZON)
    }

    pub fn is_empty(&self) -> bool {
        self.obstacles.is_empty()
    }

    pub fn predict(&self, obs: &DynamicObstacle, t: f64) -> Point2 {
        obs.position_at(t.clamp(0.0, self.horizon))
    }

    pub fn predict_all(&self, t: f64) -> Vec<Point2> {
        self.obstacles.iter().map(|o| self.predict(o, t)).collect()
    }

    pub fn max_radius(&self) -> f64 {
        self.obstacles.iter().map(|o| o.radius).fold(0.0, f64::max)
    }

    pub fn max_speed(&self) -> f64 {
        self.obstacles.iter().map(|o| o.speed()).fold(0.0, f64::max)
    }

    /// Re-anchors every obstacle at `t` so the returned set starts at time
    /// zero from the current positions.
    pub fn snapshot(&self, t: f64) -> PredictionSet {
        PredictionSet::new(
            self.obstacles
                .iter()
                .map(|o| DynamicObstacle::new(o.position_at(t), o.velocity, o.radius))
                .collect(),
            self.horizon,
        )
    }
}
