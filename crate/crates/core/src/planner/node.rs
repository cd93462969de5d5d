use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

use crate::dynamics::ControlInput;
use crate::geometry::{Point2, VehicleState};
use crate::reeds_shepp::Gear;

/// Discrete vertex identity: position cell, heading bin and time bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeKey {
    pub xi: i32,
    pub yi: i32,
    pub hi: i32,
    pub ti: i32,
}

impl NodeKey {
    pub fn from_state(state: &VehicleState, t: f64, xy_res: f64, heading_res: f64, time_bucket: f64) -> Self {
        let bins = (2.0 * PI / heading_res).round() as i32;
        let hi = (((state.theta + PI) / heading_res).floor() as i32).rem_euclid(bins.max(1));
        Self {
            xi: (state.x / xy_res).floor() as i32,
            yi: (state.y / xy_res).floor() as i32,
            hi,
            ti: if time_bucket > 0.0 {
                ((t + 1e-9) / time_bucket).floor() as i32
            } else {
                0
            },
        }
    }
}

impl fmt::Display for NodeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}:{}", self.xi, self.yi, self.hi, self.ti)
    }
}

/// Search node. `tau` and `tau_o` cover the primitive from the parent
/// state (index 0) to this node's state (last index).
#[derive(Debug, Clone)]
pub struct Node {
    pub x: VehicleState,
    pub t: f64,
    pub parent: Option<usize>,
    pub tau: Vec<VehicleState>,
    /// Obstacle positions aligned with `tau`, one entry per obstacle.
    pub tau_o: Vec<Vec<Point2>>,
    pub c_g: f64,
    pub c_h: f64,
    pub control: Option<ControlInput>,
    pub key: NodeKey,
    /// Gear and steering of the last moving primitive on the chain.
    pub last_gear: Option<Gear>,
    pub last_delta: Option<f64>,
}

impl Node {
    pub fn f(&self) -> f64 {
        self.c_g + self.c_h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathOutcome {
    ReachedGoal,
    Stationary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub time: f64,
    pub state: VehicleState,
    /// Control held from this sample to the next; `None` on the last one.
    pub control: Option<ControlInput>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedPath {
    pub samples: Vec<PathSample>,
    pub outcome: PathOutcome,
}

impl TimedPath {
    pub fn stationary(x0: VehicleState) -> Self {
        Self {
            samples: vec![PathSample {
                time: 0.0,
                state: x0,
                control: None,
            }],
            outcome: PathOutcome::Stationary,
        }
    }

    pub fn is_stationary(&self) -> bool {
        self.outcome == PathOutcome::Stationary
    }

    pub fn duration(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.time - a.time,
            _ => 0.0,
        }
    }

    pub fn first_state(&self) -> VehicleState {
        self.samples[0].state
    }

    pub fn last_state(&self) -> VehicleState {
        self.samples[self.samples.len() - 1].state
    }

    pub fn length(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| w[0].state.distance(&w[1].state))
            .sum()
    }

    /// Fixed-format text, one sample per line; byte-identical for identical
    /// paths.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,x,y,theta,v,delta\n");
        for s in &self.samples {
            let (v, d) = s.control.map_or((String::new(), String::new()), |u| {
                (format!("{:.9}", u.v), format!("{:.9}", u.delta))
            });
            out.push_str(&format!(
                "{:.3},{:.9},{:.9},{:.9},{},{}\n",
                s.time, s.state.x, s.state.y, s.state.theta, v, d
            ));
        }
        out
    }
}

/// One popped node, for debugging and ordering checks.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub key: NodeKey,
    pub c_g: f64,
    pub c_h: f64,
    pub parent: Option<NodeKey>,
}

impl TraceRecord {
    pub fn to_line(&self) -> String {
        let parent = self.parent.map_or_else(|| "-".to_string(), |k| k.to_string());
        format!("{} {:.6} {:.6} {}", self.key, self.c_g, self.c_h, parent)
    }
}
