#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Time-indexed Hybrid A* for parking among static and moving obstacles,
//! an online replanner with adaptive intermediate goals, and a simulation
//! harness for parking scenarios.

pub mod dynamics;
pub mod geometry;
pub mod heuristic;
pub mod online;
pub mod planner;
pub mod prediction;
pub mod reeds_shepp;
pub mod world;
pub mod harness;

pub use dynamics::{ControlInput, PrimitiveConfig};
pub use geometry::{Point2, VehicleGeometry, VehicleState};
pub use planner::{plan, Heuristic, PlannerConfig, TimedPath};
pub use prediction::{DynamicObstacle, PredictionSet};
pub use world::{Bounds, ParkedVehicle, StaticMap};
