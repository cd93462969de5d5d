//! Trajectory quality metrics and their aggregation over runs.

use serde::{Deserialize, Serialize};

use crate::geometry::{angle_diff, clearance, path_min_clearance, VehicleGeometry};
use crate::planner::TimedPath;
use crate::prediction::PredictionSet;
use crate::world::StaticMap;

/// Hops shorter than this count as standing still.
pub const MOVING_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TrajectoryMetrics {
    pub length: f64,
    pub min_clearance: f64,
    /// Smallest clearance to the moving obstacles alone, radius subtracted.
    pub obstacle_clearance: f64,
    /// Mean absolute heading change per second over all hops, deg/s.
    pub heading_rate: f64,
    /// Mean `|dtheta| / ds` over moving hops, 1/m.
    pub curvature: f64,
}

pub fn trajectory_metrics(
    path: &TimedPath,
    geom: &VehicleGeometry,
    map: &StaticMap,
    truth: &PredictionSet,
) -> TrajectoryMetrics {
    let mut length = 0.0;
    let mut rate_sum = 0.0;
    let mut hops = 0usize;
    let mut curv_sum = 0.0;
    let mut moving = 0usize;
    for w in path.samples.windows(2) {
        let ds = w[0].state.distance(&w[1].state);
        let dth = angle_diff(w[1].state.theta, w[0].state.theta).abs();
        let dt = w[1].time - w[0].time;
        length += ds;
        if dt > 0.0 {
            rate_sum += dth.to_degrees() / dt;
            hops += 1;
        }
        if ds > MOVING_EPS {
            curv_sum += dth / ds;
            moving += 1;
        }
    }
    TrajectoryMetrics {
        length,
        min_clearance: path_min_clearance(path, geom, map, truth),
        obstacle_clearance: obstacle_clearance(path, geom, truth),
        heading_rate: if hops > 0 { rate_sum / hops as f64 } else { 0.0 },
        curvature: if moving > 0 { curv_sum / moving as f64 } else { 0.0 },
    }
}

pub fn obstacle_clearance(path: &TimedPath, geom: &VehicleGeometry, truth: &PredictionSet) -> f64 {
    path.samples
        .iter()
        .flat_map(|s| {
            truth
                .obstacles
                .iter()
                .map(move |o| clearance(&s.state, geom, &truth.predict(o, s.time)).value() - o.radius)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Sample mean and standard deviation (n - 1 denominator, zero below two
/// values).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, ControlInput};
    use crate::geometry::VehicleState;
    use crate::planner::{PathOutcome, PathSample};
    use crate::world::{build_boundary_points, Bounds};

    fn path_of(states: Vec<VehicleState>) -> TimedPath {
        TimedPath {
            samples: states
                .into_iter()
                .enumerate()
                .map(|(i, s)| PathSample {
                    time: i as f64 * 0.1,
                    state: s,
                    control: None,
                })
                .collect(),
            outcome: PathOutcome::ReachedGoal,
        }
    }

    fn far_map() -> StaticMap {
        build_boundary_points(&[], Bounds::new(-50.0, -50.0, 50.0, 50.0), 1.0, 4.0)
    }

    #[test]
    fn straight_ten_meters() {
        let states = integrate(&VehicleState::default(), &ControlInput::new(1.0, 0.0), 10.0, 0.1, 3.0);
        let m = trajectory_metrics(&path_of(states), &VehicleGeometry::default(), &far_map(), &PredictionSet::empty());
        assert!((m.length - 10.0).abs() < 1e-9);
        assert_eq!(m.heading_rate, 0.0);
        assert_eq!(m.curvature, 0.0);
    }

    #[test]
    fn full_lock_curvature() {
        let u = ControlInput::new(1.0, 40f64.to_radians());
        let states = integrate(&VehicleState::default(), &u, 4.0, 0.1, 3.0);
        let m = trajectory_metrics(&path_of(states), &VehicleGeometry::default(), &far_map(), &PredictionSet::empty());
        // 1 / R with R = 3 / tan(40 deg)
        assert!((m.curvature - 0.2797).abs() < 1e-3, "{}", m.curvature);
        assert!((m.heading_rate - (1.0 / 3.5753f64).to_degrees()).abs() < 1e-2);
    }

    #[test]
    fn sd_of_constant_is_zero() {
        assert_eq!(mean_sd(&[2.0, 2.0, 2.0]), (2.0, 0.0));
        let (m, s) = mean_sd(&[1.0, 3.0]);
        assert!((m - 2.0).abs() < 1e-12 && (s - 2f64.sqrt()).abs() < 1e-12);
    }
}
