//! Obstacle initializations for Monte-Carlo runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::scenario::{Mode, ObstacleBox, Scenario};
use crate::geometry::Point2;
use crate::prediction::DynamicObstacle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleCounts {
    /// Lattice points per obstacle box in single-plan scenarios.
    pub lattice_points: usize,
    /// Velocity draws per lattice combination.
    pub velocity_draws: usize,
    /// Position draws for online scenarios.
    pub experiments: usize,
    /// Velocity draws per online experiment.
    pub runs_per_experiment: usize,
}

impl SampleCounts {
    /// Small counts that keep a full suite within minutes.
    pub fn desk(obstacles: usize) -> Self {
        Self {
            lattice_points: if obstacles <= 1 { 25 } else { 6 },
            velocity_draws: 2,
            experiments: 5,
            runs_per_experiment: 4,
        }
    }

    /// Large counts for long offline runs.
    pub fn full(obstacles: usize) -> Self {
        Self {
            lattice_points: if obstacles <= 1 { 100 } else { 15 },
            velocity_draws: 50,
            experiments: 20,
            runs_per_experiment: 10,
        }
    }
}

/// One run's obstacle set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub run: usize,
    /// Position-set index: lattice combination or online experiment.
    pub group: usize,
    pub obstacles: Vec<DynamicObstacle>,
}

/// Factor `n` into columns and rows whose ratio is closest to the box
/// aspect ratio.
pub fn lattice_shape(n: usize, width: f64, height: f64) -> (usize, usize) {
    let aspect = (width / height).ln();
    (1..=n)
        .filter(|c| n.is_multiple_of(*c))
        .map(|c| (c, n / c))
        .min_by(|a, b| {
            let da = ((a.0 as f64 / a.1 as f64).ln() - aspect).abs();
            let db = ((b.0 as f64 / b.1 as f64).ln() - aspect).abs();
            da.total_cmp(&db)
        })
        .unwrap_or((1, 1))
}

/// Cell centers of an `n`-point regular lattice over the box.
pub fn lattice(bx: &ObstacleBox, n: usize) -> Vec<Point2> {
    let (w, h) = (bx.x[1] - bx.x[0], bx.y[1] - bx.y[0]);
    let (cols, rows) = lattice_shape(n, w, h);
    let mut out = Vec::with_capacity(n);
    for r in 0..rows {
        for c in 0..cols {
            out.push(Point2::new(
                bx.x[0] + (c as f64 + 0.5) * w / cols as f64,
                bx.y[0] + (r as f64 + 0.5) * h / rows as f64,
            ));
        }
    }
    out
}

/// Generator for run `run`; independent of how many runs precede it.
fn run_rng(seed: u64, run: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run as u64);
    rng
}

fn draw_velocity(rng: &mut ChaCha8Rng, range: [f64; 2]) -> Point2 {
    if range[0] == range[1] {
        return Point2::new(range[0], range[0]);
    }
    Point2::new(rng.random_range(range[0]..=range[1]), rng.random_range(range[0]..=range[1]))
}

fn expand_boxes(s: &Scenario) -> Vec<ObstacleBox> {
    s.obstacle_boxes
        .iter()
        .flat_map(|b| std::iter::repeat_n(*b, b.count))
        .collect()
}

pub fn sample_experiments(s: &Scenario, counts: &SampleCounts, seed: u64) -> Vec<Experiment> {
    let boxes = expand_boxes(s);
    match s.mode {
        Mode::OneTime => lattice_runs(s, &boxes, counts, seed),
        Mode::Online => random_runs(s, &boxes, counts, seed),
    }
}

fn lattice_runs(s: &Scenario, boxes: &[ObstacleBox], counts: &SampleCounts, seed: u64) -> Vec<Experiment> {
    let lattices: Vec<Vec<Point2>> = boxes.iter().map(|b| lattice(b, counts.lattice_points)).collect();
    // Cartesian product, first obstacle varying slowest.
    let mut combos: Vec<Vec<Point2>> = vec![Vec::new()];
    for pts in &lattices {
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                pts.iter().map(move |p| {
                    let mut v = prefix.clone();
                    v.push(*p);
                    v
                })
            })
            .collect();
    }
    let mut out = Vec::with_capacity(combos.len() * counts.velocity_draws);
    for (group, positions) in combos.iter().enumerate() {
        for _ in 0..counts.velocity_draws {
            let run = out.len();
            let mut rng = run_rng(seed, run);
            let obstacles = positions
                .iter()
                .map(|p| DynamicObstacle::new(*p, draw_velocity(&mut rng, s.speed_range), s.obstacle_radius))
                .collect();
            out.push(Experiment { run, group, obstacles });
        }
    }
    out
}

fn random_runs(s: &Scenario, boxes: &[ObstacleBox], counts: &SampleCounts, seed: u64) -> Vec<Experiment> {
    let mut out = Vec::with_capacity(counts.experiments * counts.runs_per_experiment);
    for group in 0..counts.experiments {
        // Positions are keyed apart from the per-run velocity streams.
        let mut pos_rng = run_rng(seed ^ 0x9e37_79b9_7f4a_7c15, group);
        let positions: Vec<Point2> = boxes
            .iter()
            .map(|b| Point2::new(pos_rng.random_range(b.x[0]..=b.x[1]), pos_rng.random_range(b.y[0]..=b.y[1])))
            .collect();
        for _ in 0..counts.runs_per_experiment {
            let run = out.len();
            let mut rng = run_rng(seed, run);
            let obstacles = positions
                .iter()
                .map(|p| DynamicObstacle::new(*p, draw_velocity(&mut rng, s.speed_range), s.obstacle_radius))
                .collect();
            out.push(Experiment { run, group, obstacles });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        assert_eq!(lattice_shape(25, 15.0, 10.0), (5, 5));
        assert_eq!(lattice_shape(100, 15.0, 10.0), (10, 10));
        assert_eq!(lattice_shape(15, 13.0, 5.0), (5, 3));
        assert_eq!(lattice_shape(6, 13.0, 5.0), (3, 2));
    }

    #[test]
    fn two_obstacle_pairs() {
        let s = Scenario::bundled("perpendicular_reverse_in").unwrap();
        let counts = SampleCounts {
            lattice_points: 15,
            velocity_draws: 1,
            ..SampleCounts::desk(2)
        };
        let runs = sample_experiments(&s, &counts, 7);
        assert_eq!(runs.len(), 225);
        for r in &runs {
            for (o, b) in r.obstacles.iter().zip(&s.obstacle_boxes) {
                assert!(b.contains(&o.p0));
                assert!(o.velocity.x.abs() <= 0.7 && o.velocity.y.abs() <= 0.7);
            }
        }
    }

    #[test]
    fn seeded_draws_repeat() {
        let s = Scenario::bundled("surface_lot").unwrap();
        let c = SampleCounts::desk(15);
        assert_eq!(sample_experiments(&s, &c, 3), sample_experiments(&s, &c, 3));
        assert_ne!(sample_experiments(&s, &c, 3), sample_experiments(&s, &c, 4));
    }
}
