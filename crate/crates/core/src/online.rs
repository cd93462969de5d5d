//! Closed-loop replanning along a static global path.
//!
//! A global path from start to goal is planned once against the static map.
//! At every replan the vehicle picks the global-path point closest to it,
//! looks `lookahead` points further and plans a local path there. When that
//! fails the look-ahead shrinks one point at a time; if every attempt fails
//! the vehicle holds its position for one execution period.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate, primitive_set, ControlInput};
use crate::geometry::{angle_diff, clearance, verify_path, VehicleState};
use crate::heuristic::{field_on_grid, CostField, FreeGrid};
use crate::planner::{plan, rollout_free, Heuristic, PathOutcome, PathSample, PlanError, PlannerConfig, TimedPath};
use crate::prediction::PredictionSet;
use crate::world::StaticMap;

/// Maximum distance between consecutive indexed global-path states.
pub const GLOBAL_SPACING: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalPath {
    /// Indexed states, first the start and last the goal.
    pub states: Vec<VehicleState>,
    /// The full-resolution planner output the states were taken from.
    pub source: TimedPath,
}

impl GlobalPath {
    pub fn last_index(&self) -> usize {
        self.states.len() - 1
    }

    /// Largest planar distance between consecutive indexed states.
    pub fn max_spacing(&self) -> f64 {
        self.states
            .windows(2)
            .map(|w| w[0].distance(&w[1]))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OnlineError {
    #[error("no static global path found within {0} iterations")]
    NoGlobalPath(usize),
    #[error(transparent)]
    Plan(#[from] PlanError),
}

/// Keeps a state whenever the arc length since the last kept state would
/// exceed `spacing` at the next sample; the goal is always kept.
pub fn decimate(path: &TimedPath, goal: &VehicleState, spacing: f64) -> Vec<VehicleState> {
    let samples = &path.samples;
    let mut out = vec![samples[0].state];
    let mut run = 0.0;
    for i in 1..samples.len() {
        let step = samples[i - 1].state.distance(&samples[i].state);
        run += step;
        let next = samples.get(i + 1).map_or(f64::INFINITY, |n| samples[i].state.distance(&n.state));
        if run > 0.0 && run + next > spacing + 1e-9 {
            out.push(samples[i].state);
            run = 0.0;
        }
    }
    let last = out.len() - 1;
    if last > 0 && out[last].distance(goal) < 1e-9 {
        out[last] = *goal;
    } else if out[last] != *goal {
        // The search stops within tolerance of the goal; the remaining gap
        // is below the tolerance and so below the spacing.
        out.push(*goal);
    }
    out
}

/// Static-only plan from `x0` to `g` using the grid heuristic.
pub fn plan_global(
    x0: &VehicleState,
    g: &VehicleState,
    map: &StaticMap,
    field: &CostField,
    max_iterations: usize,
    cfg: &PlannerConfig,
) -> Result<GlobalPath, OnlineError> {
    let out = plan(x0, g, map, &PredictionSet::empty(), &Heuristic::Grid(field), max_iterations, cfg)?;
    if out.path.is_stationary() {
        return Err(OnlineError::NoGlobalPath(max_iterations));
    }
    Ok(GlobalPath {
        states: decimate(&out.path, g, GLOBAL_SPACING),
        source: out.path,
    })
}

/// Index of the nearest global-path state; ties go to the later index.
pub fn closest_index(global: &GlobalPath, x: &VehicleState) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (i, s) in global.states.iter().enumerate() {
        let d = s.distance(x);
        if d <= best.0 {
            best = (d, i);
        }
    }
    best.1
}

/// Heuristic fields toward global-path states, built lazily on one shared
/// free-space grid. A goal whose cell is blocked falls back to the
/// Euclidean heuristic.
#[derive(Debug, Clone)]
pub struct FieldCache {
    grid: Option<Arc<FreeGrid>>,
    fields: HashMap<usize, Option<CostField>>,
}

impl FieldCache {
    pub fn new(grid: Arc<FreeGrid>) -> Self {
        Self {
            grid: Some(grid),
            fields: HashMap::new(),
        }
    }

    /// A cache that never builds fields, so every local plan uses the
    /// Euclidean heuristic.
    pub fn euclidean() -> Self {
        Self {
            grid: None,
            fields: HashMap::new(),
        }
    }

    pub fn field(&mut self, index: usize, goal: &VehicleState) -> Option<&CostField> {
        let grid = self.grid.as_ref()?;
        self.fields
            .entry(index)
            .or_insert_with(|| field_on_grid(grid.clone(), &goal.position()).ok())
            .as_ref()
    }
}

/// Outcome of one replanning step.
#[derive(Debug, Clone)]
pub struct LocalPlan {
    pub path: TimedPath,
    pub closest: usize,
    /// Index of the goal that produced `path`, `None` when stationary.
    pub goal_index: Option<usize>,
    pub attempts: usize,
    pub iterations: usize,
    pub runtime: Duration,
}

/// Searches toward `G[min(i_c + lookahead, last)]`, shrinking the
/// look-ahead until a path is found or it reaches `i_c`.
#[allow(clippy::too_many_arguments)]
pub fn plan_local(
    x: &VehicleState,
    global: &GlobalPath,
    map: &StaticMap,
    preds: &PredictionSet,
    fields: &mut FieldCache,
    lookahead: usize,
    max_iterations: usize,
    cfg: &PlannerConfig,
) -> LocalPlan {
    let closest = closest_index(global, x);
    let mut goal_index = (closest + lookahead).min(global.last_index());
    let mut result = LocalPlan {
        path: TimedPath::stationary(*x),
        closest,
        goal_index: None,
        attempts: 0,
        iterations: 0,
        runtime: Duration::ZERO,
    };
    loop {
        let e = global.states[goal_index];
        let heuristic = match fields.field(goal_index, &e) {
            Some(f) => Heuristic::Grid(f),
            None => Heuristic::Euclidean,
        };
        result.attempts += 1;
        match plan(x, &e, map, preds, &heuristic, max_iterations, cfg) {
            Ok(out) => {
                result.iterations += out.iterations;
                result.runtime += out.runtime;
                if !out.path.is_stationary() {
                    result.path = out.path;
                    result.goal_index = Some(goal_index);
                    return result;
                }
            }
            // A start inside the guarded margin has no valid successor
            // toward any goal.
            Err(_) => return result,
        }
        if goal_index == closest {
            return result;
        }
        goal_index -= 1;
    }
}

/// Smallest predicted obstacle clearance, radius subtracted, along `states`
/// and then while parked at the last state until `hold_until`.
fn predicted_margin(states: &[VehicleState], hold_until: f64, preds: &PredictionSet, cfg: &PlannerConfig) -> f64 {
    let dt = cfg.primitives.dt;
    let last = states[states.len() - 1];
    let parked = ((hold_until / dt).round() as usize).max(states.len() - 1);
    (0..=parked)
        .map(|k| {
            let s = states.get(k).unwrap_or(&last);
            let t = k as f64 * dt;
            preds
                .obstacles
                .iter()
                .map(|o| clearance(s, &cfg.geometry, &preds.predict(o, t)).value() - o.radius)
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::INFINITY, f64::min)
}

/// The first move of the best two-step escape. Each step is a primitive cut
/// to `hops` samples and must be collision-free; a sequence is scored by its
/// smallest predicted clearance while moving and for one primitive horizon
/// after stopping. Returns `None` when waiting first scores best.
pub fn evasive_move(
    x: &VehicleState,
    hops: usize,
    map: &StaticMap,
    preds: &PredictionSet,
    cfg: &PlannerConfig,
) -> Option<(ControlInput, Vec<VehicleState>)> {
    let prim = &cfg.primitives;
    let duration = hops as f64 * prim.dt;
    let hold_until = 2.0 * duration + prim.horizon;
    let controls = primitive_set(prim);
    let step = |from: &VehicleState, u: &ControlInput, t0: f64| {
        let states = integrate(from, u, duration, prim.dt, cfg.geometry.wheelbase);
        rollout_free(&states, t0, !u.is_wait(), map, preds, cfg).then_some(states)
    };
    let mut best: Option<(f64, ControlInput, Vec<VehicleState>)> = None;
    for u1 in &controls {
        let Some(first) = step(x, u1, 0.0) else { continue };
        let score = controls
            .iter()
            .filter_map(|u2| step(&first[first.len() - 1], u2, duration))
            .map(|second| {
                let joined: Vec<VehicleState> = first.iter().chain(&second[1..]).copied().collect();
                predicted_margin(&joined, hold_until, preds, cfg)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        if best.as_ref().is_none_or(|b| score > b.0) {
            best = Some((score, *u1, first));
        }
    }
    best.filter(|(_, u, _)| !u.is_wait()).map(|(_, u, states)| (u, states))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    /// Seconds of each local path executed before replanning.
    pub exec_time: f64,
    pub max_time: f64,
    pub goal_tolerance_pos: f64,
    pub goal_tolerance_heading: f64,
    pub lookahead: usize,
    pub max_iterations: usize,
    pub global_iterations: usize,
    /// Time step of the independent collision re-check.
    pub check_step: f64,
    pub prediction_horizon: f64,
    /// When no local path exists and holding still is predicted to let an
    /// obstacle inside the margin, drive the safest truncated primitive
    /// instead of holding.
    pub evasive_fallback: bool,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            exec_time: 1.0,
            max_time: 200.0,
            goal_tolerance_pos: 0.2,
            goal_tolerance_heading: 5f64.to_radians(),
            lookahead: 5,
            max_iterations: 100,
            global_iterations: 50_000,
            check_step: 0.01,
            prediction_horizon: PredictionSet::DEFAULT_HORIZON,
            evasive_fallback: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EpisodeOutcome {
    ReachedGoal,
    Timeout,
    Collision,
}

impl fmt::Display for EpisodeOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EpisodeOutcome::ReachedGoal => "reached_goal",
            EpisodeOutcome::Timeout => "timeout",
            EpisodeOutcome::Collision => "collision",
        })
    }
}

/// One line of the episode log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplanRecord {
    pub time: f64,
    pub closest: usize,
    pub goal_index: Option<usize>,
    pub attempts: usize,
    pub iterations: usize,
    pub runtime: f64,
    pub evasive: bool,
}

impl ReplanRecord {
    pub fn to_line(&self) -> String {
        let goal = self.goal_index.map_or_else(|| "-".to_string(), |g| g.to_string());
        format!(
            "t={:.1} closest={} goal={} attempts={} iterations={} runtime={:.6}{}",
            self.time,
            self.closest,
            goal,
            self.attempts,
            self.iterations,
            self.runtime,
            if self.evasive { " evasive" } else { "" }
        )
    }
}

#[derive(Debug, Clone)]
pub struct EpisodeResult {
    /// Executed trajectory with absolute times.
    pub trajectory: TimedPath,
    pub outcome: EpisodeOutcome,
    pub replans: usize,
    pub per_replan_runtimes: Vec<f64>,
    pub log: Vec<ReplanRecord>,
    /// Time of the first flagged state when the outcome is a collision.
    pub collision_time: Option<f64>,
}

impl EpisodeResult {
    pub fn total_runtime(&self) -> f64 {
        self.per_replan_runtimes.iter().sum()
    }
}

fn within(x: &VehicleState, g: &VehicleState, cfg: &EpisodeConfig) -> bool {
    x.distance(g) <= cfg.goal_tolerance_pos && angle_diff(x.theta, g.theta).abs() <= cfg.goal_tolerance_heading
}

/// Simulates replanning from the global path start to its goal while the
/// obstacles move as `truth` says. Obstacle positions in `truth` are those
/// at episode time zero.
pub fn run_episode(
    global: &GlobalPath,
    map: &StaticMap,
    truth: &PredictionSet,
    fields: &mut FieldCache,
    planner: &PlannerConfig,
    cfg: &EpisodeConfig,
) -> EpisodeResult {
    let dt = planner.primitives.dt;
    let hops_per_exec = ((cfg.exec_time / dt).round() as usize).max(1);
    let goal = global.states[global.last_index()];
    let mut x = global.states[0];
    let mut samples = vec![PathSample {
        time: 0.0,
        state: x,
        control: None,
    }];
    let mut result = EpisodeResult {
        trajectory: TimedPath::stationary(x),
        outcome: EpisodeOutcome::Timeout,
        replans: 0,
        per_replan_runtimes: Vec::new(),
        log: Vec::new(),
        collision_time: None,
    };
    // Replan times are accumulated as integer tick counts.
    let mut tick = 0usize;
    let max_ticks = (cfg.max_time / dt).round() as usize;

    while tick < max_ticks {
        if within(&x, &goal, cfg) {
            result.outcome = EpisodeOutcome::ReachedGoal;
            break;
        }
        let t = tick as f64 * dt;
        let preds = PredictionSet::new(truth.snapshot(t).obstacles, cfg.prediction_horizon);
        let local = plan_local(&x, global, map, &preds, fields, cfg.lookahead, cfg.max_iterations, planner);
        let hops = local.path.samples.len() - 1;
        let mut evasive = false;
        let (segment, end): (Vec<(VehicleState, ControlInput)>, VehicleState) = if local.path.is_stationary() || hops == 0 {
            // Holding must stay clear for one horizon past the next replan.
            let hold = vec![x; hops_per_exec + planner.primitives.steps() + 1];
            let escape = if cfg.evasive_fallback && !rollout_free(&hold, 0.0, false, map, &preds, planner) {
                evasive_move(&x, hops_per_exec, map, &preds, planner)
            } else {
                None
            };
            match escape {
                Some((u, states)) => {
                    evasive = true;
                    let end = states[states.len() - 1];
                    (states[..hops_per_exec].iter().map(|s| (*s, u)).collect(), end)
                }
                None => (vec![(x, ControlInput::WAIT); hops_per_exec], x),
            }
        } else {
            let n = hops.min(hops_per_exec);
            (
                local.path.samples[..n]
                    .iter()
                    .map(|s| (s.state, s.control.expect("interior samples carry a control")))
                    .collect(),
                local.path.samples[n].state,
            )
        };
        result.replans += 1;
        result.per_replan_runtimes.push(local.runtime.as_secs_f64());
        result.log.push(ReplanRecord {
            time: t,
            closest: local.closest,
            goal_index: local.goal_index,
            attempts: local.attempts,
            iterations: local.iterations,
            runtime: local.runtime.as_secs_f64(),
            evasive,
        });

        // Independent re-check of this segment against the true motion.
        let mut piece: Vec<PathSample> = segment
            .iter()
            .enumerate()
            .map(|(k, (s, u))| PathSample {
                time: (tick + k) as f64 * dt,
                state: *s,
                control: Some(*u),
            })
            .collect();
        piece.push(PathSample {
            time: (tick + segment.len()) as f64 * dt,
            state: end,
            control: None,
        });
        let check = TimedPath {
            samples: piece.clone(),
            outcome: PathOutcome::ReachedGoal,
        };
        let report = verify_path(&check, &planner.geometry, map, truth, cfg.check_step);

        let last = samples.len() - 1;
        samples[last].control = piece[0].control;
        samples.extend_from_slice(&piece[1..]);
        tick += segment.len();
        x = end;

        if !report.is_safe() {
            result.outcome = EpisodeOutcome::Collision;
            result.collision_time = report.first_violation_time;
            break;
        }
    }
    if result.outcome == EpisodeOutcome::Timeout && within(&x, &goal, cfg) {
        result.outcome = EpisodeOutcome::ReachedGoal;
    }
    result.trajectory = TimedPath {
        samples,
        outcome: if result.outcome == EpisodeOutcome::ReachedGoal {
            PathOutcome::ReachedGoal
        } else {
            PathOutcome::Stationary
        },
    };
    result
}
