//! Time-indexed Hybrid A*.
//!
//! Nodes carry a continuous pose and a time stamp. Each expansion applies
//! every motion primitive for one horizon, rolls out the obstacle
//! predictions over the same window and keeps the child only if every
//! sampled pose clears both static points and the predicted obstacle
//! positions at that instant. Close to the goal a Reeds-Shepp shot is tried,
//! also checked against the predictions at the times the car would drive it.

mod cost;
mod node;
mod queue;

use std::collections::HashSet;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use cost::{accumulate_cost, rs_path_cost, step_cost, CostWeights};
pub use node::{Node, NodeKey, PathOutcome, PathSample, TimedPath, TraceRecord};
pub use queue::CostQueue;

use crate::dynamics::{self, ControlInput, PrimitiveConfig};
use crate::geometry::{angle_diff, clearance, VehicleGeometry, VehicleState};
use crate::heuristic::{h_astar, h_euclid, CostField};
use crate::prediction::PredictionSet;
use crate::reeds_shepp::{self, Gear, Steer};
use crate::world::StaticMap;

/// Upper bound on obstacle speed used to size the default sampling guard:
/// each axis is drawn from [-0.7, 0.7] m/s.
pub const OBSTACLE_SPEED_BOUND: f64 = 0.7 * std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    pub geometry: VehicleGeometry,
    pub primitives: PrimitiveConfig,
    pub weights: CostWeights,
    /// Position cell edge, meters.
    pub xy_resolution: f64,
    /// Heading bin width, radians.
    pub heading_resolution: f64,
    /// Time bucket width, seconds. Zero disables time indexing.
    pub time_bucket: f64,
    /// Reeds-Shepp shots are attempted when `c_h` is below this.
    pub h_thresh: f64,
    pub goal_tolerance_pos: f64,
    pub goal_tolerance_heading: f64,
    /// Extra margin on static points covering motion between samples.
    pub static_guard: f64,
    /// Extra margin on dynamic obstacles covering motion between samples.
    pub dynamic_guard: f64,
    pub record_trace: bool,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self::new(VehicleGeometry::default(), PrimitiveConfig::default())
    }
}

impl PlannerConfig {
    pub fn new(geometry: VehicleGeometry, primitives: PrimitiveConfig) -> Self {
        let (static_guard, dynamic_guard) = sampling_guards(&geometry, &primitives, OBSTACLE_SPEED_BOUND);
        Self {
            geometry,
            primitives,
            weights: CostWeights::default(),
            xy_resolution: 2.0,
            heading_resolution: 20f64.to_radians(),
            time_bucket: primitives.horizon,
            h_thresh: 15.0,
            goal_tolerance_pos: 0.1,
            goal_tolerance_heading: 1f64.to_radians(),
            static_guard,
            dynamic_guard,
            record_trace: false,
        }
    }

    pub fn min_turn_radius(&self) -> f64 {
        self.primitives.min_turn_radius(self.geometry.wheelbase)
    }
}

/// Margins that keep the continuous-time clearance at or above `d` when it is
/// only enforced at samples `dt` apart. Clearance is 1-Lipschitz in the point
/// position relative to the body, so between two samples it can dip by at
/// most half a step times the fastest relative speed of any point that can
/// come within the margin.
pub fn sampling_guards(geom: &VehicleGeometry, prim: &PrimitiveConfig, obstacle_speed: f64) -> (f64, f64) {
    let d = geom.safety_margin;
    let front = geom.length - geom.rear_overhang + d;
    let rear = geom.rear_overhang + d;
    let side = geom.half_width() + d;
    let reach = front.max(rear).hypot(side);
    let curvature = prim.delta_max.tan() / geom.wheelbase;
    let body_speed = prim.v_max * (1.0 + (curvature * reach).powi(2)).sqrt();
    let half = 0.5 * prim.dt;
    (half * body_speed, half * (body_speed + obstacle_speed))
}

/// Cost-to-go used for queue ordering.
#[derive(Debug, Clone, Copy)]
pub enum Heuristic<'a> {
    Euclidean,
    /// Grid field combined with the Euclidean distance by `max`.
    Grid(&'a CostField),
}

impl Heuristic<'_> {
    pub fn eval(&self, s: &VehicleState, goal: &VehicleState) -> f64 {
        match self {
            Heuristic::Euclidean => h_euclid(s, goal),
            Heuristic::Grid(field) => h_astar(field, s).max(h_euclid(s, goal)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error("start state ({x:.3}, {y:.3}) is in collision")]
    StartInCollision { x: f64, y: f64 },
    #[error("invalid planner configuration: {0}")]
    InvalidConfig(String),
}

/// How a successful search terminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    GoalTest,
    ReedsShepp,
    IterationLimit,
    Exhausted,
}

#[derive(Debug, Clone)]
pub struct PlanOutput {
    pub path: TimedPath,
    pub iterations: usize,
    pub nodes_created: usize,
    pub termination: Termination,
    pub runtime: Duration,
    pub trace: Vec<TraceRecord>,
}

/// Collision rules as applied during search, margins include the guards.
#[derive(Clone, Copy)]
struct Checker<'a> {
    geom: &'a VehicleGeometry,
    map: &'a StaticMap,
    preds: &'a PredictionSet,
    static_margin: f64,
    dynamic_margin: f64,
    reach: f64,
}

impl<'a> Checker<'a> {
    fn new(cfg: &'a PlannerConfig, map: &'a StaticMap, preds: &'a PredictionSet) -> Self {
        Self::with_guards(cfg, map, preds, cfg.static_guard, cfg.dynamic_guard)
    }

    fn with_guards(
        cfg: &'a PlannerConfig,
        map: &'a StaticMap,
        preds: &'a PredictionSet,
        static_guard: f64,
        dynamic_guard: f64,
    ) -> Self {
        let static_margin = cfg.geometry.safety_margin + static_guard;
        Self {
            geom: &cfg.geometry,
            map,
            preds,
            static_margin,
            dynamic_margin: cfg.geometry.safety_margin + dynamic_guard,
            reach: cfg.geometry.reach_radius(static_margin),
        }
    }

    fn static_free(&self, s: &VehicleState) -> bool {
        let center = self.geom.footprint_center(s);
        self.map.for_each_near(&center, self.reach, |p| {
            clearance(s, self.geom, p).satisfies(self.static_margin)
        })
    }

    fn dynamic_free(&self, s: &VehicleState, t: f64) -> bool {
        self.preds.obstacles.iter().all(|o| {
            let p = self.preds.predict(o, t);
            clearance(s, self.geom, &p).satisfies(self.dynamic_margin + o.radius)
        })
    }

    fn free(&self, s: &VehicleState, t: f64) -> bool {
        self.dynamic_free(s, t) && self.static_free(s)
    }
}

fn root_node(x0: &VehicleState, e: &VehicleState, preds: &PredictionSet, h: &Heuristic, cfg: &PlannerConfig) -> Node {
    Node {
        x: *x0,
        t: 0.0,
        parent: None,
        tau: vec![*x0],
        tau_o: vec![preds.predict_all(0.0)],
        c_g: 0.0,
        c_h: h.eval(x0, e),
        control: None,
        key: NodeKey::from_state(x0, 0.0, cfg.xy_resolution, cfg.heading_resolution, cfg.time_bucket),
        last_gear: None,
        last_delta: None,
    }
}

/// Children of `n` under every primitive and every collision-free rollout.
#[allow(clippy::too_many_arguments)]
pub fn expand_neighbors(
    n: &Node,
    parent_index: usize,
    primitives: &[ControlInput],
    e: &VehicleState,
    map: &StaticMap,
    preds: &PredictionSet,
    h: &Heuristic,
    cfg: &PlannerConfig,
) -> Vec<Node> {
    let checker = Checker::new(cfg, map, preds);
    let prim = &cfg.primitives;
    let steps = prim.steps();
    let mut out = Vec::with_capacity(primitives.len());
    'prim: for u in primitives {
        let tau = dynamics::integrate(&n.x, u, prim.horizon, prim.dt, cfg.geometry.wheelbase);
        let mut tau_o = Vec::with_capacity(steps + 1);
        tau_o.push(n.tau_o.last().cloned().unwrap_or_default());
        // Sample 0 is the parent state, already validated.
        for (k, s) in tau.iter().enumerate().skip(1) {
            let t = n.t + k as f64 * prim.dt;
            let moving = !u.is_wait();
            if !checker.dynamic_free(s, t) || (moving && !checker.static_free(s)) {
                continue 'prim;
            }
            tau_o.push(preds.predict_all(t));
        }
        let x = *tau.last().unwrap();
        let t = n.t + prim.horizon;
        let distance = u.v.abs() * prim.horizon;
        let c_g = accumulate_cost(n.c_g, u, distance, prim.horizon, n.last_gear, n.last_delta, &cfg.weights);
        let (last_gear, last_delta) = if u.is_wait() {
            (n.last_gear, n.last_delta)
        } else {
            (Some(if u.v > 0.0 { Gear::Forward } else { Gear::Backward }), Some(u.delta))
        };
        out.push(Node {
            x,
            t,
            parent: Some(parent_index),
            key: NodeKey::from_state(&x, t, cfg.xy_resolution, cfg.heading_resolution, cfg.time_bucket),
            tau,
            tau_o,
            c_g,
            c_h: h.eval(&x, e),
            control: Some(*u),
            last_gear,
            last_delta,
        });
    }
    out
}

/// A collision-free trajectory from a node to the goal, one sample per `dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Shot {
    pub states: Vec<VehicleState>,
    /// Control for each hop; `states.len() - 1` entries.
    pub controls: Vec<ControlInput>,
}

/// Tries every Reeds-Shepp path from `n` to `e` in order of accumulated cost
/// and returns the first one that is free over time.
///
/// Each sampled step is driven in exactly one `dt` at speed
/// `step_length / dt <= v_max`, so a segment whose length is not a multiple
/// of `v_max * dt` is traversed slightly slower than `v_max`.
pub fn try_rs_shot(n: &Node, e: &VehicleState, map: &StaticMap, preds: &PredictionSet, cfg: &PlannerConfig) -> Option<Shot> {
    let checker = Checker::new(cfg, map, preds);
    let prim = &cfg.primitives;
    let radius = cfg.min_turn_radius();
    let mut paths: Vec<(f64, reeds_shepp::RsPath)> = reeds_shepp::solve_all(&n.x, e, radius)
        .into_iter()
        .map(|p| (rs_path_cost(&p, prim.delta_max, n.last_gear, n.last_delta, &cfg.weights), p))
        .collect();
    paths.sort_by(|a, b| a.0.total_cmp(&b.0));
    let spacing = prim.v_max * prim.dt;
    'path: for (_, path) in &paths {
        let (states, steps) = reeds_shepp::sample_steps(path, &n.x, spacing);
        for (k, s) in states.iter().enumerate().skip(1) {
            if !checker.free(s, n.t + k as f64 * prim.dt) {
                continue 'path;
            }
        }
        let controls = steps
            .iter()
            .map(|st| {
                let sign = if st.gear == Gear::Forward { 1.0 } else { -1.0 };
                let delta = match st.steer {
                    Steer::Left => prim.delta_max,
                    Steer::Right => -prim.delta_max,
                    Steer::Straight => 0.0,
                };
                ControlInput::new(sign * st.length / prim.dt, delta)
            })
            .collect();
        return Some(Shot { states, controls });
    }
    None
}

/// Concatenates the parent chain's trajectories and the optional shot into
/// a path sampled every `dt` from time zero.
pub fn backtrack(nodes: &[Node], goal: usize, shot: Option<&Shot>, dt: f64) -> TimedPath {
    let mut chain = vec![goal];
    while let Some(p) = nodes[*chain.last().unwrap()].parent {
        chain.push(p);
    }
    chain.reverse();

    let mut states = vec![nodes[chain[0]].x];
    let mut controls: Vec<ControlInput> = Vec::new();
    for &i in &chain[1..] {
        let n = &nodes[i];
        let u = n.control.expect("non-root nodes carry a control");
        for s in &n.tau[1..] {
            states.push(*s);
            controls.push(u);
        }
    }
    if let Some(shot) = shot {
        states.extend_from_slice(&shot.states[1..]);
        controls.extend_from_slice(&shot.controls);
    }
    let samples = states
        .iter()
        .enumerate()
        .map(|(i, s)| PathSample {
            time: i as f64 * dt,
            state: *s,
            control: controls.get(i).copied(),
        })
        .collect();
    TimedPath {
        samples,
        outcome: PathOutcome::ReachedGoal,
    }
}

/// Whether a rollout sampled every `dt` from time `t0` passes the search's
/// collision rules. Sample 0 is skipped, as it is during expansion.
pub fn rollout_free(
    states: &[VehicleState],
    t0: f64,
    moving: bool,
    map: &StaticMap,
    preds: &PredictionSet,
    cfg: &PlannerConfig,
) -> bool {
    let checker = Checker::new(cfg, map, preds);
    let dt = cfg.primitives.dt;
    states.iter().enumerate().skip(1).all(|(k, s)| {
        let t = t0 + k as f64 * dt;
        checker.dynamic_free(s, t) && (!moving || checker.static_free(s))
    })
}

fn at_goal(x: &VehicleState, e: &VehicleState, cfg: &PlannerConfig) -> bool {
    x.distance(e) <= cfg.goal_tolerance_pos && angle_diff(x.theta, e.theta).abs() <= cfg.goal_tolerance_heading
}

/// Runs the search from `x0` to `e` with at most `max_iterations` pops.
/// Exhausting the budget or the queue returns the stationary path `[x0]`.
pub fn plan(
    x0: &VehicleState,
    e: &VehicleState,
    map: &StaticMap,
    preds: &PredictionSet,
    heuristic: &Heuristic,
    max_iterations: usize,
    cfg: &PlannerConfig,
) -> Result<PlanOutput, PlanError> {
    let started = Instant::now();
    cfg.geometry
        .validate()
        .map_err(|err| PlanError::InvalidConfig(err.to_string()))?;
    if !(cfg.primitives.dt > 0.0) || cfg.primitives.steps() == 0 {
        return Err(PlanError::InvalidConfig("primitive horizon and dt must be positive".into()));
    }
    // The start is a single instant, so it only needs the plain margin.
    if !Checker::with_guards(cfg, map, preds, 0.0, 0.0).free(x0, 0.0) {
        return Err(PlanError::StartInCollision { x: x0.x, y: x0.y });
    }

    let primitives = dynamics::primitive_set(&cfg.primitives);
    let time_cap = if cfg.time_bucket > 0.0 {
        (preds.horizon / cfg.primitives.horizon + 1e-9).floor() as usize
    } else {
        usize::MAX
    };

    let mut nodes = vec![root_node(x0, e, preds, heuristic, cfg)];
    let mut queue = CostQueue::new();
    let mut closed: HashSet<NodeKey> = HashSet::new();
    let mut trace = Vec::new();
    queue.offer(nodes[0].key, nodes[0].f(), nodes[0].c_h, 0);

    let mut iterations = 0;
    let finish = |path: TimedPath, iterations, nodes_created, termination, trace| PlanOutput {
        path,
        iterations,
        nodes_created,
        termination,
        runtime: started.elapsed(),
        trace,
    };

    while iterations < max_iterations {
        let Some((key, idx, _)) = queue.pop() else {
            return Ok(finish(TimedPath::stationary(*x0), iterations, nodes.len(), Termination::Exhausted, trace));
        };
        iterations += 1;
        closed.insert(key);
        if cfg.record_trace {
            let n = &nodes[idx];
            trace.push(TraceRecord {
                key,
                c_g: n.c_g,
                c_h: n.c_h,
                parent: n.parent.map(|p| nodes[p].key),
            });
        }

        if at_goal(&nodes[idx].x, e, cfg) {
            let path = backtrack(&nodes, idx, None, cfg.primitives.dt);
            return Ok(finish(path, iterations, nodes.len(), Termination::GoalTest, trace));
        }
        if nodes[idx].c_h < cfg.h_thresh {
            if let Some(shot) = try_rs_shot(&nodes[idx], e, map, preds, cfg) {
                let path = backtrack(&nodes, idx, Some(&shot), cfg.primitives.dt);
                return Ok(finish(path, iterations, nodes.len(), Termination::ReedsShepp, trace));
            }
        }

        let step_index = (nodes[idx].t / cfg.primitives.horizon + 1e-9).floor() as usize;
        if step_index >= time_cap {
            continue;
        }
        let children = expand_neighbors(&nodes[idx], idx, &primitives, e, map, preds, heuristic, cfg);
        for child in children {
            if closed.contains(&child.key) {
                continue;
            }
            let f = child.f();
            if queue.cost_of(&child.key).is_some_and(|c| c <= f) {
                continue;
            }
            let child_index = nodes.len();
            let (ckey, ch) = (child.key, child.c_h);
            nodes.push(child);
            queue.offer(ckey, f, ch, child_index);
        }
    }
    Ok(finish(TimedPath::stationary(*x0), iterations, nodes.len(), Termination::IterationLimit, trace))
}
