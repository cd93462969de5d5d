//! Reeds-Shepp paths: shortest paths for a car that drives forward and
//! backward with a bounded turning radius.
//!
//! The solver enumerates the classical word families (CSC, CCC, CCCC, CCSC,
//! CCSCC) under the time-flip and reflection symmetries, 48 curves in all,
//! and keeps every feasible candidate. Computation happens in the start
//! frame with unit turning radius and is scaled back afterwards.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::geometry::{normalize_angle, VehicleState};

const ZERO: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Steer {
    Left,
    Straight,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gear {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsSegment {
    pub steer: Steer,
    pub gear: Gear,
    /// Arc length in meters, always non-negative.
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RsPath {
    pub segments: Vec<RsSegment>,
    pub total_length: f64,
    pub min_turn_radius: f64,
}

impl RsPath {
    fn from_signed(word: &[Steer], lengths: &[f64], radius: f64) -> Self {
        let segments: Vec<RsSegment> = word
            .iter()
            .zip(lengths)
            .filter(|(_, l)| l.abs() > ZERO)
            .map(|(&steer, &l)| RsSegment {
                steer,
                gear: if l >= 0.0 { Gear::Forward } else { Gear::Backward },
                length: l.abs() * radius,
            })
            .collect();
        let total_length = segments.iter().map(|s| s.length).sum();
        Self {
            segments,
            total_length,
            min_turn_radius: radius,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn gear_switches(&self) -> usize {
        self.segments.windows(2).filter(|w| w[0].gear != w[1].gear).count()
    }
}

fn mod2pi(x: f64) -> f64 {
    let mut v = x % (2.0 * PI);
    if v < -PI {
        v += 2.0 * PI;
    } else if v > PI {
        v -= 2.0 * PI;
    }
    v
}

fn polar(x: f64, y: f64) -> (f64, f64) {
    (x.hypot(y), y.atan2(x))
}

fn tau_omega(u: f64, v: f64, xi: f64, eta: f64, phi: f64) -> (f64, f64) {
    let delta = mod2pi(u - v);
    let a = u.sin() - delta.sin();
    let b = u.cos() - delta.cos() - 1.0;
    let t1 = (eta * a - xi * b).atan2(xi * a + eta * b);
    let t2 = 2.0 * (delta.cos() - v.cos() - u.cos()) + 3.0;
    let tau = if t2 < 0.0 { mod2pi(t1 + PI) } else { mod2pi(t1) };
    let omega = mod2pi(tau - u + v - phi);
    (tau, omega)
}

// Each primitive word returns (t, u, v) in unit-radius arc lengths.

fn lp_sp_lp(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let (u, t) = polar(x - phi.sin(), y - 1.0 + phi.cos());
    if t >= -ZERO {
        let v = mod2pi(phi - t);
        if v >= -ZERO {
            return Some((t, u, v));
        }
    }
    None
}

fn lp_sp_rp(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let (u1, t1) = polar(x + phi.sin(), y - 1.0 - phi.cos());
    let u1 = u1 * u1;
    if u1 >= 4.0 {
        let u = (u1 - 4.0).sqrt();
        let theta = 2f64.atan2(u);
        let t = mod2pi(t1 + theta);
        let v = mod2pi(t - phi);
        if t >= -ZERO && v >= -ZERO {
            return Some((t, u, v));
        }
    }
    None
}

fn lp_rm_l(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let xi = x - phi.sin();
    let eta = y - 1.0 + phi.cos();
    let (u1, theta) = polar(xi, eta);
    if u1 <= 4.0 {
        let u = -2.0 * (0.25 * u1).asin();
        let t = mod2pi(theta + 0.5 * u + PI);
        let v = mod2pi(phi - t + u);
        if t >= -ZERO && u <= ZERO {
            return Some((t, u, v));
        }
    }
    None
}

fn lp_rup_lum_rm(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let xi = x + phi.sin();
    let eta = y - 1.0 - phi.cos();
    let rho = 0.25 * (2.0 + xi.hypot(eta));
    if rho <= 1.0 {
        let u = rho.acos();
        let (t, v) = tau_omega(u, -u, xi, eta, phi);
        if t >= -ZERO && v <= ZERO {
            return Some((t, u, v));
        }
    }
    None
}

fn lp_rum_lum_rp(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let xi = x + phi.sin();
    let eta = y - 1.0 - phi.cos();
    let rho = (20.0 - xi * xi - eta * eta) / 16.0;
    if (0.0..=1.0).contains(&rho) {
        let u = -rho.acos();
        if u >= -FRAC_PI_2 {
            let (t, v) = tau_omega(u, u, xi, eta, phi);
            if t >= -ZERO && v >= -ZERO {
                return Some((t, u, v));
            }
        }
    }
    None
}

fn lp_rm_sm_lm(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let xi = x - phi.sin();
    let eta = y - 1.0 + phi.cos();
    let (rho, theta) = polar(xi, eta);
    if rho >= 2.0 {
        let r = (rho * rho - 4.0).sqrt();
        let u = 2.0 - r;
        let t = mod2pi(theta + r.atan2(-2.0));
        let v = mod2pi(phi - FRAC_PI_2 - t);
        if t >= -ZERO && u <= ZERO && v <= ZERO {
            return Some((t, u, v));
        }
    }
    None
}

fn lp_rm_sm_rm(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let xi = x + phi.sin();
    let eta = y - 1.0 - phi.cos();
    let (rho, theta) = polar(-eta, xi);
    if rho >= 2.0 {
        let t = theta;
        let u = 2.0 - rho;
        let v = mod2pi(t + FRAC_PI_2 - phi);
        if t >= -ZERO && u <= ZERO && v <= ZERO {
            return Some((t, u, v));
        }
    }
    None
}

fn lp_rm_s_lm_rp(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let xi = x + phi.sin();
    let eta = y - 1.0 - phi.cos();
    let (rho, _) = polar(xi, eta);
    if rho >= 2.0 {
        let u = 4.0 - (rho * rho - 4.0).sqrt();
        if u <= ZERO {
            let t = mod2pi(((4.0 - u) * xi - 2.0 * eta).atan2(-2.0 * xi + (u - 4.0) * eta));
            let v = mod2pi(t - phi);
            if t >= -ZERO && v >= -ZERO {
                return Some((t, u, v));
            }
        }
    }
    None
}

use Steer::{Left as L, Right as R, Straight as S};

const LRL: [Steer; 3] = [L, R, L];
const RLR: [Steer; 3] = [R, L, R];
const LRLR: [Steer; 4] = [L, R, L, R];
const RLRL: [Steer; 4] = [R, L, R, L];
const LRSL: [Steer; 4] = [L, R, S, L];
const RLSR: [Steer; 4] = [R, L, S, R];
const LSRL: [Steer; 4] = [L, S, R, L];
const RSLR: [Steer; 4] = [R, S, L, R];
const LRSR: [Steer; 4] = [L, R, S, R];
const RLSL: [Steer; 4] = [R, L, S, L];
const RSRL: [Steer; 4] = [R, S, R, L];
const LSLR: [Steer; 4] = [L, S, L, R];
const LSR: [Steer; 3] = [L, S, R];
const RSL: [Steer; 3] = [R, S, L];
const LSL: [Steer; 3] = [L, S, L];
const RSR: [Steer; 3] = [R, S, R];
const LRSLR: [Steer; 5] = [L, R, S, L, R];
const RLSRL: [Steer; 5] = [R, L, S, R, L];

type Word = fn(f64, f64, f64) -> Option<(f64, f64, f64)>;

struct Collector {
    radius: f64,
    paths: Vec<RsPath>,
}

impl Collector {
    fn push(&mut self, word: &[Steer], lengths: &[f64]) {
        self.paths.push(RsPath::from_signed(word, lengths, self.radius));
    }

    /// Applies the identity, time-flip, reflection and combined symmetries
    /// to a base word. `build` maps (t, u, v) and a flip sign into the
    /// segment lengths of the emitted path.
    fn symmetric(
        &mut self,
        f: Word,
        (x, y, phi): (f64, f64, f64),
        word: &[Steer],
        reflected: &[Steer],
        build: impl Fn(f64, f64, f64, f64) -> Vec<f64>,
    ) {
        if let Some((t, u, v)) = f(x, y, phi) {
            self.push(word, &build(t, u, v, 1.0));
        }
        if let Some((t, u, v)) = f(-x, y, -phi) {
            self.push(word, &build(t, u, v, -1.0));
        }
        if let Some((t, u, v)) = f(x, -y, -phi) {
            self.push(reflected, &build(t, u, v, 1.0));
        }
        if let Some((t, u, v)) = f(-x, -y, phi) {
            self.push(reflected, &build(t, u, v, -1.0));
        }
    }
}

fn enumerate(x: f64, y: f64, phi: f64, radius: f64) -> Vec<RsPath> {
    let mut c = Collector {
        radius,
        paths: Vec::with_capacity(48),
    };
    let q = (x, y, phi);
    let back = (x * phi.cos() + y * phi.sin(), x * phi.sin() - y * phi.cos(), phi);

    // CSC
    c.symmetric(lp_sp_lp, q, &LSL, &RSR, |t, u, v, s| vec![s * t, s * u, s * v]);
    c.symmetric(lp_sp_rp, q, &LSR, &RSL, |t, u, v, s| vec![s * t, s * u, s * v]);

    // CCC, forwards and backwards
    c.symmetric(lp_rm_l, q, &LRL, &RLR, |t, u, v, s| vec![s * t, s * u, s * v]);
    c.symmetric(lp_rm_l, back, &LRL, &RLR, |t, u, v, s| vec![s * v, s * u, s * t]);

    // CCCC
    c.symmetric(lp_rup_lum_rm, q, &LRLR, &RLRL, |t, u, v, s| {
        vec![s * t, s * u, -s * u, s * v]
    });
    c.symmetric(lp_rum_lum_rp, q, &LRLR, &RLRL, |t, u, v, s| {
        vec![s * t, s * u, s * u, s * v]
    });

    // CCSC
    let h = FRAC_PI_2;
    c.symmetric(lp_rm_sm_lm, q, &LRSL, &RLSR, |t, u, v, s| {
        vec![s * t, -s * h, s * u, s * v]
    });
    c.symmetric(lp_rm_sm_rm, q, &LRSR, &RLSL, |t, u, v, s| {
        vec![s * t, -s * h, s * u, s * v]
    });
    c.symmetric(lp_rm_sm_lm, back, &LSRL, &RSLR, |t, u, v, s| {
        vec![s * v, s * u, -s * h, s * t]
    });
    c.symmetric(lp_rm_sm_rm, back, &RSRL, &LSLR, |t, u, v, s| {
        vec![s * v, s * u, -s * h, s * t]
    });

    // CCSCC
    c.symmetric(lp_rm_s_lm_rp, q, &LRSLR, &RLSRL, |t, u, v, s| {
        vec![s * t, -s * h, s * u, -s * h, s * v]
    });

    c.paths
}

/// All feasible Reeds-Shepp paths from `start` to `goal`, shortest first.
/// Identical poses yield a single zero-length path.
pub fn solve_all(start: &VehicleState, goal: &VehicleState, min_turn_radius: f64) -> Vec<RsPath> {
    assert!(min_turn_radius > 0.0, "turning radius must be positive");
    let dx = goal.x - start.x;
    let dy = goal.y - start.y;
    let dphi = normalize_angle(goal.theta - start.theta);
    if dx == 0.0 && dy == 0.0 && dphi == 0.0 {
        return vec![RsPath {
            segments: Vec::new(),
            total_length: 0.0,
            min_turn_radius,
        }];
    }
    let (s, c) = start.theta.sin_cos();
    let x = (c * dx + s * dy) / min_turn_radius;
    let y = (-s * dx + c * dy) / min_turn_radius;
    let mut paths = enumerate(x, y, dphi, min_turn_radius);
    paths.sort_by(|a, b| a.total_length.total_cmp(&b.total_length));
    paths
}

/// Shortest path only.
pub fn solve(start: &VehicleState, goal: &VehicleState, min_turn_radius: f64) -> Option<RsPath> {
    solve_all(start, goal, min_turn_radius).into_iter().next()
}

/// Advances `state` along one segment kind by arc length `dist` (signed by
/// gear) on a circle of radius `radius`.
pub fn advance(state: &VehicleState, steer: Steer, dist: f64, radius: f64) -> VehicleState {
    let th = state.theta;
    match steer {
        Steer::Straight => VehicleState::new(state.x + dist * th.cos(), state.y + dist * th.sin(), th),
        Steer::Left => {
            let a = dist / radius;
            VehicleState::new(
                state.x + radius * ((th + a).sin() - th.sin()),
                state.y - radius * ((th + a).cos() - th.cos()),
                th + a,
            )
        }
        Steer::Right => {
            let a = dist / radius;
            VehicleState::new(
                state.x - radius * ((th - a).sin() - th.sin()),
                state.y + radius * ((th - a).cos() - th.cos()),
                th - a,
            )
        }
    }
}

/// One sampled step along a path: the segment it belongs to and its length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsStep {
    pub steer: Steer,
    pub gear: Gear,
    pub length: f64,
}

/// Samples the path at arc-length steps no longer than `spacing`. Each
/// segment is split evenly so segment junctions are always sampled.
/// Returns `steps.len() + 1` states.
pub fn sample_steps(path: &RsPath, start: &VehicleState, spacing: f64) -> (Vec<VehicleState>, Vec<RsStep>) {
    assert!(spacing > 0.0, "spacing must be positive");
    let mut states = vec![*start];
    let mut steps = Vec::new();
    let mut seg_start = *start;
    for seg in &path.segments {
        let n = ((seg.length / spacing) - 1e-9).ceil().max(1.0) as usize;
        let step = seg.length / n as f64;
        let sign = if seg.gear == Gear::Forward { 1.0 } else { -1.0 };
        for k in 1..=n {
            // Positions are computed from the segment start to avoid drift.
            states.push(advance(&seg_start, seg.steer, sign * step * k as f64, path.min_turn_radius));
            steps.push(RsStep {
                steer: seg.steer,
                gear: seg.gear,
                length: step,
            });
        }
        seg_start = *states.last().unwrap();
    }
    (states, steps)
}

pub fn sample(path: &RsPath, start: &VehicleState, spacing: f64) -> Vec<VehicleState> {
    sample_steps(path, start, spacing).0
}

/// Time of each sample produced by [`sample`] when driven at `v_max`.
pub fn rs_timing(path: &RsPath, spacing: f64, v_max: f64) -> Vec<f64> {
    assert!(v_max > 0.0, "v_max must be positive");
    let (_, steps) = sample_steps(path, &VehicleState::default(), spacing);
    let mut times = Vec::with_capacity(steps.len() + 1);
    let mut acc = 0.0;
    times.push(0.0);
    for s in &steps {
        acc += s.length;
        times.push(acc / v_max);
    }
    times
}

#[cfg(test)]
mod tests {
    use super::*;

    const R: f64 = 3.5753;

    #[test]
    fn identical_poses() {
        let s = VehicleState::new(1.0, 2.0, 0.3);
        let p = solve_all(&s, &s, R);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].total_length, 0.0);
        assert_eq!(sample(&p[0], &s, 0.1), vec![s]);
        assert_eq!(rs_timing(&p[0], 0.1, 1.0), vec![0.0]);
    }

    #[test]
    fn collinear_goal_is_straight() {
        let p = solve(&VehicleState::default(), &VehicleState::new(10.0, 0.0, 0.0), R).unwrap();
        assert!((p.total_length - 10.0).abs() < 1e-9);
        assert_eq!(p.segments.len(), 1);
        assert_eq!(p.segments[0].steer, Steer::Straight);
        assert_eq!(p.segments[0].gear, Gear::Forward);
        let st = sample(&p, &VehicleState::default(), 0.1);
        assert_eq!(st.len(), 101);
        let times = rs_timing(&p, 0.1, 1.0);
        assert!((times.last().unwrap() - 10.0).abs() < 1e-9);
    }

    #[test]
    fn half_circle() {
        let goal = VehicleState::new(0.0, 2.0 * R, PI);
        let p = solve(&VehicleState::default(), &goal, R).unwrap();
        assert!((p.total_length - PI * R).abs() < 1e-6, "{}", p.total_length);
        assert!((p.total_length - 11.232).abs() < 1e-3);
    }

    #[test]
    fn every_candidate_reaches_goal() {
        let start = VehicleState::new(1.0, -2.0, 0.4);
        let goal = VehicleState::new(-3.0, 4.0, -2.2);
        let all = solve_all(&start, &goal, R);
        assert!(all.len() > 4);
        for p in &all {
            let end = *sample(p, &start, 0.2).last().unwrap();
            assert!(end.distance(&goal) < 1e-6, "{p:?}");
            assert!(normalize_angle(end.theta - goal.theta).abs() < 1e-6);
            assert!(p.segments.len() <= 5);
        }
    }
}
