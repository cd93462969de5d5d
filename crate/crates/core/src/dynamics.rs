//! Kinematic bicycle model:
//!
//! ```text
//! X' = v cos(theta)
//! Y' = v sin(theta)
//! theta' = v tan(delta) / L
//! ```
//!
//! Motion primitives hold `(v, delta)` constant for one horizon.

use serde::{Deserialize, Serialize};

use crate::geometry::{normalize_angle, VehicleState};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlInput {
    /// Signed longitudinal velocity, m/s.
    pub v: f64,
    /// Front-wheel steering angle, radians.
    pub delta: f64,
}

impl ControlInput {
    pub const WAIT: ControlInput = ControlInput { v: 0.0, delta: 0.0 };

    pub const fn new(v: f64, delta: f64) -> Self {
        Self { v, delta }
    }

    pub fn is_wait(&self) -> bool {
        self.v == 0.0
    }

    pub fn is_reverse(&self) -> bool {
        self.v < 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveConfig {
    pub v_max: f64,
    pub delta_max: f64,
    pub n_v: usize,
    pub n_delta: usize,
    /// Primitive duration in seconds.
    pub horizon: f64,
    /// Integration and sampling step in seconds.
    pub dt: f64,
}

impl Default for PrimitiveConfig {
    fn default() -> Self {
        Self {
            v_max: 1.0,
            delta_max: 40f64.to_radians(),
            n_v: 3,
            n_delta: 5,
            horizon: 2.0,
            dt: 0.1,
        }
    }
}

impl PrimitiveConfig {
    /// Number of integration steps per primitive.
    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    pub fn min_turn_radius(&self, wheelbase: f64) -> f64 {
        wheelbase / self.delta_max.tan()
    }
}

fn derivative(theta: f64, u: &ControlInput, wheelbase: f64) -> [f64; 3] {
    [
        u.v * theta.cos(),
        u.v * theta.sin(),
        u.v * u.delta.tan() / wheelbase,
    ]
}

/// One classical RK4 step of the bicycle model; heading left unwrapped.
fn rk4_step(s: [f64; 3], u: &ControlInput, h: f64, wheelbase: f64) -> [f64; 3] {
    let k1 = derivative(s[2], u, wheelbase);
    let k2 = derivative(s[2] + 0.5 * h * k1[2], u, wheelbase);
    let k3 = derivative(s[2] + 0.5 * h * k2[2], u, wheelbase);
    let k4 = derivative(s[2] + h * k3[2], u, wheelbase);
    let mut out = s;
    for i in 0..3 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Fixed-step RK4 rollout under constant control. Returns `H/dt + 1` states,
/// the first being `start`.
pub fn integrate(
    start: &VehicleState,
    u: &ControlInput,
    horizon: f64,
    dt: f64,
    wheelbase: f64,
) -> Vec<VehicleState> {
    let steps = (horizon / dt).round() as usize;
    debug_assert!(((steps as f64) * dt - horizon).abs() < 1e-9, "dt must divide H");
    let mut out = Vec::with_capacity(steps + 1);
    out.push(*start);
    let mut s = [start.x, start.y, start.theta];
    for _ in 0..steps {
        s = rk4_step(s, u, dt, wheelbase);
        out.push(VehicleState::new(s[0], s[1], s[2]));
    }
    out
}

/// Cartesian product of evenly spaced velocities and steering angles. Only
/// a single `(0, 0)` entry is kept for zero velocity.
pub fn primitive_set(cfg: &PrimitiveConfig) -> Vec<ControlInput> {
    let spaced = |n: usize, max: f64| -> Vec<f64> {
        match n {
            0 => Vec::new(),
            1 => vec![0.0],
            _ => (0..n)
                .map(|i| -max + 2.0 * max * i as f64 / (n - 1) as f64)
                .collect(),
        }
    };
    let vs = spaced(cfg.n_v, cfg.v_max);
    let deltas = spaced(cfg.n_delta, cfg.delta_max);
    let mut out = Vec::new();
    for &v in &vs {
        if v.abs() < 1e-12 {
            out.push(ControlInput::WAIT);
            continue;
        }
        for &delta in &deltas {
            out.push(ControlInput::new(v, if delta.abs() < 1e-12 { 0.0 } else { delta }));
        }
    }
    out
}

/// Exact constant-control solution after time `t`.
pub fn arc_closed_form(
    start: &VehicleState,
    u: &ControlInput,
    t: f64,
    wheelbase: f64,
) -> VehicleState {
    let dist = u.v * t;
    let curvature = u.delta.tan() / wheelbase;
    let th0 = start.theta;
    if curvature.abs() < 1e-12 {
        return VehicleState::new(start.x + dist * th0.cos(), start.y + dist * th0.sin(), th0);
    }
    let dth = curvature * dist;
    let r = 1.0 / curvature;
    let th1 = th0 + dth;
    VehicleState::new(
        start.x + r * (th1.sin() - th0.sin()),
        start.y - r * (th1.cos() - th0.cos()),
        normalize_angle(th1),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const L: f64 = 3.0;

    #[test]
    fn straight_line() {
        let s = integrate(&VehicleState::default(), &ControlInput::new(1.0, 0.0), 1.0, 0.1, L);
        assert_eq!(s.len(), 11);
        let f = s.last().unwrap();
        assert!((f.x - 1.0).abs() < 1e-12 && f.y.abs() < 1e-12 && f.theta.abs() < 1e-12);
    }

    #[test]
    fn wait_primitive_stays() {
        let s = integrate(&VehicleState::new(1.0, 2.0, 0.3), &ControlInput::WAIT, 2.0, 0.1, L);
        assert!(s.iter().all(|x| *x == VehicleState::new(1.0, 2.0, 0.3)));
    }

    #[test]
    fn full_lock_arc_value() {
        let u = ControlInput::new(1.0, 40f64.to_radians());
        let s = integrate(&VehicleState::default(), &u, 2.0, 0.1, L);
        let f = s.last().unwrap();
        // R = L / tan(40 deg), theta = 2 / R
        let r = L / 40f64.to_radians().tan();
        assert!((r - 3.5753).abs() < 1e-4);
        let th = 2.0 / r;
        assert!((f.theta - th).abs() < 1e-9);
        assert!((f.x - r * th.sin()).abs() < 1e-6);
        assert!((f.y - r * (1.0 - th.cos())).abs() < 1e-6);
        assert!((f.x - 1.898).abs() < 1e-3);
        assert!((f.y - 0.545).abs() < 1e-3);
        assert!((f.theta.to_degrees() - 32.05).abs() < 1e-2);
    }

    #[test]
    fn primitive_counts() {
        let cfg = PrimitiveConfig::default();
        let p = primitive_set(&cfg);
        assert_eq!(p.len(), 11);
        assert_eq!(p.iter().filter(|u| u.is_wait()).count(), 1);

        let two = primitive_set(&PrimitiveConfig { n_v: 2, n_delta: 1, ..cfg });
        assert_eq!(two, vec![ControlInput::new(-1.0, 0.0), ControlInput::new(1.0, 0.0)]);

        let three = primitive_set(&PrimitiveConfig { n_v: 3, n_delta: 1, ..cfg });
        assert_eq!(
            three,
            vec![ControlInput::new(-1.0, 0.0), ControlInput::WAIT, ControlInput::new(1.0, 0.0)]
        );
    }

    #[test]
    fn closed_form_reverses() {
        let start = VehicleState::new(2.0, -1.0, 0.7);
        let u = ControlInput::new(1.0, -0.5);
        let back = ControlInput::new(-1.0, -0.5);
        let mid = arc_closed_form(&start, &u, 1.7, L);
        let end = arc_closed_form(&mid, &back, 1.7, L);
        assert!((end.x - start.x).abs() < 1e-9);
        assert!((end.y - start.y).abs() < 1e-9);
        assert!((end.theta - start.theta).abs() < 1e-9);
    }

    #[test]
    fn rk4_matches_closed_form_all_primitives() {
        let cfg = PrimitiveConfig::default();
        let start = VehicleState::new(0.3, -0.2, 1.1);
        for u in primitive_set(&cfg) {
            let roll = integrate(&start, &u, cfg.horizon, cfg.dt, L);
            for (k, s) in roll.iter().enumerate() {
                let exact = arc_closed_form(&start, &u, k as f64 * cfg.dt, L);
                assert!(s.distance(&exact) < 1e-6, "{u:?} step {k}");
            }
        }
    }

    #[test]
    fn rk4_convergence_order() {
        let u = ControlInput::new(1.0, 40f64.to_radians());
        let start = VehicleState::default();
        let exact = arc_closed_form(&start, &u, 2.0, L);
        let err = |dt: f64| integrate(&start, &u, 2.0, dt, L).last().unwrap().distance(&exact);
        let (e1, e2) = (err(0.4), err(0.2));
        let order = (e1 / e2).log2();
        assert!(order >= 3.8, "observed order {order}");
    }
}
