use serde::{Deserialize, Serialize};

use crate::dynamics::ControlInput;
use crate::reeds_shepp::{Gear, RsPath, Steer};

/// Weights of the accumulated cost. `w_len = 1` fixes the exchange rate
/// between penalty terms and the metric heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    /// Per meter driven forward.
    pub w_len: f64,
    /// Multiplier on meters driven in reverse.
    pub w_rev: f64,
    /// Per radian of |delta| per primitive.
    pub w_delta: f64,
    /// Per gear reversal.
    pub w_switch_gear: f64,
    /// Per radian of steering change between consecutive moves.
    pub w_switch_steer: f64,
    /// Per second spent on a zero-velocity primitive.
    pub w_wait: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self {
            w_len: 1.0,
            w_rev: 2.0,
            w_delta: 0.3,
            w_switch_gear: 5.0,
            w_switch_steer: 0.5,
            w_wait: 0.5,
        }
    }
}

fn gear_of(u: &ControlInput) -> Option<Gear> {
    if u.v > 0.0 {
        Some(Gear::Forward)
    } else if u.v < 0.0 {
        Some(Gear::Backward)
    } else {
        None
    }
}

/// Cost increment for one primitive given the gear and steering of the last
/// moving primitive before it. Waiting keeps the previous gear and steering
/// and is charged per second only.
pub fn step_cost(
    u: &ControlInput,
    distance: f64,
    duration: f64,
    last_gear: Option<Gear>,
    last_delta: Option<f64>,
    w: &CostWeights,
) -> f64 {
    let Some(gear) = gear_of(u) else {
        return w.w_wait * duration;
    };
    let mut c = match gear {
        Gear::Forward => w.w_len * distance,
        Gear::Backward => w.w_len * w.w_rev * distance,
    };
    c += w.w_delta * u.delta.abs();
    if last_gear.is_some_and(|g| g != gear) {
        c += w.w_switch_gear;
    }
    if let Some(d) = last_delta {
        c += w.w_switch_steer * (u.delta - d).abs();
    }
    c
}

/// Accumulated cost of a child reached from a parent with cost `parent_cost`.
pub fn accumulate_cost(
    parent_cost: f64,
    u: &ControlInput,
    distance: f64,
    duration: f64,
    last_gear: Option<Gear>,
    last_delta: Option<f64>,
    w: &CostWeights,
) -> f64 {
    parent_cost + step_cost(u, distance, duration, last_gear, last_delta, w)
}

fn segment_control(steer: Steer, gear: Gear, delta_max: f64) -> ControlInput {
    let v = if gear == Gear::Forward { 1.0 } else { -1.0 };
    let delta = match steer {
        Steer::Left => delta_max,
        Steer::Right => -delta_max,
        Steer::Straight => 0.0,
    };
    ControlInput::new(v, delta)
}

/// Cost of driving a Reeds-Shepp path, using the same terms as primitives
/// applied per segment.
pub fn rs_path_cost(
    path: &RsPath,
    delta_max: f64,
    mut last_gear: Option<Gear>,
    mut last_delta: Option<f64>,
    w: &CostWeights,
) -> f64 {
    let mut c = 0.0;
    for seg in &path.segments {
        let u = segment_control(seg.steer, seg.gear, delta_max);
        c += step_cost(&u, seg.length, seg.length, last_gear, last_delta, w);
        last_gear = Some(seg.gear);
        last_delta = Some(u.delta);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_forward_and_reverse() {
        let w = CostWeights::default();
        let fwd = accumulate_cost(0.0, &ControlInput::new(1.0, 0.0), 2.0, 2.0, None, None, &w);
        assert!((fwd - 2.0 * w.w_len).abs() < 1e-12);
        let rev = accumulate_cost(0.0, &ControlInput::new(-1.0, 0.0), 2.0, 2.0, None, None, &w);
        assert!((rev - 2.0 * w.w_len * w.w_rev).abs() < 1e-12);
    }

    #[test]
    fn gear_switch_is_charged_once() {
        let w = CostWeights::default();
        let first = accumulate_cost(0.0, &ControlInput::new(1.0, 0.0), 2.0, 2.0, None, None, &w);
        let second = accumulate_cost(
            first,
            &ControlInput::new(-1.0, 0.0),
            2.0,
            2.0,
            Some(Gear::Forward),
            Some(0.0),
            &w,
        );
        let expected = 2.0 + 4.0 + w.w_switch_gear;
        assert!((second - expected).abs() < 1e-12);
    }

    #[test]
    fn waiting_costs_time_only() {
        let w = CostWeights::default();
        let c = step_cost(&ControlInput::WAIT, 0.0, 2.0, Some(Gear::Backward), Some(0.5), &w);
        assert!((c - 2.0 * w.w_wait).abs() < 1e-12);
    }
}
