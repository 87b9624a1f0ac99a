//! Per-target range compensator driven by bearings and the agent's own velocity.
//!
//! The agent never measures range. Each compensator keeps a scalar estimate
//! `rho_hat` along the measured bearing and updates it with
//!
//! ```text
//! d/dt rho_hat = -(phi . v) u(rho_hat - h) + sgn(phi_bar . v) (phi_bar . v + rho_hat phi_bar . phi_dot)
//! ```
//!
//! where `phi_bar` is the bearing rotated a quarter turn clockwise, `u` is the
//! unit step with `u(0) = 1` and `sgn(0) = 0`. Started from an underestimate
//! no smaller than `h`, the estimate stays in `[h, rho]` and the error
//! `rho_hat - rho` only grows toward zero.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{UnitVec2, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EstimatorError {
    #[error("agent and target coincide; bearing undefined")]
    ZeroRange,
    #[error("bearing samples out of order ({prev} >= {curr})")]
    TimeOrder { prev: f64, curr: f64 },
}

/// Unit step, `u(0) = 1`.
#[inline]
pub fn unit_step(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Sign function with `sgn(0) = 0`.
#[inline]
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BearingRateMode {
    /// Left difference of consecutive bearing samples.
    #[default]
    NumericBackward,
    /// Exact rate from ground-truth geometry. Not available to a real agent.
    AnalyticOracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorParams {
    pub h: f64,
    #[serde(default)]
    pub bearing_rate_mode: BearingRateMode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompensatorState {
    pub rho_hat: f64,
    /// Floor constant, meters.
    pub h: f64,
}

impl CompensatorState {
    pub fn new(rho_hat: f64, h: f64) -> Self {
        Self { rho_hat, h }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BearingSample {
    pub phi: UnitVec2,
    pub t: f64,
}

pub fn measure_bearing(agent: Vec2, target: Vec2) -> Result<UnitVec2, EstimatorError> {
    UnitVec2::new(target - agent).ok_or(EstimatorError::ZeroRange)
}

/// Backward-difference bearing rate, restricted to the direction a bearing
/// can actually move in (perpendicular to the current bearing).
pub fn bearing_rate(prev: BearingSample, curr: BearingSample) -> Result<Vec2, EstimatorError> {
    let dt = curr.t - prev.t;
    if !(dt > 0.0) {
        return Err(EstimatorError::TimeOrder {
            prev: prev.t,
            curr: curr.t,
        });
    }
    let raw = (curr.phi.as_vec() - prev.phi.as_vec()) / dt;
    Ok(raw.project_onto(curr.phi.rotate_cw_90()))
}

/// Exact bearing rate `-(v_bar / rho) phi_bar` for an agent at `agent` moving
/// with `agent_vel` relative to a stationary target.
pub fn analytic_bearing_rate(
    agent: Vec2,
    target: Vec2,
    agent_vel: Vec2,
) -> Result<Vec2, EstimatorError> {
    let rho = agent.distance(target);
    let phi = measure_bearing(agent, target)?;
    let phi_bar = phi.rotate_cw_90().as_vec();
    let v_bar = phi_bar.dot(agent_vel);
    Ok(phi_bar * (-v_bar / rho))
}

/// Right-hand side of the compensator update.
pub fn compensator_rate(rho_hat: f64, h: f64, phi: UnitVec2, phi_dot: Vec2, agent_vel: Vec2) -> f64 {
    let phi_bar = phi.rotate_cw_90().as_vec();
    let v = phi.as_vec().dot(agent_vel);
    let v_bar = phi_bar.dot(agent_vel);
    -v * unit_step(rho_hat - h) + sgn(v_bar) * (v_bar + rho_hat * phi_bar.dot(phi_dot))
}

/// One explicit Euler step of the compensator followed by the floor clamp.
pub fn compensator_step(
    state: CompensatorState,
    phi: UnitVec2,
    phi_dot: Vec2,
    agent_vel: Vec2,
    dt: f64,
) -> CompensatorState {
    let rate = compensator_rate(state.rho_hat, state.h, phi, phi_dot, agent_vel);
    CompensatorState {
        rho_hat: (state.rho_hat + dt * rate).max(state.h),
        h: state.h,
    }
}

/// Estimated target position `agent + rho_hat * phi`.
pub fn estimated_position(state: CompensatorState, agent: Vec2, phi: UnitVec2) -> Vec2 {
    agent + phi.as_vec() * state.rho_hat
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uv(x: f64, y: f64) -> UnitVec2 {
        UnitVec2::new(Vec2::new(x, y)).unwrap()
    }

    #[test]
    fn bearing_examples() {
        let b = measure_bearing(Vec2::ZERO, Vec2::new(2.0, 0.0)).unwrap();
        assert_eq!((b.x(), b.y()), (1.0, 0.0));
        let b = measure_bearing(Vec2::new(8.0, 0.0), Vec2::new(4.0, 5.0)).unwrap();
        let s = 41f64.sqrt();
        assert!((b.x() + 4.0 / s).abs() < 1e-15 && (b.y() - 5.0 / s).abs() < 1e-15);
        assert!((b.x() + 0.6247).abs() < 1e-4 && (b.y() - 0.7809).abs() < 1e-4);
        let b = measure_bearing(Vec2::new(1.0, 1.0), Vec2::new(1.0, 3.0)).unwrap();
        assert_eq!((b.x(), b.y()), (0.0, 1.0));
        assert_eq!(
            measure_bearing(Vec2::new(1.0, 1.0), Vec2::new(1.0, 1.0)),
            Err(EstimatorError::ZeroRange)
        );
    }

    #[test]
    fn stationary_bearing_has_zero_rate() {
        let phi = uv(0.3, 0.4);
        let r = bearing_rate(
            BearingSample { phi, t: 0.0 },
            BearingSample { phi, t: 0.1 },
        )
        .unwrap();
        assert_eq!(r, Vec2::ZERO);
    }

    #[test]
    fn bearing_rate_rejects_time_reversal() {
        let phi = uv(1.0, 0.0);
        let e = bearing_rate(BearingSample { phi, t: 1.0 }, BearingSample { phi, t: 1.0 });
        assert!(matches!(e, Err(EstimatorError::TimeOrder { .. })));
    }

    #[test]
    fn analytic_rate_example() {
        let r = analytic_bearing_rate(Vec2::ZERO, Vec2::new(2.0, 0.0), Vec2::new(0.0, 1.0)).unwrap();
        assert!((r - Vec2::new(0.0, -0.5)).norm() < 1e-15);
    }

    /// Agent circles (1, 0) at radius 3 while the target sits at the origin,
    /// so the bearing rate is not constant.
    fn circular_trace(dt: f64, steps: usize) -> f64 {
        let center = Vec2::new(1.0, 0.0);
        let w = 0.7;
        let pos = |t: f64| center + Vec2::new((w * t).cos(), (w * t).sin()) * 3.0;
        let vel = |t: f64| Vec2::new(-(w * t).sin(), (w * t).cos()) * (3.0 * w);
        let target = Vec2::ZERO;
        let mut worst: f64 = 0.0;
        for k in 1..=steps {
            let (t0, t1) = ((k - 1) as f64 * dt, k as f64 * dt);
            let prev = BearingSample { phi: measure_bearing(pos(t0), target).unwrap(), t: t0 };
            let curr = BearingSample { phi: measure_bearing(pos(t1), target).unwrap(), t: t1 };
            let numeric = bearing_rate(prev, curr).unwrap();
            let exact = analytic_bearing_rate(pos(t1), target, vel(t1)).unwrap();
            worst = worst.max((numeric - exact).norm());
        }
        worst
    }

    #[test]
    fn numeric_rate_is_first_order_accurate() {
        let e1 = circular_trace(1e-3, 5000);
        let e2 = circular_trace(5e-4, 10000);
        assert!(e1 < 1e-3, "error {e1}");
        let ratio = e1 / e2;
        assert!((ratio - 2.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn compensator_is_idle_without_motion() {
        let s = CompensatorState::new(0.7, 0.1);
        let next = compensator_step(s, uv(0.6, 0.8), Vec2::new(0.1, 0.2), Vec2::ZERO, 0.01);
        assert_eq!(next, s);
    }

    #[test]
    fn compensator_rate_matches_closed_form() {
        // agent (0,0), target (2,0), rho_hat 1, velocity (0,1): v=0, v_bar=-1,
        // rho_tilde=-1, rho=2 -> -|v_bar| rho_tilde / rho = 0.5
        let phi = uv(1.0, 0.0);
        let vel = Vec2::new(0.0, 1.0);
        let phi_dot = analytic_bearing_rate(Vec2::ZERO, Vec2::new(2.0, 0.0), vel).unwrap();
        let rate = compensator_rate(1.0, 0.1, phi, phi_dot, vel);
        assert!((rate - 0.5).abs() < 1e-15);
    }

    #[test]
    fn exact_estimate_tracks_range_rate() {
        // rho_hat = rho: the update reproduces d rho/dt = -phi . v
        let agent = Vec2::new(3.0, -1.0);
        let target = Vec2::new(-1.0, 2.0);
        let rho = agent.distance(target);
        let phi = measure_bearing(agent, target).unwrap();
        for vel in [Vec2::new(1.0, 2.0), Vec2::new(-3.0, 0.5), Vec2::new(0.2, -4.0)] {
            let phi_dot = analytic_bearing_rate(agent, target, vel).unwrap();
            let rate = compensator_rate(rho, 0.1, phi, phi_dot, vel);
            assert!((rate + phi.as_vec().dot(vel)).abs() < 1e-12);
        }
    }

    #[test]
    fn estimate_below_floor_only_grows() {
        // rho_hat < h disables the radial term: rate = |v_bar|(1 - rho_hat/rho) >= 0
        let agent = Vec2::ZERO;
        let target = Vec2::new(5.0, 0.0);
        let phi = measure_bearing(agent, target).unwrap();
        let vel = Vec2::new(-3.0, 1.0);
        let phi_dot = analytic_bearing_rate(agent, target, vel).unwrap();
        let rate = compensator_rate(0.05, 0.1, phi, phi_dot, vel);
        assert!((rate - (1.0 - 0.05 / 5.0)).abs() < 1e-12);
    }

    #[test]
    fn floor_clamp() {
        let s = CompensatorState::new(0.1, 0.1);
        let phi = uv(1.0, 0.0);
        // moving straight at the target shrinks the estimate
        let next = compensator_step(s, phi, Vec2::ZERO, Vec2::new(5.0, 0.0), 0.1);
        assert_eq!(next.rho_hat, 0.1);
    }

    #[test]
    fn estimated_position_examples() {
        let s = CompensatorState::new(0.4, 0.1);
        let p = estimated_position(s, Vec2::new(8.0, 0.0), uv(-1.0, 0.0));
        assert!((p - Vec2::new(7.6, 0.0)).norm() < 1e-15);
        let s = CompensatorState::new(5.0, 0.1);
        let p = estimated_position(s, Vec2::ZERO, uv(0.6, 0.8));
        assert!((p - Vec2::new(3.0, 4.0)).norm() < 1e-14);
        let target = Vec2::new(-2.0, 7.0);
        let agent = Vec2::new(1.0, 1.0);
        let exact = CompensatorState::new(agent.distance(target), 0.1);
        let p = estimated_position(exact, agent, measure_bearing(agent, target).unwrap());
        assert!((p - target).norm() < 1e-14);
    }
}
