//! Single-agent velocity protocol around the estimated minimum circle.
//!
//! The command has a radial part along the direction to the estimated circle
//! center, driving the distance toward `r_hat = r_hat_t + d`, and a tangential
//! part of speed `alpha` along that direction rotated clockwise. The
//! tangential part is switched off while the agent is within `r_s` of the
//! estimated circle, which leaves a pure outward retreat.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimator::unit_step;
use crate::geometry::{min_enclosing_circle, Circle, GeometryError, UnitVec2, Vec2};

/// Distance below which the agent counts as sitting on the estimated center.
pub const AT_CENTER_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ControlError {
    #[error("agent is at the estimated circle center; direction undefined")]
    AtCenter,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlParams {
    /// Radial gain, 1/s.
    pub k: f64,
    /// Desired tangential speed, m/s.
    pub alpha: f64,
    /// Safety distance, m.
    pub r_s: f64,
    /// Desired distance outside the minimum circle, m.
    pub d: f64,
}

/// Geometry of the agent relative to its estimated minimum circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircumnavState {
    pub circle: Circle,
    /// Distance from the agent to the estimated center.
    pub rho_hat_c: f64,
    /// Direction from the agent to the estimated center.
    pub phi_hat: UnitVec2,
    /// Estimated orbit radius, `circle.radius + d`.
    pub r_hat: f64,
}

impl CircumnavState {
    pub fn phi_hat_bar(&self) -> UnitVec2 {
        self.phi_hat.rotate_cw_90()
    }

    /// Argument of the step function gating the tangential term.
    pub fn safety_margin(&self, r_s: f64) -> f64 {
        self.rho_hat_c - self.circle.radius - r_s
    }
}

pub fn estimation_geometry(
    agent: Vec2,
    estimates: &[Vec2],
    d: f64,
) -> Result<CircumnavState, ControlError> {
    let (circle, _) = min_enclosing_circle(estimates)?;
    let offset = circle.center - agent;
    let rho_hat_c = offset.norm();
    if rho_hat_c <= AT_CENTER_EPS {
        return Err(ControlError::AtCenter);
    }
    Ok(CircumnavState {
        circle,
        rho_hat_c,
        phi_hat: UnitVec2::new(offset).ok_or(ControlError::AtCenter)?,
        r_hat: circle.radius + d,
    })
}

/// Radial and tangential components of the command, before any scaling.
pub(crate) fn command_parts(state: &CircumnavState, params: &ControlParams) -> (Vec2, Vec2) {
    let radial = state.phi_hat.as_vec() * (params.k * (state.rho_hat_c - state.r_hat));
    let gate = unit_step(state.safety_margin(params.r_s));
    let tangential = state.phi_hat_bar().as_vec() * (params.alpha * gate);
    (radial, tangential)
}

pub fn control_input(state: &CircumnavState, params: &ControlParams) -> Vec2 {
    let (radial, tangential) = command_parts(state, params);
    radial + tangential
}
