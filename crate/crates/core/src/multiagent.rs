//! Equiangular spacing of several agents sharing the circumnavigation task.
//!
//! Every agent runs the single-agent protocol on its own estimates. The only
//! change is the tangential speed, which is scaled by `f(sigma+ / sigma-)`:
//! the ratio of the angular gap to the nearest detected neighbor ahead over the
//! gap to the nearest one behind. A large gap ahead speeds the agent up, a
//! crowded one slows it down, and the fixed point has all gaps equal.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::{command_parts, CircumnavState, ControlParams};
use crate::geometry::{angle_between, wrap_2pi, wrap_pi, UnitVec2, Vec2};

/// Positions closer than this are treated as the same point.
const COINCIDENT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FormationError {
    #[error("agents {0} and {1} occupy the same position")]
    CoincidentAgents(usize, usize),
}

/// What agent `id` exposes to its neighbors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentView {
    pub id: usize,
    pub position: Vec2,
    /// Angle of the direction toward the agent's estimated center, in `[0, 2π)`.
    pub theta: f64,
    pub est_center: Vec2,
    pub est_circle_radius: f64,
}

impl AgentView {
    pub fn new(id: usize, position: Vec2, state: &CircumnavState) -> Self {
        Self {
            id,
            position,
            theta: wrap_2pi(state.phi_hat.angle()),
            est_center: state.circle.center,
            est_circle_radius: state.circle.radius,
        }
    }

    fn phi_hat(&self) -> UnitVec2 {
        UnitVec2::from_angle(self.theta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGeometry {
    /// Ids of the agents within detection range, ascending.
    pub neighbor_set: Vec<usize>,
    pub i_plus: Option<usize>,
    pub i_minus: Option<usize>,
    /// Angular gap to the neighbor ahead, π when none is detected.
    pub sigma_plus: f64,
    /// Angular gap to the neighbor behind, π when none is detected.
    pub sigma_minus: f64,
}

/// Strictly increasing continuous map `(0, ∞] → (0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GainFn {
    /// `1 - exp(-x)`
    #[default]
    OneMinusExp,
    /// `x / (1 + x)`
    Rational,
}

impl GainFn {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            GainFn::OneMinusExp => 1.0 - (-x).exp(),
            GainFn::Rational => {
                if x.is_infinite() {
                    1.0
                } else {
                    x / (1.0 + x)
                }
            }
        }
    }
}

/// How the tangential term is scaled when agents fly different orbits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadiusScaling {
    /// Multiply by `r_hat_i / r_hat_ref`, with `r_hat_ref` the innermost orbit.
    #[default]
    Normalized,
    /// Multiply by the raw estimated orbit radius `r_hat_i`.
    Literal,
    /// No scaling.
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormationParams {
    /// Detection threshold `M`, meters.
    pub detection_radius: f64,
    #[serde(default)]
    pub gain: GainFn,
    #[serde(default)]
    pub radius_scaling: RadiusScaling,
    /// Desired distance outside the minimum circle for each agent.
    pub per_agent_d: Vec<f64>,
}

impl FormationParams {
    fn min_d(&self) -> Option<f64> {
        self.per_agent_d.iter().copied().reduce(f64::min)
    }
}

pub fn neighbor_geometry(
    views: &[AgentView],
    i: usize,
    detection_radius: f64,
) -> Result<NeighborGeometry, FormationError> {
    let me = &views[i];
    let mut neighbor_set = Vec::new();
    let mut ahead: Option<(f64, usize)> = None;
    let mut behind: Option<(f64, usize)> = None;

    for (j, other) in views.iter().enumerate() {
        if j == i {
            continue;
        }
        let offset = other.position - me.position;
        let dist = offset.norm();
        if dist <= COINCIDENT_EPS {
            return Err(FormationError::CoincidentAgents(me.id, other.id));
        }
        if dist > detection_radius {
            continue;
        }
        neighbor_set.push(j);
        let w = wrap_pi(me.theta - offset.angle());
        if w > 0.0 && w < PI {
            if ahead.map_or(true, |(best, _)| w > best) {
                ahead = Some((w, j));
            }
        } else if w < 0.0 && w > -PI {
            if behind.map_or(true, |(best, _)| w < best) {
                behind = Some((w, j));
            }
        }
    }

    let gap_to = |j: usize| angle_between(views[j].phi_hat(), me.phi_hat());
    let i_plus = ahead.map(|(_, j)| j);
    let i_minus = behind.map(|(_, j)| j);
    Ok(NeighborGeometry {
        neighbor_set,
        i_plus,
        i_minus,
        sigma_plus: i_plus.map_or(PI, gap_to),
        sigma_minus: i_minus.map_or(PI, gap_to),
    })
}

pub fn coordination_gain(sigma_plus: f64, sigma_minus: f64, gain: GainFn) -> f64 {
    let ratio = if sigma_minus > 0.0 {
        sigma_plus / sigma_minus
    } else if sigma_plus > 0.0 {
        f64::INFINITY
    } else {
        1.0
    };
    gain.eval(ratio)
}

/// Single-agent protocol with the tangential term scaled by the coordination
/// gain and, for agents on different orbits, by the orbit-radius ratio.
pub fn multi_control_input(
    state_i: &CircumnavState,
    geom: &NeighborGeometry,
    params: &ControlParams,
    formation: &FormationParams,
    i: usize,
) -> Vec2 {
    let (radial, tangential) = command_parts(state_i, params);
    let gain = coordination_gain(geom.sigma_plus, geom.sigma_minus, formation.gain);
    let radius_factor = match formation.radius_scaling {
        RadiusScaling::Off => 1.0,
        RadiusScaling::Literal => state_i.r_hat,
        RadiusScaling::Normalized => {
            let d_i = formation.per_agent_d.get(i).copied().unwrap_or(params.d);
            let d_ref = formation.min_d().unwrap_or(d_i);
            state_i.r_hat / (state_i.r_hat - d_i + d_ref)
        }
    };
    radial + tangential * (gain * radius_factor)
}

/// Angular gap from each agent to the next one counterclockwise around its
/// estimated center, in input order.
///
/// Agent positions are measured by `phi_i = theta_i + π`, the angle of the
/// direction from the estimated center back to the agent.
pub fn angular_gaps(views: &[AgentView]) -> Vec<f64> {
    let n = views.len();
    if n == 0 {
        return Vec::new();
    }
    let phis: Vec<f64> = views.iter().map(|v| wrap_2pi(v.theta + PI)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| phis[a].total_cmp(&phis[b]).then(a.cmp(&b)));

    let mut gaps = vec![0.0; n];
    for k in 0..n - 1 {
        gaps[order[k]] = phis[order[k + 1]] - phis[order[k]];
    }
    gaps[order[n - 1]] = phis[order[0]] + 2.0 * PI - phis[order[n - 1]];
    gaps
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::estimation_geometry;

    const PARAMS: ControlParams = ControlParams {
        k: 5.0,
        alpha: 5.0,
        r_s: 0.3,
        d: 0.4,
    };

    /// Agents on a circle of radius `r` around the origin at the given
    /// position angles, all estimating the origin as the center.
    fn ring(r: f64, angles: &[f64]) -> Vec<AgentView> {
        angles
            .iter()
            .enumerate()
            .map(|(id, &a)| {
                let position = Vec2::new(a.cos(), a.sin()) * r;
                AgentView {
                    id,
                    position,
                    theta: wrap_2pi(a + PI),
                    est_center: Vec2::ZERO,
                    est_circle_radius: 0.0,
                }
            })
            .collect()
    }

    #[test]
    fn even_ring_of_four() {
        let r = 4.3;
        let views = ring(r, &[0.0, PI / 2.0, PI, 1.5 * PI]);
        let m = 2.0 * r * (PI / 4.0).sin() + 1e-9;
        for i in 0..4 {
            let g = neighbor_geometry(&views, i, m).unwrap();
            assert_eq!(g.neighbor_set.len(), 2);
            assert_eq!(g.i_plus, Some((i + 1) % 4));
            assert_eq!(g.i_minus, Some((i + 3) % 4));
            assert!((g.sigma_plus - PI / 2.0).abs() < 1e-12);
            assert!((g.sigma_minus - PI / 2.0).abs() < 1e-12);
        }
        // a larger range also sees the opposite agent, which sits on neither side
        let g = neighbor_geometry(&views, 0, 3.0 * r).unwrap();
        assert_eq!(g.neighbor_set.len(), 3);
        assert_eq!((g.i_plus, g.i_minus), (Some(1), Some(3)));
    }

    #[test]
    fn isolated_agent_defaults_to_pi() {
        let views = ring(4.0, &[0.0, PI / 2.0]);
        let g = neighbor_geometry(&views, 0, 1.0).unwrap();
        assert!(g.neighbor_set.is_empty());
        assert_eq!((g.sigma_plus, g.sigma_minus), (PI, PI));
        let f = coordination_gain(g.sigma_plus, g.sigma_minus, GainFn::OneMinusExp);
        assert!((f - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn diametrically_opposite_pair() {
        let views = ring(4.0, &[0.3, 0.3 + PI]);
        for m in [1.0, 100.0] {
            let g = neighbor_geometry(&views, 0, m).unwrap();
            assert!((g.sigma_plus - PI).abs() < 1e-7);
            assert!((g.sigma_minus - PI).abs() < 1e-7);
        }
    }

    #[test]
    fn coincident_agents_are_rejected() {
        let mut views = ring(4.0, &[0.0, 1.0]);
        views[1].position = views[0].position;
        assert_eq!(
            neighbor_geometry(&views, 0, 10.0),
            Err(FormationError::CoincidentAgents(0, 1))
        );
    }

    #[test]
    fn gain_examples() {
        let f1 = coordination_gain(1.0, 1.0, GainFn::OneMinusExp);
        assert!((f1 - 0.6321).abs() < 1e-4);
        assert!(coordination_gain(PI, 0.01, GainFn::OneMinusExp) > 0.999);
        assert!(coordination_gain(0.01, PI, GainFn::OneMinusExp) < 0.01);
        assert_eq!(coordination_gain(1.0, 0.0, GainFn::OneMinusExp), 1.0);
        for g in [GainFn::OneMinusExp, GainFn::Rational] {
            let mut prev = 0.0;
            for k in 1..200 {
                let v = g.eval(k as f64 * 0.05);
                assert!(v > prev && v <= 1.0);
                prev = v;
            }
        }
    }

    fn formation(n: usize) -> FormationParams {
        FormationParams {
            detection_radius: 100.0,
            gain: GainFn::OneMinusExp,
            radius_scaling: RadiusScaling::Normalized,
            per_agent_d: vec![PARAMS.d; n],
        }
    }

    #[test]
    fn isolated_agent_scales_tangential_term_only() {
        let s = estimation_geometry(Vec2::new(5.0, 1.0), &[Vec2::ZERO, Vec2::new(1.0, 1.0)], 0.4)
            .unwrap();
        let g = NeighborGeometry {
            neighbor_set: vec![],
            i_plus: None,
            i_minus: None,
            sigma_plus: PI,
            sigma_minus: PI,
        };
        let v = multi_control_input(&s, &g, &PARAMS, &formation(1), 0);
        let (radial, tangential) = command_parts(&s, &PARAMS);
        let f1 = 1.0 - (-1.0f64).exp();
        assert!((v - (radial + tangential * f1)).norm() < 1e-12);
    }

    #[test]
    fn equilibrium_ring_commands_equal_tangential_speed() {
        let r = 0.4;
        let angles = [0.0, PI / 2.0, PI, 1.5 * PI];
        let positions: Vec<Vec2> = angles.iter().map(|a| Vec2::new(a.cos(), a.sin()) * r).collect();
        let states: Vec<CircumnavState> = positions
            .iter()
            .map(|&p| estimation_geometry(p, &[Vec2::ZERO], 0.4).unwrap())
            .collect();
        let views: Vec<AgentView> = states
            .iter()
            .enumerate()
            .map(|(i, s)| AgentView::new(i, positions[i], s))
            .collect();
        let f1 = 1.0 - (-1.0f64).exp();
        for i in 0..4 {
            let g = neighbor_geometry(&views, i, 2.0 * r * (PI / 4.0).sin() + 1e-9).unwrap();
            let v = multi_control_input(&states[i], &g, &PARAMS, &formation(4), i);
            // no radial component, tangential speed f(1) alpha
            assert!(v.dot(states[i].phi_hat.as_vec()).abs() < 1e-12);
            assert!((v.norm() - f1 * PARAMS.alpha).abs() < 1e-12);
        }
    }

    #[test]
    fn agent_behind_largest_gap_is_fastest() {
        let r = 0.4;
        let angles: [f64; 3] = [0.0, 1.8, 3.8];
        let positions: Vec<Vec2> = angles.iter().map(|a| Vec2::new(a.cos(), a.sin()) * r).collect();
        let states: Vec<CircumnavState> = positions
            .iter()
            .map(|&p| estimation_geometry(p, &[Vec2::ZERO], 0.4).unwrap())
            .collect();
        let views: Vec<AgentView> = states
            .iter()
            .enumerate()
            .map(|(i, s)| AgentView::new(i, positions[i], s))
            .collect();
        let gaps = angular_gaps(&views);
        assert!((gaps[2] - (2.0 * PI - 3.8)).abs() < 1e-12);
        let speed = |i: usize| {
            let g = neighbor_geometry(&views, i, 1.0).unwrap();
            multi_control_input(&states[i], &g, &PARAMS, &formation(3), i).norm()
        };
        // agent 2 has the largest gap ahead; agent 0 is the one it chases
        assert!(speed(2) > speed(0));
        assert!(speed(2) > speed(1));
    }

    #[test]
    fn normalized_scaling_equalizes_angular_rate() {
        let mut f = formation(2);
        f.per_agent_d = vec![0.4, 1.0];
        let inner = estimation_geometry(Vec2::new(0.4, 0.0), &[Vec2::ZERO], 0.4).unwrap();
        let outer = estimation_geometry(Vec2::new(-1.0, 0.0), &[Vec2::ZERO], 1.0).unwrap();
        let g = NeighborGeometry {
            neighbor_set: vec![],
            i_plus: None,
            i_minus: None,
            sigma_plus: PI,
            sigma_minus: PI,
        };
        let p_outer = ControlParams { d: 1.0, ..PARAMS };
        let w_inner = multi_control_input(&inner, &g, &PARAMS, &f, 0).norm() / 0.4;
        let w_outer = multi_control_input(&outer, &g, &p_outer, &f, 1).norm() / 1.0;
        assert!((w_inner - w_outer).abs() < 1e-12);
    }

    #[test]
    fn gap_examples() {
        let even = ring(1.0, &[0.0, PI / 2.0, PI, 1.5 * PI]);
        for g in angular_gaps(&even) {
            assert!((g - PI / 2.0).abs() < 1e-12);
        }
        assert_eq!(angular_gaps(&ring(1.0, &[0.7])), vec![2.0 * PI]);
        let two = angular_gaps(&ring(1.0, &[0.0, PI / 2.0]));
        assert!((two[0] - PI / 2.0).abs() < 1e-12);
        assert!((two[1] - 1.5 * PI).abs() < 1e-12);
    }
}
