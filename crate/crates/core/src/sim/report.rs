//! Runtime invariant monitor and its JSON summary.

use std::f64::consts::PI;

use serde::Serialize;

use super::scenario::{Integrator, Scenario};
use super::telemetry::TelemetryRecord;
use super::SimError;
use crate::estimator::BearingRateMode;
use crate::geometry::min_enclosing_circle;
use crate::multiagent::RadiusScaling;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Slack on the hull-distance safety bound.
pub const SAFETY_TOL: f64 = 1e-3;
/// Slack below the estimate floor `h`.
pub const FLOOR_TOL: f64 = 1e-9;
/// Slack above the true range.
pub const UNDERESTIMATE_TOL: f64 = 1e-6;
/// Per-unit-time allowance for decreases of the range error.
pub const MONOTONE_RATE_TOL: f64 = 1e-6;
pub const GAP_SUM_TOL: f64 = 1e-9;
/// Relative tolerance on final orbit distance and speed.
pub const CONVERGENCE_REL_TOL: f64 = 0.02;
pub const LOCALIZATION_TOL: f64 = 1e-2;
pub const GAP_TOL: f64 = 0.05;
/// Radial and estimate error below which the formation counts as on-orbit.
pub const ON_ORBIT_TOL: f64 = 1e-4;
pub const GAP_CONTRACTION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantCheck {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub value: f64,
    pub tolerance: f64,
    /// Advisory checks are reported but do not affect the verdict.
    pub advisory: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantReport {
    pub schema_version: u32,
    pub scenario: String,
    pub seed: u64,
    pub integrator: Integrator,
    pub bearing_rate_mode: BearingRateMode,
    pub dt: f64,
    pub t_end: f64,
    pub t_final: f64,
    pub steps_observed: u64,
    pub certified: bool,
    pub warnings: Vec<String>,
    pub completed: bool,
    pub failure: Option<String>,
    pub min_hull_distance: f64,
    pub max_abs_rho_tilde: f64,
    pub final_max_abs_rho_tilde: f64,
    pub final_distance_error: Vec<f64>,
    pub final_speed_error: Vec<f64>,
    pub final_gap_spread: Option<f64>,
    pub max_gap_sum_error: Option<f64>,
    pub min_agent_distance: Option<f64>,
    pub checks: Vec<InvariantCheck>,
    /// Certified, completed, and every non-advisory check passed.
    pub passed: bool,
}

impl InvariantReport {
    pub fn check(&self, name: &str) -> Option<&InvariantCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Accumulates worst-case values over the observed records.
#[derive(Debug, Clone)]
pub struct InvariantMonitor {
    scenario: String,
    seed: u64,
    integrator: Integrator,
    mode: BearingRateMode,
    dt: f64,
    t_end: f64,
    h: f64,
    r_s: f64,
    ds: Vec<f64>,
    expected_speed: Vec<f64>,
    certified: bool,
    warnings: Vec<String>,
    multi: bool,

    steps: u64,
    t_last: f64,
    all_finite: bool,
    min_hull: f64,
    min_floor_margin: f64,
    max_excess: f64,
    max_abs_tilde: f64,
    prev_tilde: Option<Vec<f64>>,
    decrease: Vec<f64>,
    max_gap_sum_err: f64,
    min_agent_dist: f64,
    prev_gap_extremes: Option<(f64, f64)>,
    gap_contraction_worst: f64,
}

impl InvariantMonitor {
    pub fn new(sc: &Scenario) -> Self {
        let ds: Vec<f64> = sc.agents.iter().map(|a| a.d).collect();
        let alpha = sc.control.alpha;
        let expected_speed = if sc.is_multi_agent() {
            let r_t = min_enclosing_circle(&sc.targets).map_or(0.0, |(c, _)| c.radius);
            let d_min = ds.iter().copied().fold(f64::INFINITY, f64::min);
            let f1 = sc.formation.gain.eval(1.0);
            ds.iter()
                .map(|&d| {
                    let factor = match sc.formation.radius_scaling {
                        RadiusScaling::Off => 1.0,
                        RadiusScaling::Literal => r_t + d,
                        RadiusScaling::Normalized => (r_t + d) / (r_t + d_min),
                    };
                    f1 * alpha * factor
                })
                .collect()
        } else {
            vec![alpha]
        };
        InvariantMonitor {
            scenario: sc.name.clone(),
            seed: sc.seed,
            integrator: sc.integrator,
            mode: sc.estimator.bearing_rate_mode,
            dt: sc.dt,
            t_end: sc.t_end,
            h: sc.estimator.h,
            r_s: sc.control.r_s,
            ds,
            expected_speed,
            certified: sc.assumptions.certified(),
            warnings: sc.assumptions.warnings.clone(),
            multi: sc.is_multi_agent(),
            steps: 0,
            t_last: 0.0,
            all_finite: true,
            min_hull: f64::INFINITY,
            min_floor_margin: f64::INFINITY,
            max_excess: f64::NEG_INFINITY,
            max_abs_tilde: 0.0,
            prev_tilde: None,
            decrease: Vec::new(),
            max_gap_sum_err: 0.0,
            min_agent_dist: f64::INFINITY,
            prev_gap_extremes: None,
            gap_contraction_worst: 0.0,
        }
    }

    pub fn observe(&mut self, rec: &TelemetryRecord) {
        self.steps += 1;
        self.t_last = rec.t;
        self.all_finite &= rec.is_finite();
        let mut tildes = Vec::new();
        let mut on_orbit = true;
        for (a, agent) in rec.agents.iter().enumerate() {
            self.min_hull = self.min_hull.min(agent.hull_distance);
            for t in &agent.targets {
                self.min_floor_margin = self.min_floor_margin.min(t.rho_hat - self.h);
                self.max_excess = self.max_excess.max(t.rho_hat - t.rho);
                self.max_abs_tilde = self.max_abs_tilde.max(t.rho_tilde.abs());
                tildes.push(t.rho_tilde);
                on_orbit &= t.rho_tilde.abs() <= ON_ORBIT_TOL;
            }
            let rho_hat_c = agent.position.distance(agent.est_center);
            on_orbit &= (rho_hat_c - agent.est_radius - self.ds[a]).abs() <= ON_ORBIT_TOL;
        }
        if let Some(prev) = &self.prev_tilde {
            if self.decrease.len() != tildes.len() {
                self.decrease = vec![0.0; tildes.len()];
            }
            for ((acc, &p), &c) in self.decrease.iter_mut().zip(prev).zip(&tildes) {
                *acc += (p - c).max(0.0);
            }
        }
        self.prev_tilde = Some(tildes);

        if let Some(d) = rec.min_agent_distance {
            self.min_agent_dist = self.min_agent_dist.min(d);
        }
        if self.multi {
            let gaps: Vec<f64> = rec.agents.iter().filter_map(|a| a.gap).collect();
            let sum: f64 = gaps.iter().sum();
            self.max_gap_sum_err = self.max_gap_sum_err.max((sum - 2.0 * PI).abs());
            let hi = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = gaps.iter().copied().fold(f64::INFINITY, f64::min);
            if on_orbit {
                if let Some((phi, plo)) = self.prev_gap_extremes {
                    let worst = (hi - phi).max(plo - lo);
                    self.gap_contraction_worst = self.gap_contraction_worst.max(worst);
                }
                self.prev_gap_extremes = Some((hi, lo));
            } else {
                self.prev_gap_extremes = None;
            }
        }
    }

    pub fn finish(&self, last: Option<&TelemetryRecord>, failure: Option<&SimError>) -> InvariantReport {
        let advisory = !self.certified;
        let mut checks = Vec::new();
        let mut push = |name: &str, value: f64, tolerance: f64, passed: bool, advisory: bool| {
            checks.push(InvariantCheck {
                name: name.to_string(),
                passed,
                value,
                tolerance,
                advisory,
            });
        };

        push("completed", if failure.is_none() { 0.0 } else { 1.0 }, 0.0, failure.is_none(), false);
        push("finite", if self.all_finite { 0.0 } else { 1.0 }, 0.0, self.all_finite, false);
        let safety_bound = self.r_s - SAFETY_TOL;
        push("safety", self.min_hull, safety_bound, self.min_hull >= safety_bound, advisory);
        push(
            "estimate-floor",
            self.min_floor_margin,
            -FLOOR_TOL,
            self.min_floor_margin >= -FLOOR_TOL,
            advisory,
        );
        push(
            "underestimate",
            self.max_excess,
            UNDERESTIMATE_TOL,
            self.max_excess <= UNDERESTIMATE_TOL,
            advisory,
        );
        let worst_decrease = self.decrease.iter().copied().fold(0.0, f64::max);
        let allowed = MONOTONE_RATE_TOL * self.dt * self.steps.saturating_sub(1) as f64;
        push("error-monotone", worst_decrease, allowed, worst_decrease <= allowed, advisory);
        if self.multi {
            push(
                "gap-sum",
                self.max_gap_sum_err,
                GAP_SUM_TOL,
                self.max_gap_sum_err <= GAP_SUM_TOL,
                advisory,
            );
            push(
                "gap-contraction",
                self.gap_contraction_worst,
                GAP_CONTRACTION_TOL,
                self.gap_contraction_worst <= GAP_CONTRACTION_TOL,
                advisory,
            );
        }

        let mut final_distance_error = Vec::new();
        let mut final_speed_error = Vec::new();
        let mut final_max_abs_rho_tilde = f64::NAN;
        let mut final_gap_spread = None;
        if let Some(rec) = last {
            for (a, agent) in rec.agents.iter().enumerate() {
                final_distance_error.push(agent.circle_distance - self.ds[a]);
                final_speed_error.push(agent.tangential_speed - self.expected_speed[a]);
            }
            final_max_abs_rho_tilde = rec
                .agents
                .iter()
                .flat_map(|a| a.targets.iter().map(|t| t.rho_tilde.abs()))
                .fold(0.0, f64::max);
            if self.multi {
                let ideal = 2.0 * PI / rec.agents.len() as f64;
                final_gap_spread = Some(
                    rec.agents
                        .iter()
                        .filter_map(|a| a.gap)
                        .map(|g| (g - ideal).abs())
                        .fold(0.0, f64::max),
                );
            }
        }
        let rel_worst = |errs: &[f64], scale: &[f64]| {
            errs.iter()
                .zip(scale)
                .map(|(e, s)| (e / s).abs())
                .fold(if errs.is_empty() { f64::NAN } else { 0.0 }, f64::max)
        };
        let dist_rel = rel_worst(&final_distance_error, &self.ds);
        let speed_rel = rel_worst(&final_speed_error, &self.expected_speed);
        let ok = |x: f64, tol: f64| x.is_finite() && x <= tol;
        push(
            "distance-convergence",
            dist_rel,
            CONVERGENCE_REL_TOL,
            ok(dist_rel, CONVERGENCE_REL_TOL),
            advisory,
        );
        push(
            "speed-convergence",
            speed_rel,
            CONVERGENCE_REL_TOL,
            ok(speed_rel, CONVERGENCE_REL_TOL),
            advisory,
        );
        push(
            "localization",
            final_max_abs_rho_tilde,
            LOCALIZATION_TOL,
            ok(final_max_abs_rho_tilde, LOCALIZATION_TOL),
            advisory,
        );
        if self.multi {
            let spread = final_gap_spread.unwrap_or(f64::NAN);
            push("gap-convergence", spread, GAP_TOL, ok(spread, GAP_TOL), advisory);
        }

        let passed = self.certified && checks.iter().all(|c| c.passed || c.advisory);
        InvariantReport {
            schema_version: REPORT_SCHEMA_VERSION,
            scenario: self.scenario.clone(),
            seed: self.seed,
            integrator: self.integrator,
            bearing_rate_mode: self.mode,
            dt: self.dt,
            t_end: self.t_end,
            t_final: self.t_last,
            steps_observed: self.steps,
            certified: self.certified,
            warnings: self.warnings.clone(),
            completed: failure.is_none(),
            failure: failure.map(|e| e.to_string()),
            min_hull_distance: self.min_hull,
            max_abs_rho_tilde: self.max_abs_tilde,
            final_max_abs_rho_tilde,
            final_distance_error,
            final_speed_error,
            final_gap_spread,
            max_gap_sum_error: self.multi.then_some(self.max_gap_sum_err),
            min_agent_distance: self.multi.then_some(self.min_agent_dist),
            checks,
            passed,
        }
    }
}
