//! Scenario documents (TOML) and load-time validation.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::ControlParams;
use crate::estimator::{BearingRateMode, EstimatorParams};
use crate::geometry::{convex_hull, dist_to_hull, min_enclosing_circle, Vec2};
use crate::multiagent::{FormationParams, GainFn, RadiusScaling};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed scenario: {0}")]
    Parse(String),
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("override `{0}` does not name an existing key")]
    UnknownOverride(String),
    #[error("override `{0}` is not of the form key=value")]
    MalformedOverride(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    Euler,
    #[default]
    Rk4,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsDoc {
    k: f64,
    alpha: f64,
    r_s: f64,
    d: f64,
    h: f64,
    #[serde(default = "default_rho_hat0")]
    rho_hat0: f64,
    #[serde(default)]
    bearing_rate_mode: BearingRateMode,
}

fn default_rho_hat0() -> f64 {
    0.4
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FormationDoc {
    detection_radius: f64,
    #[serde(default)]
    gain: GainFn,
    #[serde(default)]
    radius_scaling: RadiusScaling,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimDoc {
    #[serde(default = "default_dt")]
    dt: f64,
    t_end: f64,
    #[serde(default)]
    integrator: Integrator,
    #[serde(default = "default_stride")]
    log_stride: usize,
    #[serde(default)]
    seed: u64,
}

fn default_dt() -> f64 {
    1e-3
}

fn default_stride() -> usize {
    10
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentDoc {
    position: Vec2,
    #[serde(default)]
    d: Option<f64>,
    #[serde(default)]
    rho_hats: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    #[serde(default)]
    name: String,
    targets: Vec<Vec2>,
    params: ParamsDoc,
    #[serde(default)]
    formation: Option<FormationDoc>,
    sim: SimDoc,
    agents: Vec<AgentDoc>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentSpec {
    pub initial_position: Vec2,
    /// One initial range estimate per target.
    pub initial_rho_hats: Vec<f64>,
    /// Desired distance outside the minimum circle.
    pub d: f64,
}

/// Result of checking the standing assumptions against the initial state.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AssumptionCheck {
    /// Start clear of the safety shell: `r_s <= D(0)`.
    pub initial_clearance: bool,
    /// Parameter ordering: `h < r_s < d`.
    pub parameter_order: bool,
    /// Initial underestimates: `h <= rho_hat(0) <= rho(0)`.
    pub initial_estimates: bool,
    /// Multi-agent detection range `M >= 2 r sin(π/n)` (always true for one agent).
    pub detection_range: bool,
    pub warnings: Vec<String>,
}

impl AssumptionCheck {
    /// Safety and convergence guarantees apply only when this holds.
    pub fn certified(&self) -> bool {
        self.initial_clearance && self.parameter_order && self.initial_estimates
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub targets: Vec<Vec2>,
    pub agents: Vec<AgentSpec>,
    pub control: ControlParams,
    pub estimator: EstimatorParams,
    pub formation: FormationParams,
    pub dt: f64,
    pub t_end: f64,
    pub integrator: Integrator,
    pub log_stride: usize,
    pub seed: u64,
    pub assumptions: AssumptionCheck,
}

impl Scenario {
    pub fn from_toml_str(src: &str) -> Result<Self, ScenarioError> {
        Self::from_toml_str_with_overrides(src, &[])
    }

    /// Parses a document after applying `key.path=value` overrides to it.
    pub fn from_toml_str_with_overrides(
        src: &str,
        overrides: &[String],
    ) -> Result<Self, ScenarioError> {
        let mut table: toml::Table =
            toml::from_str(src).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        for ov in overrides {
            apply_override(&mut table, ov)?;
        }
        let doc: ScenarioDoc = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| ScenarioError::Parse(e.to_string()))?;
        Self::from_doc(doc)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, ScenarioError> {
        let src = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str_with_overrides(&src, overrides)
    }

    fn from_doc(doc: ScenarioDoc) -> Result<Self, ScenarioError> {
        let invalid = |field: &str, reason: String| ScenarioError::Invalid {
            field: field.to_string(),
            reason,
        };
        if doc.targets.is_empty() {
            return Err(invalid("targets", "at least one target is required".into()));
        }
        if doc.agents.is_empty() {
            return Err(invalid("agents", "at least one agent is required".into()));
        }
        let p = &doc.params;
        for (field, value) in [
            ("params.k", p.k),
            ("params.alpha", p.alpha),
            ("params.r_s", p.r_s),
            ("params.d", p.d),
            ("params.h", p.h),
            ("sim.dt", doc.sim.dt),
            ("sim.t_end", doc.sim.t_end),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(invalid(field, format!("must be positive and finite, got {value}")));
            }
        }
        if doc.sim.log_stride == 0 {
            return Err(invalid("sim.log_stride", "must be at least 1".into()));
        }
        if doc.targets.iter().any(|t| !t.is_finite()) {
            return Err(invalid("targets", "coordinates must be finite".into()));
        }

        let n_targets = doc.targets.len();
        let mut agents = Vec::with_capacity(doc.agents.len());
        for (a, ad) in doc.agents.iter().enumerate() {
            if !ad.position.is_finite() {
                return Err(invalid(&format!("agents[{a}].position"), "must be finite".into()));
            }
            let rho_hats = ad.rho_hats.clone().unwrap_or_else(|| vec![p.rho_hat0; n_targets]);
            if rho_hats.len() != n_targets {
                return Err(invalid(
                    &format!("agents[{a}].rho_hats"),
                    format!("expected {n_targets} entries, got {}", rho_hats.len()),
                ));
            }
            let d = ad.d.unwrap_or(p.d);
            if !(d.is_finite() && d > 0.0) {
                return Err(invalid(&format!("agents[{a}].d"), format!("must be positive, got {d}")));
            }
            agents.push(AgentSpec {
                initial_position: ad.position,
                initial_rho_hats: rho_hats,
                d,
            });
        }

        let formation = match &doc.formation {
            Some(f) => FormationParams {
                detection_radius: f.detection_radius,
                gain: f.gain,
                radius_scaling: f.radius_scaling,
                per_agent_d: agents.iter().map(|a| a.d).collect(),
            },
            None if agents.len() == 1 => FormationParams {
                detection_radius: 0.0,
                gain: GainFn::default(),
                radius_scaling: RadiusScaling::default(),
                per_agent_d: vec![agents[0].d],
            },
            None => {
                return Err(invalid(
                    "formation",
                    "multi-agent scenarios need a [formation] section".into(),
                ))
            }
        };

        let mut sc = Scenario {
            name: doc.name,
            targets: doc.targets,
            agents,
            control: ControlParams {
                k: p.k,
                alpha: p.alpha,
                r_s: p.r_s,
                d: p.d,
            },
            estimator: EstimatorParams {
                h: p.h,
                bearing_rate_mode: p.bearing_rate_mode,
            },
            formation,
            dt: doc.sim.dt,
            t_end: doc.sim.t_end,
            integrator: doc.sim.integrator,
            log_stride: doc.sim.log_stride,
            seed: doc.sim.seed,
            assumptions: AssumptionCheck::default(),
        };
        sc.assumptions = check_assumptions(&sc);
        Ok(sc)
    }

    /// Control parameters as seen by agent `a` (its own desired distance).
    pub fn control_for(&self, a: usize) -> ControlParams {
        ControlParams {
            d: self.agents[a].d,
            ..self.control
        }
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn is_multi_agent(&self) -> bool {
        self.agents.len() > 1
    }
}

fn check_assumptions(sc: &Scenario) -> AssumptionCheck {
    let mut out = AssumptionCheck {
        initial_clearance: true,
        parameter_order: true,
        initial_estimates: true,
        detection_range: true,
        warnings: Vec::new(),
    };
    let hull = convex_hull(&sc.targets).expect("targets validated non-empty and finite");
    let (h, r_s) = (sc.estimator.h, sc.control.r_s);

    for (a, agent) in sc.agents.iter().enumerate() {
        let d0 = dist_to_hull(agent.initial_position, &hull);
        if d0 < r_s {
            out.initial_clearance = false;
            out.warnings.push(format!(
                "agent {a}: initial hull distance {d0:.6} is below r_s = {r_s}"
            ));
        }
        if !(h < r_s && r_s < agent.d) {
            out.parameter_order = false;
            out.warnings.push(format!(
                "agent {a}: expected h < r_s < d, got h = {h}, r_s = {r_s}, d = {}",
                agent.d
            ));
        }
        for (i, (&rh, target)) in agent.initial_rho_hats.iter().zip(&sc.targets).enumerate() {
            let rho = agent.initial_position.distance(*target);
            if !(h <= rh && rh <= rho) {
                out.initial_estimates = false;
                out.warnings.push(format!(
                    "agent {a}, target {i}: expected h <= rho_hat(0) <= rho(0), got {rh} vs [{h}, {rho:.6}]"
                ));
            }
        }
    }

    if sc.is_multi_agent() {
        let (circle, _) = min_enclosing_circle(&sc.targets).expect("targets validated");
        let d_max = sc.agents.iter().map(|a| a.d).fold(f64::MIN, f64::max);
        let n = sc.agents.len() as f64;
        let needed = 2.0 * (circle.radius + d_max) * (PI / n).sin();
        if sc.formation.detection_radius < needed {
            out.detection_range = false;
            out.warnings.push(format!(
                "detection radius {} is below 2 r sin(π/n) = {needed:.6}; neighbors may be lost at the formation",
                sc.formation.detection_radius
            ));
        }
    }
    out
}

fn parse_override_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match toml::from_str::<toml::Table>(&wrapped) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Applies `a.b.c=value` to a parsed document. Numeric segments index arrays.
fn apply_override(table: &mut toml::Table, ov: &str) -> Result<(), ScenarioError> {
    let (key, raw) = ov
        .split_once('=')
        .ok_or_else(|| ScenarioError::MalformedOverride(ov.to_string()))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(ScenarioError::MalformedOverride(ov.to_string()));
    }
    let unknown = || ScenarioError::UnknownOverride(key.to_string());

    let segments: Vec<&str> = key.split('.').collect();
    let (last, path) = segments.split_last().expect("split yields one segment");
    let mut cur: &mut toml::Value = table
        .get_mut(path.first().copied().unwrap_or(last))
        .ok_or_else(unknown)?;
    if path.is_empty() {
        *cur = parse_override_value(raw.trim());
        return Ok(());
    }
    for seg in path.iter().skip(1).chain(std::iter::once(last)) {
        cur = match cur {
            toml::Value::Table(t) => t.get_mut(*seg).ok_or_else(unknown)?,
            toml::Value::Array(a) => {
                let idx: usize = seg.parse().map_err(|_| unknown())?;
                a.get_mut(idx).ok_or_else(unknown)?
            }
            _ => return Err(unknown()),
        };
    }
    *cur = parse_override_value(raw.trim());
    Ok(())
}
