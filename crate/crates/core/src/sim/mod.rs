//! Fixed-step closed-loop simulation.
//!
//! The coupled state is every agent position plus one range estimate per
//! agent and target. Both are advanced together by the configured integrator.
//! Discontinuities in the compensator and the controller are evaluated
//! pointwise at each stage.

mod report;
mod scenario;
mod telemetry;

pub use report::{InvariantCheck, InvariantMonitor, InvariantReport, REPORT_SCHEMA_VERSION};
pub use scenario::{AgentSpec, AssumptionCheck, Integrator, Scenario, ScenarioError};
pub use telemetry::{csv_header, write_csv, write_csv_row, AgentRecord, TargetRecord, TelemetryRecord};

use thiserror::Error;

use crate::controller::{control_input, estimation_geometry, CircumnavState, ControlError};
use crate::estimator::{
    analytic_bearing_rate, bearing_rate, compensator_rate, measure_bearing, BearingRateMode,
    BearingSample, CompensatorState,
};
use crate::geometry::{
    convex_hull, dist_to_hull, min_enclosing_circle, Circle, ConvexPolygon, UnitVec2, Vec2,
};
use crate::multiagent::{
    angular_gaps, multi_control_input, neighbor_geometry, AgentView, FormationError,
    NeighborGeometry,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("agent {agent} reached its estimated circle center at t = {t}")]
    AtCenter { agent: usize, t: f64 },
    #[error("agent {agent} coincides with target {target} at t = {t}")]
    ZeroRange { agent: usize, target: usize, t: f64 },
    #[error("agents {a} and {b} coincide at t = {t}")]
    CoincidentAgents { a: usize, b: usize, t: f64 },
    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },
    #[error("estimated geometry failed for agent {agent} at t = {t}: {reason}")]
    Geometry { agent: usize, t: f64, reason: String },
    #[error("world does not match the scenario: {0}")]
    Mismatch(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub t: f64,
    pub agent_positions: Vec<Vec2>,
    /// Indexed `[agent][target]`.
    pub compensators: Vec<Vec<CompensatorState>>,
    /// Bearings measured at the start of the previous step, `[agent][target]`.
    pub last_bearings: Vec<Vec<BearingSample>>,
}

impl WorldState {
    /// Initial state of a scenario at `t = 0`.
    pub fn initial(sc: &Scenario) -> Result<Self, SimError> {
        let h = sc.estimator.h;
        let compensators = sc
            .agents
            .iter()
            .map(|a| a.initial_rho_hats.iter().map(|&r| CompensatorState::new(r, h)).collect())
            .collect();
        let positions: Vec<Vec2> = sc.agents.iter().map(|a| a.initial_position).collect();
        let last_bearings = measure_all(sc, &positions, 0.0)?
            .into_iter()
            .map(|row| row.into_iter().map(|phi| BearingSample { phi, t: 0.0 }).collect())
            .collect();
        Ok(WorldState {
            t: 0.0,
            agent_positions: positions,
            compensators,
            last_bearings,
        })
    }

    fn rho_hats(&self) -> Vec<Vec<f64>> {
        self.compensators
            .iter()
            .map(|row| row.iter().map(|c| c.rho_hat).collect())
            .collect()
    }

    fn check_shape(&self, sc: &Scenario) -> Result<(), SimError> {
        let (na, nt) = (sc.agents.len(), sc.targets.len());
        let ok = self.agent_positions.len() == na
            && self.compensators.len() == na
            && self.last_bearings.len() == na
            && self.compensators.iter().all(|r| r.len() == nt)
            && self.last_bearings.iter().all(|r| r.len() == nt);
        if ok {
            Ok(())
        } else {
            Err(SimError::Mismatch(format!(
                "expected {na} agents x {nt} targets"
            )))
        }
    }
}

/// Ground-truth geometry of the targets, used only for telemetry.
#[derive(Debug, Clone)]
struct Truth {
    hull: ConvexPolygon,
    circle: Circle,
}

impl Truth {
    fn new(sc: &Scenario) -> Self {
        Truth {
            hull: convex_hull(&sc.targets).expect("scenario targets are validated"),
            circle: min_enclosing_circle(&sc.targets).expect("scenario targets are validated").0,
        }
    }
}

fn measure_all(sc: &Scenario, positions: &[Vec2], t: f64) -> Result<Vec<Vec<UnitVec2>>, SimError> {
    positions
        .iter()
        .enumerate()
        .map(|(agent, &y)| {
            sc.targets
                .iter()
                .enumerate()
                .map(|(target, &x)| {
                    measure_bearing(y, x).map_err(|_| SimError::ZeroRange { agent, target, t })
                })
                .collect()
        })
        .collect()
}

enum Rates<'a> {
    Held(&'a [Vec<Vec2>]),
    Analytic,
}

/// Closed-loop right-hand side at one state, with the intermediate quantities
/// telemetry needs.
struct Eval {
    velocities: Vec<Vec2>,
    rho_hat_dots: Vec<Vec<f64>>,
    bearings: Vec<Vec<UnitVec2>>,
    rates: Vec<Vec<Vec2>>,
    states: Vec<CircumnavState>,
    geoms: Vec<Option<NeighborGeometry>>,
    views: Vec<AgentView>,
}

fn evaluate(
    sc: &Scenario,
    positions: &[Vec2],
    rho_hats: &[Vec<f64>],
    rates: Rates<'_>,
    t: f64,
) -> Result<Eval, SimError> {
    if positions.iter().any(|p| !p.is_finite()) || rho_hats.iter().flatten().any(|r| !r.is_finite()) {
        return Err(SimError::NonFinite { t });
    }
    let bearings = measure_all(sc, positions, t)?;
    let mut states = Vec::with_capacity(positions.len());
    for (a, (&y, row)) in positions.iter().zip(rho_hats).enumerate() {
        let estimates: Vec<Vec2> = bearings[a]
            .iter()
            .zip(row)
            .map(|(phi, &r)| y + phi.as_vec() * r)
            .collect();
        let state = estimation_geometry(y, &estimates, sc.agents[a].d).map_err(|e| match e {
            ControlError::AtCenter => SimError::AtCenter { agent: a, t },
            ControlError::Geometry(g) => SimError::Geometry {
                agent: a,
                t,
                reason: g.to_string(),
            },
        })?;
        states.push(state);
    }

    let views: Vec<AgentView> = positions
        .iter()
        .zip(&states)
        .enumerate()
        .map(|(a, (&y, s))| AgentView::new(a, y, s))
        .collect();

    let mut velocities = Vec::with_capacity(positions.len());
    let mut geoms = Vec::with_capacity(positions.len());
    if sc.is_multi_agent() {
        for (a, state) in states.iter().enumerate() {
            let geom = neighbor_geometry(&views, a, sc.formation.detection_radius).map_err(
                |FormationError::CoincidentAgents(i, j)| SimError::CoincidentAgents { a: i, b: j, t },
            )?;
            velocities.push(multi_control_input(state, &geom, &sc.control_for(a), &sc.formation, a));
            geoms.push(Some(geom));
        }
    } else {
        velocities.push(control_input(&states[0], &sc.control_for(0)));
        geoms.push(None);
    }

    let h = sc.estimator.h;
    let mut rate_rows = Vec::with_capacity(positions.len());
    let mut rho_hat_dots = Vec::with_capacity(positions.len());
    for (a, &y) in positions.iter().enumerate() {
        let vel = velocities[a];
        let mut rate_row = Vec::with_capacity(sc.targets.len());
        let mut dot_row = Vec::with_capacity(sc.targets.len());
        for (i, &x) in sc.targets.iter().enumerate() {
            let phi_dot = match rates {
                Rates::Held(held) => held[a][i],
                Rates::Analytic => analytic_bearing_rate(y, x, vel)
                    .map_err(|_| SimError::ZeroRange { agent: a, target: i, t })?,
            };
            dot_row.push(compensator_rate(rho_hats[a][i], h, bearings[a][i], phi_dot, vel));
            rate_row.push(phi_dot);
        }
        rate_rows.push(rate_row);
        rho_hat_dots.push(dot_row);
    }

    Ok(Eval {
        velocities,
        rho_hat_dots,
        bearings,
        rates: rate_rows,
        states,
        geoms,
        views,
    })
}

fn displaced(
    positions: &[Vec2],
    rho_hats: &[Vec<f64>],
    k: &Eval,
    scale: f64,
) -> (Vec<Vec2>, Vec<Vec<f64>>) {
    let p = positions
        .iter()
        .zip(&k.velocities)
        .map(|(&y, &v)| y + v * scale)
        .collect();
    let r = rho_hats
        .iter()
        .zip(&k.rho_hat_dots)
        .map(|(row, drow)| row.iter().zip(drow).map(|(&r, &dr)| r + dr * scale).collect())
        .collect();
    (p, r)
}

fn build_record(sc: &Scenario, truth: &Truth, t: f64, positions: &[Vec2], rho_hats: &[Vec<f64>], ev: &Eval) -> TelemetryRecord {
    let gaps = if sc.is_multi_agent() {
        Some(angular_gaps(&ev.views))
    } else {
        None
    };
    let agents = positions
        .iter()
        .enumerate()
        .map(|(a, &y)| {
            let vel = ev.velocities[a];
            let to_center = truth.circle.center - y;
            let rho_c = to_center.norm();
            let tangential_speed = UnitVec2::new(to_center)
                .map_or(0.0, |u| u.rotate_cw_90().as_vec().dot(vel));
            let targets = sc
                .targets
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    let phi = ev.bearings[a][i];
                    let phi_bar = phi.rotate_cw_90().as_vec();
                    let rho = y.distance(x);
                    let rho_hat = rho_hats[a][i];
                    let v_bar = phi_bar.dot(vel);
                    TargetRecord {
                        rho,
                        rho_hat,
                        rho_tilde: rho_hat - rho,
                        rho_hat_dot: ev.rho_hat_dots[a][i],
                        estimate: y + phi.as_vec() * rho_hat,
                        phi_dot: ev.rates[a][i],
                        v: phi.as_vec().dot(vel),
                        v_bar,
                        omega: v_bar / rho,
                    }
                })
                .collect();
            let geom = ev.geoms[a].as_ref();
            AgentRecord {
                position: y,
                velocity: vel,
                hull_distance: dist_to_hull(y, &truth.hull),
                circle_distance: rho_c - truth.circle.radius,
                tangential_speed,
                est_center: ev.states[a].circle.center,
                est_radius: ev.states[a].circle.radius,
                gap: gaps.as_ref().map(|g| g[a]),
                sigma_plus: geom.map(|g| g.sigma_plus),
                sigma_minus: geom.map(|g| g.sigma_minus),
                targets,
            }
        })
        .collect();
    let min_agent_distance = if positions.len() > 1 {
        let mut best = f64::INFINITY;
        for (a, p) in positions.iter().enumerate() {
            for q in &positions[a + 1..] {
                best = best.min(p.distance(*q));
            }
        }
        Some(best)
    } else {
        None
    };
    TelemetryRecord {
        t,
        agents,
        min_agent_distance,
    }
}

/// Stepper bound to one scenario. Caches the ground-truth target geometry.
#[derive(Debug, Clone)]
pub struct Simulation<'a> {
    scenario: &'a Scenario,
    truth: Truth,
    world: WorldState,
    t0: f64,
    steps: u64,
}

impl<'a> Simulation<'a> {
    pub fn new(scenario: &'a Scenario) -> Result<Self, SimError> {
        let world = WorldState::initial(scenario)?;
        Self::from_world(scenario, world)
    }

    /// Continues from an arbitrary state, e.g. a snapshot of another run.
    pub fn from_world(scenario: &'a Scenario, world: WorldState) -> Result<Self, SimError> {
        world.check_shape(scenario)?;
        Ok(Simulation {
            scenario,
            truth: Truth::new(scenario),
            t0: world.t,
            world,
            steps: 0,
        })
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn into_world(self) -> WorldState {
        self.world
    }

    /// Telemetry of the current state without advancing it.
    pub fn observe(&self) -> Result<TelemetryRecord, SimError> {
        let (_, record) = self.prepare()?;
        Ok(record)
    }

    fn held_rates(&self, bearings: &[Vec<UnitVec2>]) -> Vec<Vec<Vec2>> {
        let t = self.world.t;
        self.world
            .last_bearings
            .iter()
            .zip(bearings)
            .map(|(prev_row, row)| {
                prev_row
                    .iter()
                    .zip(row)
                    .map(|(&prev, &phi)| {
                        bearing_rate(prev, BearingSample { phi, t }).unwrap_or(Vec2::ZERO)
                    })
                    .collect()
            })
            .collect()
    }

    /// First-stage evaluation at the current state and its telemetry.
    fn prepare(&self) -> Result<(Eval, TelemetryRecord), SimError> {
        let sc = self.scenario;
        let w = &self.world;
        let rho_hats = w.rho_hats();
        let ev = match sc.estimator.bearing_rate_mode {
            BearingRateMode::AnalyticOracle => {
                evaluate(sc, &w.agent_positions, &rho_hats, Rates::Analytic, w.t)?
            }
            BearingRateMode::NumericBackward => {
                let bearings = measure_all(sc, &w.agent_positions, w.t)?;
                let held = self.held_rates(&bearings);
                evaluate(sc, &w.agent_positions, &rho_hats, Rates::Held(&held), w.t)?
            }
        };
        let record = build_record(sc, &self.truth, w.t, &w.agent_positions, &rho_hats, &ev);
        Ok((ev, record))
    }

    /// Advances by one `dt` and returns the telemetry of the pre-step state.
    pub fn step(&mut self) -> Result<TelemetryRecord, SimError> {
        let sc = self.scenario;
        let dt = sc.dt;
        let (k1, record) = self.prepare()?;
        let w = &self.world;
        let y0 = &w.agent_positions;
        let r0 = w.rho_hats();
        let t = w.t;

        let (positions, rho_hats) = match sc.integrator {
            Integrator::Euler => displaced(y0, &r0, &k1, dt),
            Integrator::Rk4 => {
                let held = k1.rates.clone();
                let rates = || match sc.estimator.bearing_rate_mode {
                    BearingRateMode::AnalyticOracle => Rates::Analytic,
                    BearingRateMode::NumericBackward => Rates::Held(&held),
                };
                let (y2, r2) = displaced(y0, &r0, &k1, dt / 2.0);
                let k2 = evaluate(sc, &y2, &r2, rates(), t + dt / 2.0)?;
                let (y3, r3) = displaced(y0, &r0, &k2, dt / 2.0);
                let k3 = evaluate(sc, &y3, &r3, rates(), t + dt / 2.0)?;
                let (y4, r4) = displaced(y0, &r0, &k3, dt);
                let k4 = evaluate(sc, &y4, &r4, rates(), t + dt)?;

                let positions = (0..y0.len())
                    .map(|a| {
                        let v = (k1.velocities[a]
                            + k2.velocities[a] * 2.0
                            + k3.velocities[a] * 2.0
                            + k4.velocities[a])
                            / 6.0;
                        y0[a] + v * dt
                    })
                    .collect();
                let rho_hats = (0..y0.len())
                    .map(|a| {
                        (0..r0[a].len())
                            .map(|i| {
                                let dr = (k1.rho_hat_dots[a][i]
                                    + 2.0 * k2.rho_hat_dots[a][i]
                                    + 2.0 * k3.rho_hat_dots[a][i]
                                    + k4.rho_hat_dots[a][i])
                                    / 6.0;
                                r0[a][i] + dr * dt
                            })
                            .collect()
                    })
                    .collect();
                (positions, rho_hats)
            }
        };

        self.steps += 1;
        let t_next = self.t0 + self.steps as f64 * dt;
        let h = sc.estimator.h;
        let last_bearings = k1
            .bearings
            .iter()
            .map(|row| row.iter().map(|&phi| BearingSample { phi, t }).collect())
            .collect();
        let compensators = rho_hats
            .into_iter()
            .map(|row: Vec<f64>| row.into_iter().map(|r| CompensatorState::new(r.max(h), h)).collect())
            .collect();
        self.world = WorldState {
            t: t_next,
            agent_positions: positions,
            compensators,
            last_bearings,
        };
        Ok(record)
    }
}

/// One `dt` advance of `world` under `scenario`.
pub fn step(world: &WorldState, scenario: &Scenario) -> Result<(WorldState, TelemetryRecord), SimError> {
    let mut sim = Simulation::from_world(scenario, world.clone())?;
    let record = sim.step()?;
    Ok((sim.into_world(), record))
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Records at the logging stride plus one at the final time.
    pub telemetry: Vec<TelemetryRecord>,
    pub report: InvariantReport,
    /// Cause of an early stop, if any. Telemetry then ends at the last good step.
    pub failure: Option<SimError>,
    pub final_world: Option<WorldState>,
}

/// Runs a scenario to `t_end`, checking invariants at every step.
pub fn run(scenario: &Scenario) -> RunOutput {
    run_with(scenario, |_| {})
}

/// Like [`run`], also handing every logged record to `sink` as it is produced.
pub fn run_with(scenario: &Scenario, mut sink: impl FnMut(&TelemetryRecord)) -> RunOutput {
    let mut telemetry = Vec::new();
    let mut monitor = InvariantMonitor::new(scenario);
    let mut log = |rec: TelemetryRecord, telemetry: &mut Vec<TelemetryRecord>| {
        sink(&rec);
        telemetry.push(rec);
    };

    let mut sim = match Simulation::new(scenario) {
        Ok(s) => s,
        Err(e) => {
            let report = monitor.finish(None, Some(&e));
            return RunOutput {
                telemetry,
                report,
                failure: Some(e),
                final_world: None,
            };
        }
    };

    let n = scenario.n_steps();
    let stride = scenario.log_stride;
    let mut failure = None;
    for k in 0..n {
        match sim.step() {
            Ok(rec) => {
                monitor.observe(&rec);
                if k % stride == 0 {
                    log(rec, &mut telemetry);
                }
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    let last = if failure.is_none() {
        match sim.observe() {
            Ok(rec) => {
                monitor.observe(&rec);
                log(rec.clone(), &mut telemetry);
                Some(rec)
            }
            Err(e) => {
                failure = Some(e);
                None
            }
        }
    } else {
        None
    };
    let report = monitor.finish(last.as_ref(), failure.as_ref());
    RunOutput {
        telemetry,
        report,
        failure,
        final_world: Some(sim.into_world()),
    }
}
