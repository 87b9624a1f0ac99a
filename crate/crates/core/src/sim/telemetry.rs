//! Per-step observables and their CSV encoding.

use std::io::{self, Write};

use crate::geometry::Vec2;

#[derive(Debug, Clone, PartialEq)]
pub struct TargetRecord {
    /// True range.
    pub rho: f64,
    pub rho_hat: f64,
    /// `rho_hat - rho`.
    pub rho_tilde: f64,
    pub rho_hat_dot: f64,
    /// `y + rho_hat * phi`.
    pub estimate: Vec2,
    /// Bearing rate fed to the compensator.
    pub phi_dot: Vec2,
    /// Radial velocity `phi . ydot`.
    pub v: f64,
    /// Cross-bearing velocity `phi_bar . ydot`.
    pub v_bar: f64,
    /// `v_bar / rho`.
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentRecord {
    pub position: Vec2,
    pub velocity: Vec2,
    /// Distance to the convex hull of the true targets.
    pub hull_distance: f64,
    /// Distance to the true minimum circle, `rho_c - r_t`.
    pub circle_distance: f64,
    /// Velocity along the clockwise normal of the direction to the true center.
    pub tangential_speed: f64,
    pub est_center: Vec2,
    pub est_radius: f64,
    /// Angular gap to the next agent counterclockwise (multi-agent only).
    pub gap: Option<f64>,
    pub sigma_plus: Option<f64>,
    pub sigma_minus: Option<f64>,
    pub targets: Vec<TargetRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TelemetryRecord {
    pub t: f64,
    pub agents: Vec<AgentRecord>,
    pub min_agent_distance: Option<f64>,
}

impl TelemetryRecord {
    pub fn is_finite(&self) -> bool {
        let opt = |x: Option<f64>| x.map_or(true, f64::is_finite);
        self.t.is_finite()
            && opt(self.min_agent_distance)
            && self.agents.iter().all(|a| {
                a.position.is_finite()
                    && a.velocity.is_finite()
                    && a.hull_distance.is_finite()
                    && a.circle_distance.is_finite()
                    && a.tangential_speed.is_finite()
                    && a.est_center.is_finite()
                    && a.est_radius.is_finite()
                    && opt(a.gap)
                    && opt(a.sigma_plus)
                    && opt(a.sigma_minus)
                    && a.targets.iter().all(|t| {
                        [t.rho, t.rho_hat, t.rho_tilde, t.rho_hat_dot, t.v, t.v_bar, t.omega]
                            .iter()
                            .all(|x| x.is_finite())
                            && t.estimate.is_finite()
                            && t.phi_dot.is_finite()
                    })
            })
    }
}

const AGENT_COLUMNS: [&str; 13] = [
    "x", "y", "vx", "vy", "hull_dist", "circle_dist", "tan_speed", "est_cx", "est_cy", "est_r",
    "gap", "sigma_plus", "sigma_minus",
];

const TARGET_COLUMNS: [&str; 10] = [
    "rho", "rho_hat", "rho_tilde", "rho_hat_dot", "est_x", "est_y", "v", "v_bar", "omega",
    "phi_dot_norm",
];

/// Column names for `n_agents` agents and `n_targets` targets.
pub fn csv_header(n_agents: usize, n_targets: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    for a in 0..n_agents {
        cols.extend(AGENT_COLUMNS.iter().map(|c| format!("a{a}_{c}")));
        for i in 0..n_targets {
            cols.extend(TARGET_COLUMNS.iter().map(|c| format!("a{a}_t{i}_{c}")));
        }
    }
    cols.push("min_agent_dist".to_string());
    cols
}

fn num(x: f64) -> String {
    format!("{x:.8e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn write_csv_row<W: Write>(out: &mut W, rec: &TelemetryRecord) -> io::Result<()> {
    let mut cells = vec![num(rec.t)];
    for a in &rec.agents {
        cells.extend([
            num(a.position.x),
            num(a.position.y),
            num(a.velocity.x),
            num(a.velocity.y),
            num(a.hull_distance),
            num(a.circle_distance),
            num(a.tangential_speed),
            num(a.est_center.x),
            num(a.est_center.y),
            num(a.est_radius),
            opt(a.gap),
            opt(a.sigma_plus),
            opt(a.sigma_minus),
        ]);
        for t in &a.targets {
            cells.extend([
                num(t.rho),
                num(t.rho_hat),
                num(t.rho_tilde),
                num(t.rho_hat_dot),
                num(t.estimate.x),
                num(t.estimate.y),
                num(t.v),
                num(t.v_bar),
                num(t.omega),
                num(t.phi_dot.norm()),
            ]);
        }
    }
    cells.push(opt(rec.min_agent_distance));
    writeln!(out, "{}", cells.join(","))
}

/// Header plus one row per record. Empty input writes nothing.
pub fn write_csv<W: Write>(out: &mut W, records: &[TelemetryRecord]) -> io::Result<()> {
    let Some(first) = records.first() else {
        return Ok(());
    };
    let n_targets = first.agents.first().map_or(0, |a| a.targets.len());
    writeln!(out, "{}", csv_header(first.agents.len(), n_targets).join(","))?;
    for rec in records {
        write_csv_row(out, rec)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record() -> TelemetryRecord {
        TelemetryRecord {
            t: 0.01,
            agents: vec![AgentRecord {
                position: Vec2::new(8.0, 0.0),
                velocity: Vec2::new(-13.046, 9.969),
                hull_distance: 5.570860145311556,
                circle_distance: 3.5,
                tangential_speed: 5.0,
                est_center: Vec2::new(1.0, 2.5),
                est_radius: 1.0 / 3.0,
                gap: None,
                sigma_plus: None,
                sigma_minus: None,
                targets: vec![TargetRecord {
                    rho: 10.0,
                    rho_hat: 0.4,
                    rho_tilde: -9.6,
                    rho_hat_dot: 0.0,
                    estimate: Vec2::new(7.6, 0.0),
                    phi_dot: Vec2::ZERO,
                    v: 1.0,
                    v_bar: -2.0,
                    omega: -0.2,
                }],
            }],
            min_agent_distance: None,
        }
    }

    #[test]
    fn header_layout() {
        let h = csv_header(2, 1);
        assert_eq!(h.len(), 1 + 2 * (13 + 10) + 1);
        assert_eq!(h[0], "t");
        assert_eq!(h[1], "a0_x");
        assert_eq!(h[14], "a0_t0_rho");
        assert_eq!(h[24], "a1_x");
        assert_eq!(h.last().unwrap(), "min_agent_dist");
    }

    #[test]
    fn rows_use_nine_significant_digits() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[record()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(header.len(), row.len());
        assert_eq!(row[0], "1.00000000e-2");
        assert_eq!(row[5], "5.57086015e0");
        assert_eq!(row[10], "3.33333333e-1");
        // single agent: gap and sigma columns and the pairwise distance stay empty
        assert_eq!(row[11], "");
        assert_eq!(*row.last().unwrap(), "");
        let parsed: f64 = row[5].parse().unwrap();
        assert!((parsed - 5.570860145311556).abs() < 1e-8);
    }

    #[test]
    fn finiteness() {
        let mut r = record();
        assert!(r.is_finite());
        r.agents[0].targets[0].omega = f64::NAN;
        assert!(!r.is_finite());
    }
}
