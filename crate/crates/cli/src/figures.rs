//! The five standard figures of a run.

use std::f64::consts::PI;
use std::path::Path;

use anyhow::{Context, Result};
use circumnav::geometry::min_enclosing_circle;
use circumnav::sim::{Scenario, TelemetryRecord};

use crate::plot::{Chart, Marker, Series};

pub const FILES: [&str; 5] = ["trajectory.svg", "distance.svg", "speed.svg", "errors.svg", "gaps.svg"];

fn over_time(recs: &[TelemetryRecord], f: impl Fn(&TelemetryRecord) -> Option<f64>) -> Vec<(f64, f64)> {
    recs.iter().filter_map(|r| f(r).map(|v| (r.t, v))).collect()
}

fn constant(recs: &[TelemetryRecord], v: f64) -> Vec<(f64, f64)> {
    match (recs.first(), recs.last()) {
        (Some(a), Some(b)) => vec![(a.t, v), (b.t, v)],
        _ => Vec::new(),
    }
}

pub fn trajectory(sc: &Scenario, recs: &[TelemetryRecord]) -> Chart {
    let mut c = Chart::new("Trajectories", "x [m]", "y [m]");
    c.equal_aspect = true;
    let n = sc.agents.len();
    for a in 0..n {
        c.series.push(Series::line(
            format!("agent {a}"),
            recs.iter().map(|r| (r.agents[a].position.x, r.agents[a].position.y)).collect(),
        ));
    }
    if let Ok((circle, _)) = min_enclosing_circle(&sc.targets) {
        let ring = |r: f64| -> Vec<(f64, f64)> {
            (0..=180)
                .map(|k| {
                    let th = 2.0 * PI * k as f64 / 180.0;
                    (circle.center.x + r * th.cos(), circle.center.y + r * th.sin())
                })
                .collect()
        };
        c.series.push(Series::dashed("min circle", ring(circle.radius)));
        let mut ds: Vec<f64> = sc.agents.iter().map(|a| a.d).collect();
        ds.sort_by(f64::total_cmp);
        ds.dedup();
        for d in ds {
            c.series.push(Series::dashed(format!("orbit d = {d}"), ring(circle.radius + d)));
        }
    }
    if let Some(last) = recs.last() {
        // final estimates of the first agent
        for (i, t) in last.agents[0].targets.iter().enumerate() {
            c.markers.push(Marker {
                label: format!("x̂{i}"),
                at: (t.estimate.x, t.estimate.y),
            });
        }
    }
    for (i, x) in sc.targets.iter().enumerate() {
        c.markers.push(Marker {
            label: format!("x{i}"),
            at: (x.x, x.y),
        });
    }
    c
}

pub fn distance(sc: &Scenario, recs: &[TelemetryRecord]) -> Chart {
    let mut c = Chart::new("Distance to the minimum circle", "t [s]", "ρ - r_t [m]");
    for (a, spec) in sc.agents.iter().enumerate() {
        c.series.push(Series::line(
            format!("agent {a}"),
            over_time(recs, |r| Some(r.agents[a].circle_distance)),
        ));
        c.series.push(Series::dashed(format!("d = {}", spec.d), constant(recs, spec.d)));
    }
    c.series.push(Series::dashed("r_s", constant(recs, sc.control.r_s)));
    c
}

pub fn speed(sc: &Scenario, recs: &[TelemetryRecord]) -> Chart {
    let mut c = Chart::new("Tangential speed", "t [s]", "speed [m/s]");
    for a in 0..sc.agents.len() {
        c.series.push(Series::line(
            format!("agent {a}"),
            over_time(recs, |r| Some(r.agents[a].tangential_speed)),
        ));
    }
    c.series.push(Series::dashed("α", constant(recs, sc.control.alpha)));
    c
}

pub fn errors(sc: &Scenario, recs: &[TelemetryRecord]) -> Chart {
    let mut c = Chart::new("Range estimation errors", "t [s]", "ρ̂ - ρ [m]");
    for a in 0..sc.agents.len() {
        for i in 0..sc.targets.len() {
            c.series.push(Series::line(
                format!("agent {a}, target {i}"),
                over_time(recs, |r| Some(r.agents[a].targets[i].rho_tilde)),
            ));
        }
    }
    c
}

pub fn gaps(sc: &Scenario, recs: &[TelemetryRecord]) -> Chart {
    let mut c = Chart::new("Angular gaps", "t [s]", "δφ [rad]");
    let n = sc.agents.len();
    if n < 2 {
        c.note = Some("single agent: no gaps".to_string());
        return c;
    }
    for a in 0..n {
        c.series.push(Series::line(format!("agent {a}"), over_time(recs, |r| r.agents[a].gap)));
    }
    c.series.push(Series::dashed("2π/n", constant(recs, 2.0 * PI / n as f64)));
    c
}

pub fn write_all(dir: &Path, sc: &Scenario, recs: &[TelemetryRecord]) -> Result<()> {
    let charts = [
        trajectory(sc, recs),
        distance(sc, recs),
        speed(sc, recs),
        errors(sc, recs),
        gaps(sc, recs),
    ];
    for (name, chart) in FILES.iter().zip(charts) {
        let path = dir.join(name);
        std::fs::write(&path, chart.render()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
