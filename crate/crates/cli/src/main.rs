mod figures;
mod plot;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use circumnav::geometry::oracle::{hull_distance_brute_force, min_circle_brute_force};
use circumnav::geometry::{convex_hull, dist_to_hull, min_enclosing_circle, prj_to_hull, Vec2};
use circumnav::presets;
use circumnav::sim::{run, write_csv, Scenario};

#[derive(Parser)]
#[command(name = "circumnav", version, about = "Bearing-only circumnavigation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write telemetry.csv and report.json.
    Run {
        /// Scenario file; `.toml` is appended if the path has no extension and does not exist.
        scenario: PathBuf,
        /// Output directory.
        #[arg(long, env = "CIRCUMNAV_OUT", default_value = "out")]
        out: PathBuf,
        /// Replace a value in the scenario, e.g. `params.d=0.5` or `agents.0.position=[1.0, 2.0]`.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Also write SVG figures.
        #[arg(long)]
        plot: bool,
        /// Exit with status 2 unless the run is certified and every invariant holds.
        #[arg(long)]
        verify: bool,
    },
    /// Compare the fast geometry routines with brute-force enumeration.
    Oracle {
        #[command(subcommand)]
        query: OracleQuery,
    },
}

#[derive(Subcommand)]
enum OracleQuery {
    /// Minimum enclosing circle of points such as "(-2,0) (4,5) (2,0)".
    Mincircle { points: String },
    /// Distance from a point to the convex hull of a point set.
    Hulldist {
        point: String,
        /// Hull points; defaults to the Case-1 targets.
        #[arg(long)]
        points: Option<String>,
    },
}

/// Parses "(x,y) (x,y) ..." or "x,y x,y ...".
fn parse_points(s: &str) -> Result<Vec<Vec2>> {
    let cleaned = s.replace(['(', ')'], " ");
    let mut pts = Vec::new();
    let mut pending: Vec<f64> = Vec::new();
    for tok in cleaned.split(|c: char| c.is_whitespace() || c == ',' || c == ';').filter(|t| !t.is_empty()) {
        let v: f64 = tok.parse().with_context(|| format!("`{tok}` is not a number"))?;
        if !v.is_finite() {
            bail!("`{tok}` is not finite");
        }
        pending.push(v);
        if pending.len() == 2 {
            pts.push(Vec2::new(pending[0], pending[1]));
            pending.clear();
        }
    }
    if !pending.is_empty() {
        bail!("odd number of coordinates in `{s}`");
    }
    if pts.is_empty() {
        bail!("no points in `{s}`");
    }
    Ok(pts)
}

fn resolve_scenario(path: &Path) -> Result<PathBuf> {
    if path.is_file() {
        return Ok(path.to_path_buf());
    }
    if path.extension().is_none() {
        let with_ext = path.with_extension("toml");
        if with_ext.is_file() {
            return Ok(with_ext);
        }
    }
    bail!("scenario file {} not found", path.display())
}

fn cmd_run(scenario: &Path, out: &Path, overrides: &[String], plot: bool, verify: bool) -> Result<ExitCode> {
    let path = resolve_scenario(scenario)?;
    let sc = Scenario::load(&path, overrides)?;
    for w in &sc.assumptions.warnings {
        eprintln!("warning: {w}");
    }
    if !sc.assumptions.certified() {
        eprintln!("warning: standing assumptions violated; this run is not certified");
    }

    let output = run(&sc);
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let csv_path = out.join("telemetry.csv");
    let mut csv = BufWriter::new(File::create(&csv_path).with_context(|| format!("creating {}", csv_path.display()))?);
    write_csv(&mut csv, &output.telemetry)?;
    csv.flush()?;
    let report_path = out.join("report.json");
    std::fs::write(&report_path, output.report.to_json() + "\n")
        .with_context(|| format!("writing {}", report_path.display()))?;
    if plot {
        figures::write_all(out, &sc, &output.telemetry)?;
    }

    let r = &output.report;
    println!(
        "{}: t = {} s, {} steps, certified = {}",
        if sc.name.is_empty() { path.display().to_string() } else { sc.name.clone() },
        r.t_final,
        r.steps_observed,
        r.certified
    );
    for c in &r.checks {
        let verdict = match (c.passed, c.advisory) {
            (true, _) => "pass",
            (false, true) => "fail (advisory)",
            (false, false) => "FAIL",
        };
        println!("  {:<22} {:<16} value {:.6e}  tolerance {:.3e}", c.name, verdict, c.value, c.tolerance);
    }
    println!("wrote {}", out.display());

    if let Some(f) = &output.failure {
        eprintln!("error: run stopped early: {f}");
        return Ok(ExitCode::from(1));
    }
    if verify && !r.passed {
        eprintln!("verification failed");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_mincircle(points: &str) -> Result<()> {
    let pts = parse_points(points)?;
    let (fast, support) = min_enclosing_circle(&pts)?;
    let slow = min_circle_brute_force(&pts)?;
    println!(
        "fast path:   center ({:.9}, {:.9})  radius {:.9}  support {:?}",
        fast.center.x,
        fast.center.y,
        fast.radius,
        support.indices()
    );
    println!(
        "brute force: center ({:.9}, {:.9})  radius {:.9}",
        slow.center.x, slow.center.y, slow.radius
    );
    println!(
        "difference:  center {:.3e}  radius {:.3e}",
        (fast.center - slow.center).norm(),
        (fast.radius - slow.radius).abs()
    );
    Ok(())
}

fn cmd_hulldist(point: &str, points: Option<&str>) -> Result<()> {
    let a = match parse_points(point)?.as_slice() {
        [a] => *a,
        _ => bail!("expected exactly one query point, got `{point}`"),
    };
    let pts = match points {
        Some(p) => parse_points(p)?,
        None => presets::case1().targets,
    };
    let hull = convex_hull(&pts)?;
    let fast = dist_to_hull(a, &hull);
    let p = prj_to_hull(a, &hull);
    let slow = hull_distance_brute_force(a, &pts)?;
    println!("fast path:   distance {fast:.9}  projection ({:.9}, {:.9})", p.x, p.y);
    println!("brute force: distance {slow:.9}");
    println!("difference:  {:.3e}", (fast - slow).abs());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run {
            scenario,
            out,
            overrides,
            plot,
            verify,
        } => cmd_run(&scenario, &out, &overrides, plot, verify),
        Command::Oracle { query } => {
            match query {
                OracleQuery::Mincircle { points } => cmd_mincircle(&points)?,
                OracleQuery::Hulldist { point, points } => cmd_hulldist(&point, points.as_deref())?,
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
