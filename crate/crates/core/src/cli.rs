//! Command implementations behind the `colehopf` binary. Each returns the
//! process exit code; diagnostics go to standard error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::acceptance::{self, AcceptanceOptions};
use crate::bifurcation::{sweep, sweep_values};
use crate::cole_hopf::initial_psi;
use crate::error::{Error, Result};
use crate::kinematics::{
    continuity_residual, probability_current, probability_density, velocity_from_wavefunction, WaveState,
};
use crate::mapping::{IterationTrace, MappingSolver, SolveReport};
use crate::scenario::ScenarioConfig;
use crate::snapshot::Snapshot;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

/// Output directory used when neither `--out` nor `output` is given.
pub const DEFAULT_OUTPUT: &str = "colehopf-out";

fn fail(err: &Error) -> i32 {
    eprintln!("error: {err}");
    match err {
        Error::NotConverged(_) => EXIT_NOT_CONVERGED,
        _ => EXIT_FAILURE,
    }
}

fn output_dir(cfg: &ScenarioConfig, out: Option<&Path>) -> PathBuf {
    out.map(Path::to_path_buf)
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT))
}

/// `t,energy,term1_norm,term2_norm,fp_iterations`, one row per window end.
pub fn report_csv(report: &SolveReport) -> String {
    let mut out = String::from("t,energy,term1_norm,term2_norm,fp_iterations\n");
    for k in 0..report.times.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            report.times[k], report.energy[k], report.term1_norm[k], report.term2_norm[k], report.fp_iterations[k]
        );
    }
    out
}

pub fn trace_csv(trace: &IterationTrace) -> String {
    let mut out = String::from("iteration,difference\n");
    for (i, d) in trace.differences().iter().enumerate() {
        let _ = writeln!(out, "{},{}", i + 1, d);
    }
    out
}

fn manifest(cfg: &ScenarioConfig, command: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "tool = {} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "command = {command}");
    let _ = writeln!(out, "config = {}", cfg.path.display());
    let _ = writeln!(out, "horizon = {}", cfg.horizon);
    let _ = writeln!(out, "window = {}", cfg.window);
    let _ = writeln!(out, "substeps = {}", cfg.substeps);
    let _ = writeln!(out, "fp_tolerance = {}", cfg.fp_tolerance);
    let _ = writeln!(out, "fp_max_iters = {}", cfg.fp_max_iters);
    out.push_str("\n[config]\n");
    out.push_str(&cfg.source);
    if !cfg.source.ends_with('\n') {
        out.push('\n');
    }
    out
}

fn solve(config: &Path, out: Option<&Path>, quiet: bool) -> Result<PathBuf> {
    let cfg = ScenarioConfig::load(config)?;
    let dir = output_dir(&cfg, out);
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("manifest.txt"), manifest(&cfg, "solve"))?;
    let v0 = cfg.initial_velocity()?;
    let mut solver = MappingSolver::new(cfg.mapping_config()?)?;
    let report = match solver.march(&v0, cfg.horizon) {
        Err(Error::NotConverged(trace)) => {
            let path = dir.join("trace.csv");
            fs::write(&path, trace_csv(&trace))?;
            eprintln!("iteration trace written to {}", path.display());
            for (i, d) in trace.differences().iter().enumerate() {
                eprintln!("  iteration {:>3}: {d:e}", i + 1);
            }
            return Err(Error::NotConverged(trace));
        }
        other => other?,
    };
    if !quiet {
        for w in &report.warnings {
            eprintln!("warning: {w}");
        }
    }
    fs::write(dir.join("report.csv"), report_csv(&report))?;
    for (k, sample) in report.snapshots.iter().enumerate() {
        Snapshot::scalar(sample.psi.clone()).at_time(sample.time).write(dir.join(format!("psi_{k:05}.txt")))?;
        Snapshot::vector(sample.velocity.clone())
            .at_time(sample.time)
            .write(dir.join(format!("velocity_{k:05}.txt")))?;
    }
    Ok(dir)
}

/// Runs a scenario and writes `report.csv`, field snapshots and `manifest.txt`.
pub fn cmd_solve(config: &Path, out: Option<&Path>, quiet: bool) -> i32 {
    match solve(config, out, quiet) {
        Ok(dir) => {
            if !quiet {
                eprintln!("wrote {}", dir.display());
            }
            EXIT_OK
        }
        Err(e) => fail(&e),
    }
}

/// Runs the acceptance criteria and prints one line per criterion.
pub fn cmd_validate(options: &AcceptanceOptions) -> i32 {
    let reports = acceptance::run_all(options);
    print!("{}", acceptance::render_table(&reports));
    if reports.iter().all(|r| r.passed()) {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

fn kinematics(snapshots: &[PathBuf], hbar_over_m: f64, out: &Path) -> Result<Option<f64>> {
    if snapshots.is_empty() || snapshots.len() > 2 {
        return Err(Error::InvalidParameter("give one or two wave-function snapshots".into()));
    }
    let read = |path: &PathBuf| -> Result<(Option<f64>, WaveState)> {
        let snap = Snapshot::read(path)?;
        Ok((snap.time, WaveState::new(snap.field.into_complex()?, hbar_over_m)?))
    };
    let (time, state) = read(&snapshots[0])?;
    fs::create_dir_all(out)?;
    let stamp = |s: Snapshot| match time {
        Some(t) => s.at_time(t),
        None => s,
    };
    stamp(Snapshot::scalar(probability_density(&state))).write(out.join("density.txt"))?;
    stamp(Snapshot::vector(probability_current(&state))).write(out.join("current.txt"))?;
    stamp(Snapshot::vector(velocity_from_wavefunction(&state)?)).write(out.join("velocity.txt"))?;
    let Some(second) = snapshots.get(1) else { return Ok(None) };
    let (later, next) = read(second)?;
    let (Some(t0), Some(t1)) = (time, later) else {
        return Err(Error::InvalidParameter("the continuity residual needs time-stamped snapshots".into()));
    };
    let residual = continuity_residual(&state, &next, t1 - t0)?;
    fs::write(out.join("residual.txt"), format!("{residual}\n"))?;
    Ok(Some(residual))
}

/// Writes density, current and velocity of a wave-function snapshot; with a
/// second, later snapshot also the continuity residual between the two.
pub fn cmd_kinematics(snapshots: &[PathBuf], hbar_over_m: f64, out: &Path, quiet: bool) -> i32 {
    match kinematics(snapshots, hbar_over_m, out) {
        Ok(residual) => {
            if let Some(r) = residual {
                println!("continuity_residual {r}");
            }
            if !quiet {
                eprintln!("wrote {}", out.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRange {
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

fn bifurcation(config: &Path, range: SweepRange, out: Option<&Path>) -> Result<PathBuf> {
    let cfg = ScenarioConfig::load(config)?;
    let values = sweep_values(range.from, range.to, range.steps)?;
    let mapping = cfg.mapping_config()?;
    let psi = initial_psi(&cfg.initial_velocity()?, &cfg.params)?;
    // Run well past the solve budget so slow transients settle.
    let rows = sweep(&mapping, &psi, &values, 4 * cfg.fp_max_iters)?;
    let dir = output_dir(&cfg, out);
    fs::create_dir_all(&dir)?;
    let mut csv = String::from("parameter,classification,final_ratio,period\n");
    for row in &rows {
        let period = row.analysis.period.map(|p| p.to_string()).unwrap_or_default();
        let _ = writeln!(csv, "{},{},{},{}", row.parameter, row.analysis.classification, row.analysis.final_ratio, period);
    }
    fs::write(dir.join("sweep.csv"), csv)?;
    let mut text = manifest(&cfg, "bifurcation");
    let _ = writeln!(text, "\n[sweep]\nfrom = {}\nto = {}\nsteps = {}", range.from, range.to, range.steps);
    fs::write(dir.join("manifest.txt"), text)?;
    Ok(dir)
}

/// Sweeps the reaction amplitude and classifies each first-window iteration trace.
pub fn cmd_bifurcation(config: &Path, range: SweepRange, out: Option<&Path>, quiet: bool) -> i32 {
    match bifurcation(config, range, out) {
        Ok(dir) => {
            if !quiet {
                eprintln!("wrote {}", dir.join("sweep.csv").display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}
