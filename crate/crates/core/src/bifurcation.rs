//! Classification of fixed-point iteration traces and reaction-amplitude sweeps.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::mapping::{MappingConfig, MappingSolver, ReactionMode, ReactionSchedule};

/// Longest period looked for in a trace.
pub const MAX_PERIOD: usize = 64;
/// Relative agreement required between values one period apart.
pub const PERIOD_TOLERANCE: f64 = 1e-6;
/// Differences beyond this are treated as blow-up.
pub const BLOW_UP: f64 = 1e200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Converged,
    Periodic,
    Divergent,
    BoundedAperiodic,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Converged => "converged",
            Classification::Periodic => "periodic",
            Classification::Divergent => "divergent",
            Classification::BoundedAperiodic => "bounded-aperiodic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceAnalysis {
    pub classification: Classification,
    /// Last difference over the one before it (NaN for traces shorter than 2).
    pub final_ratio: f64,
    pub period: Option<usize>,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= PERIOD_TOLERANCE * a.abs().max(b.abs())
}

/// Smallest `p <= MAX_PERIOD` such that the last `4p` differences repeat with period `p`.
pub fn detect_period(differences: &[f64]) -> Option<usize> {
    let n = differences.len();
    (1..=MAX_PERIOD).take_while(|p| 4 * p <= n).find(|&p| {
        let tail = &differences[n - 4 * p..];
        (p..tail.len()).all(|k| close(tail[k], tail[k - p]))
    })
}

/// Classifies a trace of successive iterate differences. `tolerance` is the
/// difference below which the iteration counts as converged.
pub fn classify_trace(differences: &[f64], tolerance: f64) -> TraceAnalysis {
    let n = differences.len();
    let final_ratio = if n >= 2 { differences[n - 1] / differences[n - 2] } else { f64::NAN };
    let result = |classification, period| TraceAnalysis { classification, final_ratio, period };
    let Some(&last) = differences.last() else {
        return result(Classification::BoundedAperiodic, None);
    };
    if differences.iter().any(|d| !d.is_finite() || *d > BLOW_UP) {
        return result(Classification::Divergent, None);
    }
    if last < tolerance {
        return result(Classification::Converged, None);
    }
    if let Some(p) = detect_period(differences) {
        return result(Classification::Periodic, Some(p));
    }
    // Growth over the last quarter of the trace.
    let window = (n / 4).max(1);
    if n >= 2 && last > differences[0] && last > differences[n - 1 - window.min(n - 1)] {
        return result(Classification::Divergent, None);
    }
    result(Classification::BoundedAperiodic, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    /// Uniform reaction coefficient.
    Gamma,
    /// Amplitude of the Reynolds schedule.
    Re0,
}

impl SweepParameter {
    pub fn for_mode(mode: &ReactionMode) -> Result<Self> {
        match mode {
            ReactionMode::Prescribed(ReactionSchedule::Uniform(_)) => Ok(SweepParameter::Gamma),
            ReactionMode::ReynoldsSchedule { .. } => Ok(SweepParameter::Re0),
            other => Err(Error::InvalidParameter(format!(
                "sweeps need a uniform or reynolds reaction, got {other:?}"
            ))),
        }
    }

    fn apply(&self, mode: &ReactionMode, value: f64) -> ReactionMode {
        match (self, mode) {
            (SweepParameter::Re0, ReactionMode::ReynoldsSchedule { t0, .. }) => {
                ReactionMode::ReynoldsSchedule { re0: value, t0: *t0 }
            }
            _ => ReactionMode::Prescribed(ReactionSchedule::Uniform(value)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub parameter: f64,
    pub analysis: TraceAnalysis,
    pub iterations: usize,
}

/// `steps` evenly spaced values from `from` to `to` inclusive.
pub fn sweep_values(from: f64, to: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || !from.is_finite() || !to.is_finite() {
        return Err(Error::InvalidParameter(format!("invalid sweep {from}..{to} in {steps} steps")));
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    Ok((0..steps).map(|i| from + (to - from) * i as f64 / (steps - 1) as f64).collect())
}

/// Runs the first window's fixed-point iteration for every parameter value
/// with a budget of `budget` applications, stopping early only on convergence.
pub fn sweep(cfg: &MappingConfig, psi_init: &ScalarField, values: &[f64], budget: usize) -> Result<Vec<SweepRow>> {
    let parameter = SweepParameter::for_mode(&cfg.reaction)?;
    values
        .iter()
        .map(|&value| {
            let mut run = cfg.clone();
            run.reaction = parameter.apply(&cfg.reaction, value);
            let mut solver = MappingSolver::new(run)?;
            let solution = solver.iterate_window(psi_init, 0.0, cfg.window, budget, Some(cfg.fp_tolerance))?;
            let differences = solution.trace.differences();
            Ok(SweepRow {
                parameter: value,
                analysis: classify_trace(differences, cfg.fp_tolerance),
                iterations: differences.len(),
            })
        })
        .collect()
}
