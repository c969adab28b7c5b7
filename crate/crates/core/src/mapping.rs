//! Integral-mapping solution of `d psi / dt = nu lap psi + c psi`.
//!
//! Over a window of length `t` the solution satisfies
//!
//! ```text
//! psi(x, t) = integral_0^t (K(t - tau) * (c psi)(tau))(x) dtau + (K(t) * psi_init)(x)
//! ```
//!
//! with `K` the heat kernel of the domain; the boundary integral vanishes on
//! periodic domains and for fields that decay before reaching an open edge.
//! The right-hand side defines a mapping `Y` on trajectories
//! `psi(., tau), tau in [0, t]`, and the solution is its fixed point, reached
//! by the iteration `psi_{m+1} = Y(psi_m)` started from the pure heat
//! evolution `psi_0(., tau) = K(tau) * psi_init`.
//!
//! Trajectories are sampled at `substeps + 1` equally spaced nodes; the time
//! integral is the trapezoid rule over those nodes and the kernel at zero
//! offset is the identity.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::calculus::{gradient, volume_integral, FieldNorm, NormKind};
use crate::cole_hopf::{initial_psi, psi_to_velocity, reaction_from_pressure, reaction_from_psi, FluidParams, ReactionField};
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::kernel::{open_boundary_leakage, KernelSpec, Propagator};

/// Boundary-to-maximum ratio above which open-domain runs are flagged.
pub const LEAKAGE_WARNING_THRESHOLD: f64 = 1e-8;

pub type ReactionFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

/// A prescribed reaction coefficient `c(x, t)`, `t` being absolute time.
#[derive(Clone)]
pub enum ReactionSchedule {
    Uniform(f64),
    Static(ReactionField),
    Function(ReactionFn),
}

impl ReactionSchedule {
    pub fn from_pressure(delta_p: &ScalarField, params: &FluidParams) -> Self {
        Self::Static(reaction_from_pressure(delta_p, params))
    }

    pub fn function(f: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Function(Arc::new(f))
    }

    pub fn at(&self, grid: &Grid, t: f64) -> Result<ScalarField> {
        let c = match self {
            ReactionSchedule::Uniform(gamma) => ScalarField::constant(grid, *gamma),
            ReactionSchedule::Static(c) => {
                c.field().check_grid(grid)?;
                c.field().clone()
            }
            ReactionSchedule::Function(f) => ScalarField::from_fn(grid, |x| f(x, t)),
        };
        if !c.is_finite() {
            return Err(Error::InvalidField(format!("reaction coefficient is not finite at t = {t}")));
        }
        Ok(c)
    }
}

impl fmt::Debug for ReactionSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReactionSchedule::Uniform(g) => write!(f, "Uniform({g})"),
            ReactionSchedule::Static(_) => write!(f, "Static(..)"),
            ReactionSchedule::Function(_) => write!(f, "Function(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum ReactionMode {
    Zero,
    Prescribed(ReactionSchedule),
    /// `c = 8 nu |grad psi|^2 / psi`, evaluated on the previous iterate.
    SelfConsistent,
    /// `c(t) = 2 Re0 / max(t, t0)`, uniform in space.
    ReynoldsSchedule { re0: f64, t0: f64 },
}

#[derive(Debug, Clone)]
pub struct MappingConfig {
    pub params: FluidParams,
    pub grid: Grid,
    /// Length of one mapping application.
    pub window: f64,
    /// Time-quadrature intervals per window.
    pub substeps: usize,
    /// Sup-norm iterate difference that counts as converged.
    pub fp_tolerance: f64,
    pub fp_max_iters: usize,
    pub reaction: ReactionMode,
    /// Record a field snapshot every this many windows (0: first and last only).
    pub snapshot_every: usize,
}

impl MappingConfig {
    pub fn new(params: FluidParams, grid: Grid) -> Self {
        Self {
            params,
            grid,
            window: 0.05,
            substeps: 16,
            fp_tolerance: 1e-10,
            fp_max_iters: 50,
            reaction: ReactionMode::Zero,
            snapshot_every: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.window.is_finite() && self.window > 0.0) {
            return Err(Error::InvalidParameter(format!("window must be positive, got {}", self.window)));
        }
        if self.substeps == 0 {
            return Err(Error::InvalidParameter("substeps must be at least 1".into()));
        }
        if !(self.fp_tolerance.is_finite() && self.fp_tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "fp_tolerance must be positive, got {}",
                self.fp_tolerance
            )));
        }
        if self.fp_max_iters == 0 {
            return Err(Error::InvalidParameter("fp_max_iters must be at least 1".into()));
        }
        if let ReactionMode::ReynoldsSchedule { re0, t0 } = self.reaction {
            if !(re0.is_finite() && t0.is_finite() && t0 > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "reynolds schedule needs finite Re0 and t0 > 0, got Re0 = {re0}, t0 = {t0}"
                )));
            }
        }
        Ok(())
    }
}

/// Sup-norm differences of successive iterates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IterationTrace {
    differences: Vec<f64>,
    converged: bool,
}

impl IterationTrace {
    pub fn differences(&self) -> &[f64] {
        &self.differences
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn iterations_used(&self) -> usize {
        self.differences.len()
    }

    pub fn last_difference(&self) -> Option<f64> {
        self.differences.last().copied()
    }

    /// Ratios of successive differences.
    pub fn ratios(&self) -> Vec<f64> {
        self.differences.windows(2).map(|w| w[1] / w[0]).collect()
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.differences.windows(2).all(|w| w[1] < w[0] || w[0] == 0.0)
    }
}

/// A field sampled at the time nodes of one window.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Offsets from the window start.
    pub nodes: Vec<f64>,
    pub fields: Vec<ScalarField>,
}

impl Trajectory {
    pub fn last(&self) -> &ScalarField {
        self.fields.last().expect("trajectory has at least one node")
    }

    fn max_difference(&self, other: &Trajectory) -> f64 {
        self.fields
            .iter()
            .zip(&other.fields)
            .flat_map(|(a, b)| a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, |m: f64, d| if d.is_nan() { f64::NAN } else { m.max(d) })
    }
}

/// One application of the mapping.
#[derive(Debug, Clone)]
pub struct MappingOutput {
    pub trajectory: Trajectory,
    /// Source (reaction) integral at the window end.
    pub term1: ScalarField,
    /// Heat-propagated initial data at the window end.
    pub term2: ScalarField,
}

#[derive(Debug, Clone)]
pub struct WindowSolution {
    pub output: MappingOutput,
    pub trace: IterationTrace,
}

impl WindowSolution {
    pub fn psi(&self) -> &ScalarField {
        self.output.trajectory.last()
    }
}

#[derive(Debug, Clone)]
pub struct FieldSample {
    pub time: f64,
    pub psi: ScalarField,
    pub velocity: VectorField,
}

#[derive(Debug, Clone, Default)]
pub struct SolveReport {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub term1_norm: Vec<f64>,
    pub term2_norm: Vec<f64>,
    pub fp_iterations: Vec<usize>,
    pub snapshots: Vec<FieldSample>,
    /// One trace per window.
    pub traces: Vec<IterationTrace>,
    pub warnings: Vec<String>,
}

impl SolveReport {
    pub fn final_snapshot(&self) -> Option<&FieldSample> {
        self.snapshots.last()
    }

    /// `term1_norm / term2_norm` per recorded instant.
    pub fn term_ratio(&self) -> Vec<f64> {
        self.term1_norm.iter().zip(&self.term2_norm).map(|(a, b)| a / b).collect()
    }
}

/// `0.5 * integral |v|^2`.
pub fn kinetic_energy(v: &VectorField) -> f64 {
    0.5 * volume_integral(&v.magnitude_squared())
}

struct WindowCache {
    props: Arc<Vec<Propagator>>,
    nodes: Vec<f64>,
    heat: Vec<ScalarField>,
    reaction: Option<Vec<ScalarField>>,
    /// Node-0 source term propagated to every node, trapezoid weight included.
    first: Vec<ScalarField>,
    active: bool,
}

/// Runs the mapping for one configuration, caching kernel tables per window length.
pub struct MappingSolver {
    cfg: MappingConfig,
    spec: KernelSpec,
    propagators: HashMap<u64, Arc<Vec<Propagator>>>,
}

impl MappingSolver {
    pub fn new(cfg: MappingConfig) -> Result<Self> {
        cfg.validate()?;
        let spec = KernelSpec::new(cfg.params.nu(), cfg.grid.clone())?;
        Ok(Self { cfg, spec, propagators: HashMap::new() })
    }

    pub fn config(&self) -> &MappingConfig {
        &self.cfg
    }

    pub fn kernel_spec(&self) -> &KernelSpec {
        &self.spec
    }

    fn check_window(&self, psi_init: &ScalarField, t: f64) -> Result<()> {
        psi_init.check_grid(&self.cfg.grid)?;
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::NonPositiveTime(t));
        }
        Ok(())
    }

    /// Propagators for offsets `k * t / substeps`, `k = 0..=substeps`.
    fn propagators(&mut self, t: f64) -> Result<Arc<Vec<Propagator>>> {
        if let Some(p) = self.propagators.get(&t.to_bits()) {
            return Ok(p.clone());
        }
        let s = self.cfg.substeps;
        let dtau = t / s as f64;
        let list = (0..=s)
            .map(|k| self.spec.propagator(k as f64 * dtau))
            .collect::<Result<Vec<_>>>()?;
        let list = Arc::new(list);
        self.propagators.insert(t.to_bits(), list.clone());
        Ok(list)
    }

    fn nodes(&self, t: f64) -> Vec<f64> {
        let s = self.cfg.substeps;
        (0..=s).map(|k| t * k as f64 / s as f64).collect()
    }

    /// Heat evolution of `psi_init` over `t`: the initial approximation and
    /// the exact solution when there is no reaction.
    pub fn psi0(&self, psi_init: &ScalarField, t: f64) -> Result<ScalarField> {
        psi_init.check_grid(&self.cfg.grid)?;
        self.spec.propagator(t)?.apply(psi_init)
    }

    /// `psi_0` sampled on the window nodes.
    pub fn initial_trajectory(&mut self, psi_init: &ScalarField, t: f64) -> Result<Trajectory> {
        self.check_window(psi_init, t)?;
        let props = self.propagators(t)?;
        let fields = props.iter().map(|p| p.apply(psi_init)).collect::<Result<Vec<_>>>()?;
        Ok(Trajectory { nodes: self.nodes(t), fields })
    }

    /// Reaction coefficient at every node, or `None` when it depends on the
    /// iterate or there is no reaction.
    fn fixed_reaction(&self, nodes: &[f64], start: f64) -> Result<Option<Vec<ScalarField>>> {
        let grid = &self.cfg.grid;
        let fields = match &self.cfg.reaction {
            ReactionMode::Zero | ReactionMode::SelfConsistent => return Ok(None),
            ReactionMode::Prescribed(schedule) => {
                nodes.iter().map(|tau| schedule.at(grid, start + tau)).collect::<Result<Vec<_>>>()?
            }
            ReactionMode::ReynoldsSchedule { re0, t0 } => nodes
                .iter()
                .map(|tau| ScalarField::constant(grid, 2.0 * re0 / (start + tau).max(*t0)))
                .collect(),
        };
        Ok(Some(fields))
    }

    /// Everything in the mapping that does not depend on the iterate: the
    /// heat trajectory, the reaction schedule and the source contribution of
    /// node 0, where the iterate always equals `psi_init`.
    fn prepare(&mut self, psi_init: &ScalarField, start: f64, t: f64) -> Result<WindowCache> {
        self.check_window(psi_init, t)?;
        let props = self.propagators(t)?;
        let nodes = self.nodes(t);
        let heat = props.iter().map(|p| p.apply(psi_init)).collect::<Result<Vec<_>>>()?;
        let reaction = self.fixed_reaction(&nodes, start)?;
        let c0 = match (&self.cfg.reaction, &reaction) {
            (ReactionMode::Zero, _) => None,
            (_, Some(r)) => Some(r[0].clone()),
            (_, None) => Some(reaction_from_psi(psi_init, &self.cfg.params)?.into_field()),
        };
        let half = 0.5 * t / self.cfg.substeps as f64;
        let first = match &c0 {
            None => Vec::new(),
            Some(c0) => {
                let src = c0.zip_with(psi_init, |c, p| c * p)?;
                props
                    .par_iter()
                    .enumerate()
                    .map(|(i, p)| {
                        if i == 0 {
                            Ok(ScalarField::zeros(&self.cfg.grid))
                        } else {
                            Ok(p.apply(&src)?.scale(half))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        Ok(WindowCache { props, nodes, heat, reaction, first, active: c0.is_some() })
    }

    fn apply_prepared(&self, cache: &WindowCache, iterate: &Trajectory) -> Result<MappingOutput> {
        let s = self.cfg.substeps;
        if iterate.fields.len() != s + 1 {
            return Err(Error::InvalidParameter(format!(
                "iterate has {} nodes, expected {}",
                iterate.fields.len(),
                s + 1
            )));
        }
        let grid = &self.cfg.grid;
        if !cache.active {
            return Ok(MappingOutput {
                trajectory: Trajectory { nodes: cache.nodes.clone(), fields: cache.heat.clone() },
                term1: ScalarField::zeros(grid),
                term2: cache.heat[s].clone(),
            });
        }
        let dtau = cache.nodes[1] - cache.nodes[0];
        // Source samples c(tau_j) psi(tau_j) for j >= 1.
        let sources: Vec<ScalarField> = (1..=s)
            .map(|j| {
                let psi = &iterate.fields[j];
                psi.check_grid(grid)?;
                let c = match &cache.reaction {
                    Some(r) => r[j].clone(),
                    None => reaction_from_psi(psi, &self.cfg.params)?.into_field(),
                };
                c.zip_with(psi, |c, p| c * p)
            })
            .collect::<Result<Vec<_>>>()?;
        let source_terms: Vec<ScalarField> = (0..=s)
            .into_par_iter()
            .map(|i| -> Result<ScalarField> {
                let mut acc = cache.first[i].clone();
                for j in 1..=i {
                    let w = if j == i { 0.5 * dtau } else { dtau };
                    let propagated = cache.props[i - j].apply(&sources[j - 1])?;
                    acc = acc.axpy(w, &propagated)?;
                }
                Ok(acc)
            })
            .collect::<Result<Vec<_>>>()?;
        let fields = cache
            .heat
            .iter()
            .zip(&source_terms)
            .map(|(h, src)| h.add(src))
            .collect::<Result<Vec<_>>>()?;
        Ok(MappingOutput {
            trajectory: Trajectory { nodes: cache.nodes.clone(), fields },
            term1: source_terms[s].clone(),
            term2: cache.heat[s].clone(),
        })
    }

    /// One application of the mapping to `iterate` over the window
    /// `[start, start + t]`. The node-0 sample is always taken as `psi_init`.
    pub fn apply_mapping(
        &mut self,
        iterate: &Trajectory,
        psi_init: &ScalarField,
        start: f64,
        t: f64,
    ) -> Result<MappingOutput> {
        let cache = self.prepare(psi_init, start, t)?;
        self.apply_prepared(&cache, iterate)
    }

    /// Runs at most `budget` mapping applications starting from `psi_0`,
    /// stopping early once the iterate difference drops below `stop_below`.
    pub fn iterate_window(
        &mut self,
        psi_init: &ScalarField,
        start: f64,
        t: f64,
        budget: usize,
        stop_below: Option<f64>,
    ) -> Result<WindowSolution> {
        let cache = self.prepare(psi_init, start, t)?;
        let mut current = Trajectory { nodes: cache.nodes.clone(), fields: cache.heat.clone() };
        let mut trace = IterationTrace::default();
        let mut last = None;
        for _ in 0..budget {
            let next = self.apply_prepared(&cache, &current)?;
            let diff = next.trajectory.max_difference(&current);
            trace.differences.push(diff);
            current = next.trajectory.clone();
            last = Some(next);
            if !diff.is_finite() {
                break;
            }
            if stop_below.is_some_and(|tol| diff < tol) {
                trace.converged = true;
                break;
            }
        }
        let output = match last {
            Some(o) => o,
            None => self.apply_prepared(&cache, &current)?,
        };
        Ok(WindowSolution { output, trace })
    }

    /// Fixed point of the mapping over `[start, start + t]`.
    pub fn fixed_point(&mut self, psi_init: &ScalarField, start: f64, t: f64) -> Result<WindowSolution> {
        let (budget, tol) = (self.cfg.fp_max_iters, self.cfg.fp_tolerance);
        let solution = self.iterate_window(psi_init, start, t, budget, Some(tol))?;
        if !solution.trace.converged {
            return Err(Error::NotConverged(solution.trace));
        }
        Ok(solution)
    }

    /// Marches `psi` from `psi_init` to `horizon` window by window. Each
    /// window restarts from the previous window's end state rescaled to
    /// `max psi = 1`; the scale of `psi` does not enter the velocity.
    pub fn march_psi(&mut self, psi_init: &ScalarField, horizon: f64) -> Result<SolveReport> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::NonPositiveTime(horizon));
        }
        psi_init.check_grid(&self.cfg.grid)?;
        let params = self.cfg.params;
        let window = self.cfg.window;
        let mut report = SolveReport::default();

        let leakage = open_boundary_leakage(psi_init);
        if leakage > LEAKAGE_WARNING_THRESHOLD && !self.cfg.grid.all_periodic() {
            report.warnings.push(format!(
                "initial psi reaches {leakage:e} of its maximum on an open boundary; the free-space kernel ignores mass outside the grid"
            ));
        }

        let offset = window / self.cfg.substeps as f64;
        let floor = self.kernel_spec().dt_floor();
        if offset < floor {
            report.warnings.push(format!(
                "substep offset {offset:e} is below the kernel floor {floor:e}; diffusion over it is treated as the identity"
            ));
        }

        let mut psi = psi_init.scale(1.0 / psi_init.max());
        let velocity = psi_to_velocity(&psi, &params)?;
        report.times.push(0.0);
        report.energy.push(kinetic_energy(&velocity));
        report.term1_norm.push(0.0);
        report.term2_norm.push(psi.norm(NormKind::L2));
        report.fp_iterations.push(0);
        report.snapshots.push(FieldSample { time: 0.0, psi: psi.clone(), velocity });

        let windows = ((horizon / window) - 1e-9).ceil().max(1.0) as usize;
        let mut start = 0.0;
        for w in 0..windows {
            let end = if w + 1 == windows { horizon } else { (w + 1) as f64 * window };
            let length = end - start;
            let solution = self.fixed_point(&psi, start, length)?;
            let end_psi = solution.psi().clone();
            let velocity = psi_to_velocity(&end_psi, &params)?;
            report.times.push(end);
            report.energy.push(kinetic_energy(&velocity));
            report.term1_norm.push(solution.output.term1.norm(NormKind::L2));
            report.term2_norm.push(solution.output.term2.norm(NormKind::L2));
            report.fp_iterations.push(solution.trace.iterations_used());
            report.traces.push(solution.trace);
            let last = w + 1 == windows;
            let every = self.cfg.snapshot_every;
            if last || (every > 0 && (w + 1) % every == 0) {
                report.snapshots.push(FieldSample { time: end, psi: end_psi.clone(), velocity });
            }
            psi = end_psi.scale(1.0 / end_psi.max());
            start = end;
        }
        Ok(report)
    }

    /// Transforms `v0`, marches `psi` and maps back to velocities.
    pub fn march(&mut self, v0: &VectorField, horizon: f64) -> Result<SolveReport> {
        let psi_init = initial_psi(v0, &self.cfg.params)?;
        self.march_psi(&psi_init, horizon)
    }
}

pub fn psi0(psi_init: &ScalarField, t: f64, cfg: &MappingConfig) -> Result<ScalarField> {
    MappingSolver::new(cfg.clone())?.psi0(psi_init, t)
}

pub fn apply_mapping(
    iterate: &Trajectory,
    psi_init: &ScalarField,
    t: f64,
    cfg: &MappingConfig,
) -> Result<MappingOutput> {
    MappingSolver::new(cfg.clone())?.apply_mapping(iterate, psi_init, 0.0, t)
}

/// Fixed point over `[0, t]`, returning the end state and the iteration trace.
pub fn fixed_point_solve(
    psi_init: &ScalarField,
    t: f64,
    cfg: &MappingConfig,
) -> Result<(ScalarField, IterationTrace)> {
    let solution = MappingSolver::new(cfg.clone())?.fixed_point(psi_init, 0.0, t)?;
    Ok((solution.psi().clone(), solution.trace))
}

pub fn march(v0: &VectorField, horizon: f64, cfg: &MappingConfig) -> Result<SolveReport> {
    MappingSolver::new(cfg.clone())?.march(v0, horizon)
}

/// Velocity separation between the runs started from `v0` and from
/// `v0 + grad(delta)`, at every recorded snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationCurve {
    pub times: Vec<f64>,
    pub separation: Vec<f64>,
}

pub fn perturbation_separation(
    v0: &VectorField,
    delta: &ScalarField,
    horizon: f64,
    cfg: &MappingConfig,
) -> Result<SeparationCurve> {
    let perturbed = v0.add(&gradient(delta))?;
    let a = march(v0, horizon, cfg)?;
    let b = march(&perturbed, horizon, cfg)?;
    let mut curve = SeparationCurve { times: Vec::new(), separation: Vec::new() };
    for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
        curve.times.push(sa.time);
        curve.separation.push(sa.velocity.sub(&sb.velocity)?.norm(NormKind::L2));
    }
    Ok(curve)
}
