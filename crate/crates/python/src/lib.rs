//! Python bindings for the colehopf solver.
//!
//! Fields cross the boundary as flat lists of floats in row-major order
//! (axis 0 slowest); vector fields as one list per component.

use std::path::PathBuf;

use colehopf::acceptance::{self, AcceptanceOptions};
use colehopf::bifurcation::classify_trace;
use colehopf::oracles;
use colehopf::snapshot::FieldData;
use colehopf::{
    ComplexField, Error, FieldNorm, FluidParams, Grid, MappingConfig, NormKind, ReactionField,
    ReactionMode, ReactionSchedule, ScalarField, Snapshot, SolveReport, VectorField, WaveState,
};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

create_exception!(colehopf_py, ColeHopfError, PyException, "Solver error.");
create_exception!(
    colehopf_py,
    NotConvergedError,
    ColeHopfError,
    "Fixed-point iteration did not converge; `args[1]` holds the iterate differences."
);

fn to_py(err: Error) -> PyErr {
    let message = err.to_string();
    match err {
        Error::NotConverged(trace) => NotConvergedError::new_err((message, trace.differences().to_vec())),
        _ => ColeHopfError::new_err(message),
    }
}

trait IntoPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for colehopf::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

/// Uniform rectilinear grid.
#[pyclass(name = "Grid", module = "colehopf_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGrid {
    inner: Grid,
}

#[pymethods]
impl PyGrid {
    #[new]
    fn new(extents: Vec<usize>, spacing: Vec<f64>, origin: Vec<f64>, periodic: Vec<bool>) -> PyResult<Self> {
        Ok(Self { inner: Grid::new(extents, spacing, origin, periodic).py_err()? })
    }

    /// `n` points covering `[start, start + length)` with wrap-around.
    #[staticmethod]
    fn periodic_1d(n: usize, start: f64, length: f64) -> PyResult<Self> {
        Ok(Self { inner: Grid::periodic_1d(n, start, length).py_err()? })
    }

    /// `n` points from `start` to `end` inclusive.
    #[staticmethod]
    fn open_1d(n: usize, start: f64, end: f64) -> PyResult<Self> {
        Ok(Self { inner: Grid::open_1d(n, start, end).py_err()? })
    }

    #[staticmethod]
    fn cube(dim: usize, n: usize, length: f64, periodic: bool) -> PyResult<Self> {
        Ok(Self { inner: Grid::cube(dim, n, length, periodic).py_err()? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn extents(&self) -> Vec<usize> {
        self.inner.extents().to_vec()
    }

    #[getter]
    fn spacing(&self) -> Vec<f64> {
        self.inner.spacing().to_vec()
    }

    #[getter]
    fn origin(&self) -> Vec<f64> {
        self.inner.origin().to_vec()
    }

    #[getter]
    fn periodic(&self) -> Vec<bool> {
        self.inner.periodic().to_vec()
    }

    /// Coordinates of every point, one list per point.
    fn points(&self) -> Vec<Vec<f64>> {
        self.inner.points().collect()
    }

    /// Coordinates along one axis.
    fn coordinates(&self, axis: usize) -> PyResult<Vec<f64>> {
        if axis >= self.inner.dim() {
            return Err(ColeHopfError::new_err(format!("axis {axis} out of range")));
        }
        Ok((0..self.inner.extents()[axis]).map(|i| self.inner.coordinate(axis, i)).collect())
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "Grid(extents={:?}, spacing={:?}, origin={:?}, periodic={:?})",
            self.inner.extents(),
            self.inner.spacing(),
            self.inner.origin(),
            self.inner.periodic()
        )
    }
}

#[pyclass(name = "ScalarField", module = "colehopf_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyScalarField {
    inner: ScalarField,
}

#[pymethods]
impl PyScalarField {
    #[new]
    fn new(grid: &PyGrid, values: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: ScalarField::new(grid.inner.clone(), values).py_err()? })
    }

    #[staticmethod]
    fn constant(grid: &PyGrid, value: f64) -> Self {
        Self { inner: ScalarField::constant(&grid.inner, value) }
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid { inner: self.inner.grid().clone() }
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    fn max(&self) -> f64 {
        self.inner.max()
    }

    fn min(&self) -> f64 {
        self.inner.min()
    }

    fn max_abs(&self) -> f64 {
        self.inner.max_abs()
    }

    fn scale(&self, factor: f64) -> Self {
        Self { inner: self.inner.scale(factor) }
    }

    fn __add__(&self, other: &Self) -> PyResult<Self> {
        Ok(Self { inner: self.inner.add(&other.inner).py_err()? })
    }

    fn __sub__(&self, other: &Self) -> PyResult<Self> {
        Ok(Self { inner: self.inner.sub(&other.inner).py_err()? })
    }

    /// `"l2"` or `"linf"`.
    #[pyo3(signature = (kind = "l2"))]
    fn norm(&self, kind: &str) -> PyResult<f64> {
        Ok(self.inner.norm(norm_kind(kind)?))
    }

    /// Trapezoid-weighted integral over the grid.
    fn integral(&self) -> f64 {
        colehopf::volume_integral(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.values().len()
    }

    fn __repr__(&self) -> String {
        format!("ScalarField(points={}, max={:e})", self.inner.values().len(), self.inner.max())
    }
}

#[pyclass(name = "VectorField", module = "colehopf_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyVectorField {
    inner: VectorField,
}

#[pymethods]
impl PyVectorField {
    #[new]
    fn new(grid: &PyGrid, components: Vec<Vec<f64>>) -> PyResult<Self> {
        let comps = components
            .into_iter()
            .map(|c| ScalarField::new(grid.inner.clone(), c))
            .collect::<colehopf::Result<Vec<_>>>()
            .py_err()?;
        Ok(Self { inner: VectorField::new(comps).py_err()? })
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid { inner: self.inner.grid().clone() }
    }

    #[getter]
    fn components(&self) -> Vec<Vec<f64>> {
        self.inner.components().iter().map(|c| c.values().to_vec()).collect()
    }

    fn component(&self, axis: usize) -> PyResult<PyScalarField> {
        match self.inner.components().get(axis) {
            Some(c) => Ok(PyScalarField { inner: c.clone() }),
            None => Err(ColeHopfError::new_err(format!("axis {axis} out of range"))),
        }
    }

    fn max_abs(&self) -> f64 {
        self.inner.max_abs()
    }

    fn scale(&self, factor: f64) -> Self {
        Self { inner: self.inner.scale(factor) }
    }

    fn __sub__(&self, other: &Self) -> PyResult<Self> {
        Ok(Self { inner: self.inner.sub(&other.inner).py_err()? })
    }

    #[pyo3(signature = (kind = "l2"))]
    fn norm(&self, kind: &str) -> PyResult<f64> {
        Ok(self.inner.norm(norm_kind(kind)?))
    }

    /// `0.5 * integral of |v|^2`.
    fn kinetic_energy(&self) -> f64 {
        colehopf::kinetic_energy(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("VectorField(components={}, max_abs={:e})", self.inner.components().len(), self.inner.max_abs())
    }
}

fn norm_kind(kind: &str) -> PyResult<NormKind> {
    match kind.to_ascii_lowercase().as_str() {
        "l2" => Ok(NormKind::L2),
        "linf" | "inf" | "max" => Ok(NormKind::Linf),
        other => Err(ColeHopfError::new_err(format!("unknown norm {other:?}; use 'l2' or 'linf'"))),
    }
}

/// Kinematic viscosity, optionally with dynamic viscosity and density.
#[pyclass(name = "FluidParams", module = "colehopf_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyFluidParams {
    inner: FluidParams,
}

#[pymethods]
impl PyFluidParams {
    #[new]
    #[pyo3(signature = (nu, mu = None, rho = None))]
    fn new(nu: f64, mu: Option<f64>, rho: Option<f64>) -> PyResult<Self> {
        let inner = match (mu, rho) {
            (None, None) => FluidParams::kinematic(nu),
            (Some(mu), Some(rho)) => FluidParams::new(nu, mu, rho),
            _ => return Err(ColeHopfError::new_err("give both mu and rho, or neither")),
        }
        .py_err()?;
        Ok(Self { inner })
    }

    #[getter]
    fn nu(&self) -> f64 {
        self.inner.nu()
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.inner.mu()
    }

    #[getter]
    fn rho(&self) -> f64 {
        self.inner.rho()
    }

    fn __repr__(&self) -> String {
        format!("FluidParams(nu={}, mu={}, rho={})", self.inner.nu(), self.inner.mu(), self.inner.rho())
    }
}

/// Solver controls and reaction mode for the heat-kernel mapping.
#[pyclass(name = "MappingConfig", module = "colehopf_py", skip_from_py_object)]
#[derive(Clone)]
struct PyMappingConfig {
    inner: MappingConfig,
}

#[pymethods]
impl PyMappingConfig {
    #[new]
    #[pyo3(signature = (params, grid, window = 0.05, substeps = 16, fp_tolerance = 1e-10, fp_max_iters = 50, snapshot_every = 1))]
    fn new(
        params: &PyFluidParams,
        grid: &PyGrid,
        window: f64,
        substeps: usize,
        fp_tolerance: f64,
        fp_max_iters: usize,
        snapshot_every: usize,
    ) -> PyResult<Self> {
        let mut inner = MappingConfig::new(params.inner, grid.inner.clone());
        inner.window = window;
        inner.substeps = substeps;
        inner.fp_tolerance = fp_tolerance;
        inner.fp_max_iters = fp_max_iters;
        inner.snapshot_every = snapshot_every;
        inner.validate().py_err()?;
        Ok(Self { inner })
    }

    #[getter]
    fn window(&self) -> f64 {
        self.inner.window
    }

    #[setter]
    fn set_window(&mut self, window: f64) {
        self.inner.window = window;
    }

    #[getter]
    fn substeps(&self) -> usize {
        self.inner.substeps
    }

    #[setter]
    fn set_substeps(&mut self, substeps: usize) {
        self.inner.substeps = substeps;
    }

    #[getter]
    fn fp_tolerance(&self) -> f64 {
        self.inner.fp_tolerance
    }

    #[setter]
    fn set_fp_tolerance(&mut self, tol: f64) {
        self.inner.fp_tolerance = tol;
    }

    #[getter]
    fn fp_max_iters(&self) -> usize {
        self.inner.fp_max_iters
    }

    #[setter]
    fn set_fp_max_iters(&mut self, n: usize) {
        self.inner.fp_max_iters = n;
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid { inner: self.inner.grid.clone() }
    }

    fn zero_reaction(&mut self) {
        self.inner.reaction = ReactionMode::Zero;
    }

    fn uniform_reaction(&mut self, gamma: f64) {
        self.inner.reaction = ReactionMode::Prescribed(ReactionSchedule::Uniform(gamma));
    }

    /// Time-independent reaction coefficient `c(x)`.
    fn static_reaction(&mut self, c: &PyScalarField) -> PyResult<()> {
        let field = ReactionField::new(c.inner.clone()).py_err()?;
        self.inner.reaction = ReactionMode::Prescribed(ReactionSchedule::Static(field));
        Ok(())
    }

    /// `c = dp / (2 mu)` from a pressure excess field.
    fn pressure_reaction(&mut self, delta_p: &PyScalarField) {
        let schedule = ReactionSchedule::from_pressure(&delta_p.inner, &self.inner.params);
        self.inner.reaction = ReactionMode::Prescribed(schedule);
    }

    fn self_consistent_reaction(&mut self) {
        self.inner.reaction = ReactionMode::SelfConsistent;
    }

    /// `c(t) = 2 re0 / max(t, t0)`.
    fn reynolds_schedule(&mut self, re0: f64, t0: f64) -> PyResult<()> {
        let previous = std::mem::replace(&mut self.inner.reaction, ReactionMode::ReynoldsSchedule { re0, t0 });
        if let Err(e) = self.inner.validate() {
            self.inner.reaction = previous;
            return Err(to_py(e));
        }
        Ok(())
    }

    fn __repr__(&self) -> String {
        format!(
            "MappingConfig(window={}, substeps={}, fp_tolerance={:e}, fp_max_iters={}, reaction={:?})",
            self.inner.window, self.inner.substeps, self.inner.fp_tolerance, self.inner.fp_max_iters, self.inner.reaction
        )
    }
}

/// Result of a march: per-window diagnostics and field snapshots.
#[pyclass(name = "SolveReport", module = "colehopf_py", frozen, skip_from_py_object)]
struct PySolveReport {
    inner: SolveReport,
}

#[pymethods]
impl PySolveReport {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times.clone()
    }

    #[getter]
    fn energy(&self) -> Vec<f64> {
        self.inner.energy.clone()
    }

    #[getter]
    fn term1_norm(&self) -> Vec<f64> {
        self.inner.term1_norm.clone()
    }

    #[getter]
    fn term2_norm(&self) -> Vec<f64> {
        self.inner.term2_norm.clone()
    }

    #[getter]
    fn fp_iterations(&self) -> Vec<usize> {
        self.inner.fp_iterations.clone()
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.inner.warnings.clone()
    }

    /// Iterate differences of every window's fixed-point solve.
    #[getter]
    fn traces(&self) -> Vec<Vec<f64>> {
        self.inner.traces.iter().map(|t| t.differences().to_vec()).collect()
    }

    /// `(time, psi, velocity)` for every recorded snapshot.
    #[getter]
    fn snapshots(&self) -> Vec<(f64, PyScalarField, PyVectorField)> {
        self.inner
            .snapshots
            .iter()
            .map(|s| (s.time, PyScalarField { inner: s.psi.clone() }, PyVectorField { inner: s.velocity.clone() }))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("SolveReport(windows={}, snapshots={})", self.inner.traces.len(), self.inner.snapshots.len())
    }
}

/// Wave function with its `hbar / m`.
#[pyclass(name = "WaveState", module = "colehopf_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyWaveState {
    inner: WaveState,
}

#[pymethods]
impl PyWaveState {
    #[new]
    #[pyo3(signature = (grid, real, imag, hbar_over_m = 1.0))]
    fn new(grid: &PyGrid, real: Vec<f64>, imag: Vec<f64>, hbar_over_m: f64) -> PyResult<Self> {
        if real.len() != imag.len() {
            return Err(ColeHopfError::new_err("real and imaginary parts differ in length"));
        }
        let values = real.into_iter().zip(imag).map(|(r, i)| Complex64::new(r, i)).collect();
        let psi = ComplexField::new(grid.inner.clone(), values).py_err()?;
        Ok(Self { inner: WaveState::new(psi, hbar_over_m).py_err()? })
    }

    #[getter]
    fn real(&self) -> Vec<f64> {
        self.inner.psi().values().iter().map(|z| z.re).collect()
    }

    #[getter]
    fn imag(&self) -> Vec<f64> {
        self.inner.psi().values().iter().map(|z| z.im).collect()
    }

    #[getter]
    fn hbar_over_m(&self) -> f64 {
        self.inner.hbar_over_m()
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid { inner: self.inner.psi().grid().clone() }
    }

    /// `|psi|^2`.
    fn density(&self) -> PyScalarField {
        PyScalarField { inner: colehopf::probability_density(&self.inner) }
    }

    fn current(&self) -> PyVectorField {
        PyVectorField { inner: colehopf::probability_current(&self.inner) }
    }

    /// `(hbar / m) grad(theta)`.
    fn velocity(&self) -> PyResult<PyVectorField> {
        Ok(PyVectorField { inner: colehopf::velocity_from_wavefunction(&self.inner).py_err()? })
    }

    /// Multiplies by `exp(i alpha)`.
    fn with_phase(&self, alpha: f64) -> PyResult<Self> {
        let rot = Complex64::from_polar(1.0, alpha);
        let psi = self.inner.psi().map(|z| z * rot);
        Ok(Self { inner: WaveState::new(psi, self.inner.hbar_over_m()).py_err()? })
    }
}

#[pyfunction]
#[pyo3(signature = (v, params, normalization = 1.0))]
fn velocity_to_psi(v: &PyVectorField, params: &PyFluidParams, normalization: f64) -> PyResult<PyScalarField> {
    Ok(PyScalarField { inner: colehopf::velocity_to_psi(&v.inner, &params.inner, normalization).py_err()? })
}

/// The transformed initial condition scaled to `max psi = 1`.
#[pyfunction]
fn initial_psi(v: &PyVectorField, params: &PyFluidParams) -> PyResult<PyScalarField> {
    Ok(PyScalarField { inner: colehopf::initial_psi(&v.inner, &params.inner).py_err()? })
}

/// `v = -2 nu grad(psi) / psi`.
#[pyfunction]
fn psi_to_velocity(psi: &PyScalarField, params: &PyFluidParams) -> PyResult<PyVectorField> {
    Ok(PyVectorField { inner: colehopf::psi_to_velocity(&psi.inner, &params.inner).py_err()? })
}

#[pyfunction]
fn reaction_from_psi(psi: &PyScalarField, params: &PyFluidParams) -> PyResult<PyScalarField> {
    Ok(PyScalarField { inner: colehopf::reaction_from_psi(&psi.inner, &params.inner).py_err()?.into_field() })
}

#[pyfunction]
fn gradient(f: &PyScalarField) -> PyVectorField {
    PyVectorField { inner: colehopf::gradient(&f.inner) }
}

#[pyfunction]
fn divergence(v: &PyVectorField) -> PyScalarField {
    PyScalarField { inner: colehopf::divergence(&v.inner) }
}

#[pyfunction]
fn laplacian(f: &PyScalarField) -> PyScalarField {
    PyScalarField { inner: colehopf::laplacian(&f.inner) }
}

#[pyfunction]
fn curl_residual(v: &PyVectorField) -> f64 {
    colehopf::curl_residual(&v.inner)
}

/// Free-space heat kernel `(4 pi nu dt)^(-d/2) exp(-|x - xi|^2 / (4 nu dt))`.
#[pyfunction]
fn free_space_kernel(x: Vec<f64>, xi: Vec<f64>, dt: f64, nu: f64) -> PyResult<f64> {
    colehopf::free_space_kernel(&x, &xi, dt, nu).py_err()
}

/// Heat propagation of `psi_init` over `t`, the zero-reaction mapping.
#[pyfunction]
fn psi0(psi_init: &PyScalarField, t: f64, cfg: &PyMappingConfig) -> PyResult<PyScalarField> {
    Ok(PyScalarField { inner: colehopf::psi0(&psi_init.inner, t, &cfg.inner).py_err()? })
}

/// Fixed point over `[0, t]`; returns `(psi, differences)`.
#[pyfunction]
fn fixed_point_solve(psi_init: &PyScalarField, t: f64, cfg: &PyMappingConfig) -> PyResult<(PyScalarField, Vec<f64>)> {
    let (psi, trace) = colehopf::fixed_point_solve(&psi_init.inner, t, &cfg.inner).py_err()?;
    Ok((PyScalarField { inner: psi }, trace.differences().to_vec()))
}

/// Marches `v0` to `horizon` window by window.
#[pyfunction]
fn march(py: Python<'_>, v0: &PyVectorField, horizon: f64, cfg: &PyMappingConfig) -> PyResult<PySolveReport> {
    let (v0, cfg) = (v0.inner.clone(), cfg.inner.clone());
    let report = py.detach(move || colehopf::march(&v0, horizon, &cfg)).py_err()?;
    Ok(PySolveReport { inner: report })
}

/// `(classification, final_ratio, period)` of an iterate-difference trace.
#[pyfunction]
fn classify(differences: Vec<f64>, tolerance: f64) -> (String, f64, Option<usize>) {
    let a = classify_trace(&differences, tolerance);
    (a.classification.to_string(), a.final_ratio, a.period)
}

#[pyfunction]
fn continuity_residual(before: &PyWaveState, after: &PyWaveState, dt: f64) -> PyResult<f64> {
    colehopf::continuity_residual(&before.inner, &after.inner, dt).py_err()
}

/// Exact periodic Burgers solution from `v0` (1D, zero mean).
#[pyfunction]
fn burgers_exact(nu: f64, v0: &PyScalarField, t: f64) -> PyResult<PyVectorField> {
    let problem = oracles::BurgersProblem::new(nu, v0.inner.clone()).py_err()?;
    Ok(PyVectorField { inner: oracles::burgers_exact(&problem, t).py_err()? })
}

/// Explicit finite-difference Burgers reference.
#[pyfunction]
fn fd_burgers(v0: &PyScalarField, nu: f64, horizon: f64, dt: f64) -> PyResult<PyVectorField> {
    Ok(PyVectorField { inner: oracles::fd_burgers(&v0.inner, nu, horizon, dt).py_err()? })
}

/// Explicit reaction-diffusion reference with a uniform or static reaction.
#[pyfunction]
#[pyo3(signature = (psi_init, nu, horizon, dt, gamma = 0.0, c = None))]
fn fd_reaction_diffusion(
    psi_init: &PyScalarField,
    nu: f64,
    horizon: f64,
    dt: f64,
    gamma: f64,
    c: Option<&PyScalarField>,
) -> PyResult<PyScalarField> {
    let schedule = match c {
        Some(c) => ReactionSchedule::Static(ReactionField::new(c.inner.clone()).py_err()?),
        None => ReactionSchedule::Uniform(gamma),
    };
    Ok(PyScalarField { inner: oracles::fd_reaction_diffusion(&psi_init.inner, &schedule, nu, horizon, dt).py_err()? })
}

/// Closed-form free Gaussian packet at time `t`.
#[pyfunction]
#[pyo3(signature = (grid, x0, k0, sigma0, t, hbar_over_m = 1.0))]
fn gaussian_free_packet(grid: &PyGrid, x0: f64, k0: f64, sigma0: f64, t: f64, hbar_over_m: f64) -> PyResult<PyWaveState> {
    let psi = oracles::gaussian_free_packet(&grid.inner, x0, k0, sigma0, hbar_over_m, t).py_err()?;
    Ok(PyWaveState { inner: WaveState::new(psi, hbar_over_m).py_err()? })
}

/// Runs the acceptance criteria; returns `(id, name, passed, line)` per criterion.
#[pyfunction]
fn validate(py: Python<'_>) -> Vec<(usize, String, bool, String)> {
    let reports = py.detach(|| acceptance::run_all(&AcceptanceOptions::default()));
    reports.iter().map(|r| (r.id, r.name.to_string(), r.passed(), acceptance::render_line(r))).collect()
}

/// Reads a snapshot file; returns `(time, field)` with a ScalarField,
/// VectorField or WaveState (with `hbar_over_m = 1`). One-component files
/// read back as scalars unless `vector` is set.
#[pyfunction]
#[pyo3(signature = (path, vector = false))]
fn read_snapshot(py: Python<'_>, path: PathBuf, vector: bool) -> PyResult<(Option<f64>, Py<PyAny>)> {
    let snap = Snapshot::read(&path).py_err()?;
    let field = match snap.field {
        data if vector => Py::new(py, PyVectorField { inner: data.into_vector().py_err()? })?.into_any(),
        FieldData::Scalar(f) => Py::new(py, PyScalarField { inner: f })?.into_any(),
        FieldData::Vector(f) => Py::new(py, PyVectorField { inner: f })?.into_any(),
        FieldData::Complex(f) => Py::new(py, PyWaveState { inner: WaveState::new(f, 1.0).py_err()? })?.into_any(),
    };
    Ok((snap.time, field))
}

/// Writes a ScalarField, VectorField or WaveState as a snapshot file.
#[pyfunction]
#[pyo3(signature = (path, field, time = None))]
fn write_snapshot(path: PathBuf, field: &Bound<'_, PyAny>, time: Option<f64>) -> PyResult<()> {
    let snap = if let Ok(f) = field.cast::<PyScalarField>() {
        Snapshot::scalar(f.get().inner.clone())
    } else if let Ok(f) = field.cast::<PyVectorField>() {
        Snapshot::vector(f.get().inner.clone())
    } else if let Ok(f) = field.cast::<PyWaveState>() {
        Snapshot::complex(f.get().inner.psi().clone())
    } else {
        return Err(ColeHopfError::new_err("expected a ScalarField, VectorField or WaveState"));
    };
    let snap = match time {
        Some(t) => snap.at_time(t),
        None => snap,
    };
    snap.write(&path).py_err()
}

#[pymodule]
fn colehopf_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("ColeHopfError", py.get_type::<ColeHopfError>())?;
    m.add("NotConvergedError", py.get_type::<NotConvergedError>())?;
    m.add_class::<PyGrid>()?;
    m.add_class::<PyScalarField>()?;
    m.add_class::<PyVectorField>()?;
    m.add_class::<PyFluidParams>()?;
    m.add_class::<PyMappingConfig>()?;
    m.add_class::<PySolveReport>()?;
    m.add_class::<PyWaveState>()?;
    m.add_function(wrap_pyfunction!(velocity_to_psi, m)?)?;
    m.add_function(wrap_pyfunction!(initial_psi, m)?)?;
    m.add_function(wrap_pyfunction!(psi_to_velocity, m)?)?;
    m.add_function(wrap_pyfunction!(reaction_from_psi, m)?)?;
    m.add_function(wrap_pyfunction!(gradient, m)?)?;
    m.add_function(wrap_pyfunction!(divergence, m)?)?;
    m.add_function(wrap_pyfunction!(laplacian, m)?)?;
    m.add_function(wrap_pyfunction!(curl_residual, m)?)?;
    m.add_function(wrap_pyfunction!(free_space_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(psi0, m)?)?;
    m.add_function(wrap_pyfunction!(fixed_point_solve, m)?)?;
    m.add_function(wrap_pyfunction!(march, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(continuity_residual, m)?)?;
    m.add_function(wrap_pyfunction!(burgers_exact, m)?)?;
    m.add_function(wrap_pyfunction!(fd_burgers, m)?)?;
    m.add_function(wrap_pyfunction!(fd_reaction_diffusion, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_free_packet, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(read_snapshot, m)?)?;
    m.add_function(wrap_pyfunction!(write_snapshot, m)?)?;
    Ok(())
}
