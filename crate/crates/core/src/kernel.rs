//! Heat kernels and their discrete convolution tables.
//!
//! The free-space kernel in `d` dimensions is
//! `(4 pi nu dt)^(-d/2) exp(-|x - xi|^2 / (4 nu dt))`. Periodic axes use the
//! method of images. Because the Gaussian factorizes over axes and the image
//! lattice is rectangular, tables are stored per axis and applied one axis at
//! a time; the full weight of a point pair is the product of the per-axis
//! weights.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::Grid;

/// Hard cap on image shells per axis.
const MAX_IMAGE_SHELLS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    nu: f64,
    grid: Grid,
    image_tolerance: f64,
    dt_floor: f64,
}

impl KernelSpec {
    /// Defaults: image tolerance 1e-16, `dt_floor = 0.1 h_min^2 / nu`.
    pub fn new(nu: f64, grid: Grid) -> Result<Self> {
        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::InvalidParameter(format!("nu must be positive, got {nu}")));
        }
        let dt_floor = 0.1 * grid.min_spacing().powi(2) / nu;
        Ok(Self { nu, grid, image_tolerance: 1e-16, dt_floor })
    }

    pub fn with_image_tolerance(mut self, tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0 && tolerance < 1.0) {
            return Err(Error::InvalidParameter(format!("image tolerance must lie in (0, 1), got {tolerance}")));
        }
        self.image_tolerance = tolerance;
        Ok(self)
    }

    pub fn with_dt_floor(mut self, dt_floor: f64) -> Result<Self> {
        if !(dt_floor.is_finite() && dt_floor > 0.0) {
            return Err(Error::InvalidParameter(format!("dt floor must be positive, got {dt_floor}")));
        }
        self.dt_floor = dt_floor;
        Ok(self)
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn image_tolerance(&self) -> f64 {
        self.image_tolerance
    }

    pub fn dt_floor(&self) -> f64 {
        self.dt_floor
    }

    fn check_dt(&self, dt: f64) -> Result<()> {
        if !(dt >= self.dt_floor) || !dt.is_finite() {
            return Err(Error::TimeOffsetTooSmall { dt, floor: self.dt_floor });
        }
        Ok(())
    }

    /// Free-space kernel with the floor check applied.
    pub fn free_space(&self, x: &[f64], xi: &[f64], dt: f64) -> Result<f64> {
        self.check_dt(dt)?;
        free_space_kernel(x, xi, dt, self.nu)
    }

    /// Kernel of the grid's domain: image sums on periodic axes, free space on open ones.
    pub fn periodic(&self, x: &[f64], xi: &[f64], dt: f64) -> Result<f64> {
        self.check_dt(dt)?;
        let nu_dt = self.nu * dt;
        Ok((0..self.grid.dim())
            .map(|axis| self.axis_kernel(axis, x[axis] - xi[axis], nu_dt))
            .product())
    }

    fn axis_kernel(&self, axis: usize, d: f64, nu_dt: f64) -> f64 {
        if self.grid.is_periodic(axis) {
            periodic_gaussian_1d(d, self.grid.axis_length(axis), nu_dt, self.image_tolerance)
        } else {
            gaussian_1d(d, nu_dt)
        }
    }

    /// The propagator over `dt`, collapsing to the identity below the floor.
    pub fn propagator(&self, dt: f64) -> Result<Propagator> {
        if !(dt.is_finite() && dt >= 0.0) {
            return Err(Error::NonPositiveTime(dt));
        }
        if dt < self.dt_floor {
            Ok(Propagator::Identity)
        } else {
            Ok(Propagator::Table(build_kernel_table(self, dt)?))
        }
    }
}

fn gaussian_1d(d: f64, nu_dt: f64) -> f64 {
    (-d * d / (4.0 * nu_dt)).exp() / (4.0 * PI * nu_dt).sqrt()
}

/// Image sum of the 1-D Gaussian over a period `length`, truncated once a
/// symmetric shell adds less than `tolerance` times the running total.
fn periodic_gaussian_1d(d: f64, length: f64, nu_dt: f64, tolerance: f64) -> f64 {
    let d = d - length * (d / length).round();
    let mut sum = gaussian_1d(d, nu_dt);
    for m in 1..=MAX_IMAGE_SHELLS {
        let shift = m as f64 * length;
        let shell = gaussian_1d(d + shift, nu_dt) + gaussian_1d(d - shift, nu_dt);
        sum += shell;
        if shell <= tolerance * sum {
            break;
        }
    }
    sum
}

/// `(4 pi nu dt)^(-d/2) exp(-|x - xi|^2 / (4 nu dt))`.
pub fn free_space_kernel(x: &[f64], xi: &[f64], dt: f64, nu: f64) -> Result<f64> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::TimeOffsetTooSmall { dt, floor: 0.0 });
    }
    if x.len() != xi.len() {
        return Err(Error::InvalidParameter("points differ in dimension".into()));
    }
    let nu_dt = nu * dt;
    let r2: f64 = x.iter().zip(xi).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((-r2 / (4.0 * nu_dt)).exp() / (4.0 * PI * nu_dt).powf(0.5 * x.len() as f64))
}

/// Quadrature-weighted kernel values for one time offset.
#[derive(Debug, Clone)]
pub struct KernelTable {
    spec: KernelSpec,
    time_offset: f64,
    /// Dense `n x n` row-major matrix per axis.
    axes: Vec<Vec<f64>>,
    correction: f64,
}

impl KernelTable {
    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn time_offset(&self) -> f64 {
        self.time_offset
    }

    /// Weight connecting output point `out` to source point `src` (flat indices).
    pub fn weight(&self, out: usize, src: usize) -> f64 {
        let grid = self.spec.grid();
        let a = grid.multi_index(out);
        let b = grid.multi_index(src);
        (0..grid.dim())
            .map(|axis| self.axes[axis][a[axis] * grid.extents()[axis] + b[axis]])
            .product()
    }

    /// Sum of the weights in the row of output point `out`.
    pub fn row_sum(&self, out: usize) -> f64 {
        let grid = self.spec.grid();
        let a = grid.multi_index(out);
        (0..grid.dim())
            .map(|axis| {
                let n = grid.extents()[axis];
                self.axes[axis][a[axis] * n..(a[axis] + 1) * n].iter().sum::<f64>()
            })
            .product()
    }

    /// Largest relative change made by row renormalization on periodic axes.
    pub fn normalization_correction(&self) -> f64 {
        self.correction
    }

    pub fn min_weight(&self) -> f64 {
        self.axes.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    /// Multiplies every weight by `factor`; exists to exercise the
    /// normalization checks with a deliberately broken table.
    #[doc(hidden)]
    pub fn corrupt_for_testing(&mut self, factor: f64) {
        for w in self.axes.iter_mut().flatten() {
            *w *= factor;
        }
    }
}

pub fn build_kernel_table(spec: &KernelSpec, dt: f64) -> Result<KernelTable> {
    spec.check_dt(dt)?;
    let grid = spec.grid();
    let nu_dt = spec.nu * dt;
    let mut correction: f64 = 0.0;
    let mut axes = Vec::with_capacity(grid.dim());
    for axis in 0..grid.dim() {
        let n = grid.extents()[axis];
        let h = grid.spacing()[axis];
        let weights = grid.axis_weights(axis);
        let mut m = vec![0.0; n * n];
        if grid.is_periodic(axis) {
            // Circulant: one row of kernel values, shifted.
            let row: Vec<f64> = (0..n)
                .map(|k| spec.axis_kernel(axis, k as f64 * h, nu_dt) * h)
                .collect();
            let sum: f64 = row.iter().sum();
            correction = correction.max((sum - 1.0).abs());
            for i in 0..n {
                for j in 0..n {
                    m[i * n + j] = row[(j + n - i) % n] / sum;
                }
            }
        } else {
            for i in 0..n {
                for j in 0..n {
                    let d = (i as f64 - j as f64) * h;
                    m[i * n + j] = spec.axis_kernel(axis, d, nu_dt) * weights[j];
                }
            }
        }
        axes.push(m);
    }
    Ok(KernelTable { spec: spec.clone(), time_offset: dt, axes, correction })
}

/// `sum over xi of table(x, xi) f(xi)`.
pub fn convolve(table: &KernelTable, f: &ScalarField) -> Result<ScalarField> {
    f.check_grid(table.spec.grid())?;
    let grid = f.grid();
    let strides = grid.strides();
    let mut current = f.values().to_vec();
    for axis in 0..grid.dim() {
        let n = grid.extents()[axis];
        let stride = strides[axis];
        let matrix = &table.axes[axis];
        let periodic = grid.is_periodic(axis);
        let starts = grid.line_starts(axis);
        let lines: Vec<Vec<f64>> = starts
            .par_iter()
            .map(|&start| {
                let line: Vec<f64> = (0..n).map(|j| current[start + j * stride]).collect();
                (0..n)
                    .map(|i| {
                        if periodic {
                            // Same summation order on every row, so uniform
                            // input stays exactly uniform.
                            let (head, tail) = line.split_at(i);
                            matrix[..n].iter().zip(tail.iter().chain(head)).map(|(w, v)| w * v).sum()
                        } else {
                            matrix[i * n..(i + 1) * n].iter().zip(&line).map(|(w, v)| w * v).sum()
                        }
                    })
                    .collect()
            })
            .collect();
        for (start, line) in starts.iter().zip(lines) {
            for (j, v) in line.into_iter().enumerate() {
                current[start + j * stride] = v;
            }
        }
    }
    Ok(ScalarField::from_parts(grid.clone(), current))
}

/// Heat propagation over a fixed time offset.
#[derive(Debug, Clone)]
pub enum Propagator {
    /// Offsets below the kernel floor: the delta limit.
    Identity,
    Table(KernelTable),
}

impl Propagator {
    pub fn apply(&self, f: &ScalarField) -> Result<ScalarField> {
        match self {
            Propagator::Identity => Ok(f.clone()),
            Propagator::Table(t) => convolve(t, f),
        }
    }
}

/// Largest ratio of boundary magnitude to field maximum on open axes; the
/// free-space kernel ignores whatever lies outside the grid.
pub fn open_boundary_leakage(f: &ScalarField) -> f64 {
    let grid = f.grid();
    let max = f.max_abs();
    if max == 0.0 {
        return 0.0;
    }
    let mut worst: f64 = 0.0;
    for p in 0..grid.len() {
        let idx = grid.multi_index(p);
        let on_open_edge = (0..grid.dim())
            .any(|a| !grid.is_periodic(a) && (idx[a] == 0 || idx[a] + 1 == grid.extents()[a]));
        if on_open_edge {
            worst = worst.max(f.values()[p].abs() / max);
        }
    }
    worst
}
