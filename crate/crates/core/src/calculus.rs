//! Second-order finite-difference calculus and quadrature on grids.
//!
//! Interior points use central differences. Periodic axes wrap around; open
//! axes close with one-sided second-order stencils so every point carries
//! the same formal order.

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::map_lines;

/// First derivative of one grid line.
pub(crate) fn diff1(line: &[f64], h: f64, periodic: bool, out: &mut [f64]) {
    let n = line.len();
    let inv = 0.5 / h;
    for i in 1..n - 1 {
        out[i] = (line[i + 1] - line[i - 1]) * inv;
    }
    if periodic {
        out[0] = (line[1] - line[n - 1]) * inv;
        out[n - 1] = (line[0] - line[n - 2]) * inv;
    } else {
        // (-3, 4, -1) stencils, grouped as differences so constants give 0.
        out[0] = (3.0 * (line[1] - line[0]) - (line[2] - line[1])) * inv;
        out[n - 1] = (3.0 * (line[n - 1] - line[n - 2]) - (line[n - 2] - line[n - 3])) * inv;
    }
}

/// Second derivative of one grid line.
pub(crate) fn diff2(line: &[f64], h: f64, periodic: bool, out: &mut [f64]) {
    let n = line.len();
    let inv = 1.0 / (h * h);
    for i in 1..n - 1 {
        out[i] = ((line[i + 1] - line[i]) - (line[i] - line[i - 1])) * inv;
    }
    if periodic {
        out[0] = (line[1] - 2.0 * line[0] + line[n - 1]) * inv;
        out[n - 1] = (line[0] - 2.0 * line[n - 1] + line[n - 2]) * inv;
    } else {
        let second = |a: f64, b: f64, c: f64| (a - b) - (b - c);
        out[0] = (2.0 * second(line[0], line[1], line[2]) - second(line[1], line[2], line[3])) * inv;
        out[n - 1] = (2.0 * second(line[n - 1], line[n - 2], line[n - 3])
            - second(line[n - 2], line[n - 3], line[n - 4]))
            * inv;
    }
}

/// Derivative of `f` along a single axis.
pub fn partial(f: &ScalarField, axis: usize) -> ScalarField {
    let grid = f.grid();
    let h = grid.spacing()[axis];
    let periodic = grid.is_periodic(axis);
    let mut out = vec![0.0; grid.len()];
    map_lines(grid, axis, f.values(), &mut out, |line, o| diff1(line, h, periodic, o));
    ScalarField::from_parts(grid.clone(), out)
}

fn second_partial(f: &ScalarField, axis: usize) -> ScalarField {
    let grid = f.grid();
    let h = grid.spacing()[axis];
    let periodic = grid.is_periodic(axis);
    let mut out = vec![0.0; grid.len()];
    map_lines(grid, axis, f.values(), &mut out, |line, o| diff2(line, h, periodic, o));
    ScalarField::from_parts(grid.clone(), out)
}

pub fn gradient(f: &ScalarField) -> VectorField {
    let comps = (0..f.grid().dim()).map(|axis| partial(f, axis)).collect();
    VectorField::from_parts(f.grid().clone(), comps)
}

pub fn divergence(v: &VectorField) -> ScalarField {
    let grid = v.grid();
    let mut out = vec![0.0; grid.len()];
    for (axis, c) in v.components().iter().enumerate() {
        for (o, d) in out.iter_mut().zip(partial(c, axis).values()) {
            *o += d;
        }
    }
    ScalarField::from_parts(grid.clone(), out)
}

pub fn laplacian(f: &ScalarField) -> ScalarField {
    let grid = f.grid();
    let mut out = vec![0.0; grid.len()];
    for axis in 0..grid.dim() {
        for (o, d) in out.iter_mut().zip(second_partial(f, axis).values()) {
            *o += d;
        }
    }
    ScalarField::from_parts(grid.clone(), out)
}

/// Tensor-product quadrature: rectangle rule on periodic axes, trapezoid on open axes.
pub fn volume_integral(f: &ScalarField) -> f64 {
    let grid = f.grid();
    let weights: Vec<Vec<f64>> = (0..grid.dim()).map(|a| grid.axis_weights(a)).collect();
    let mut total = 0.0;
    for (p, v) in f.values().iter().enumerate() {
        let w: f64 = grid
            .multi_index(p)
            .iter()
            .enumerate()
            .map(|(axis, &i)| weights[axis][i])
            .product();
        total += w * v;
    }
    total
}

/// Largest mismatch of the mixed partials `d v_i / d x_j - d v_j / d x_i`.
pub fn curl_residual(v: &VectorField) -> f64 {
    let dim = v.grid().dim();
    let mut worst: f64 = 0.0;
    for i in 0..dim {
        for j in (i + 1)..dim {
            let a = partial(v.component(i), j);
            let b = partial(v.component(j), i);
            for (x, y) in a.values().iter().zip(b.values()) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    worst
}

/// Tolerances guarding the line integral of a velocity field.
///
/// Both are relative: the curl residual is compared against
/// `curl_tolerance * max|v| / min(h)`, the loop integral along a periodic axis
/// against `circulation_tolerance * max|v| * period`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialTolerance {
    pub curl: f64,
    pub circulation: f64,
}

impl Default for PotentialTolerance {
    fn default() -> Self {
        Self { curl: 1e-4, circulation: 1e-8 }
    }
}

impl PotentialTolerance {
    pub fn check_curl(&self, v: &VectorField) -> Result<()> {
        let residual = curl_residual(v);
        let tolerance = self.curl * v.max_abs() / v.grid().min_spacing();
        if residual > tolerance {
            return Err(Error::CurlTooLarge { residual, tolerance });
        }
        Ok(())
    }

    /// Rejects fields whose integral around any periodic axis does not vanish.
    pub fn check_circulation(&self, v: &VectorField) -> Result<()> {
        let grid = v.grid();
        let vmax = v.max_abs();
        for axis in (0..grid.dim()).filter(|&a| grid.is_periodic(a)) {
            let stride = grid.strides()[axis];
            let n = grid.extents()[axis];
            let h = grid.spacing()[axis];
            let limit = self.circulation * vmax * grid.axis_length(axis);
            let comp = v.component(axis).values();
            for start in grid.line_starts(axis) {
                let circulation: f64 = (0..n).map(|j| comp[start + j * stride]).sum::<f64>() * h;
                if circulation.abs() > limit {
                    return Err(Error::PeriodCirculationNonzero { axis, circulation });
                }
            }
        }
        Ok(())
    }
}

/// Line integral of `v` from the grid origin to `target` along the staircase
/// path that runs through axis 0 first, then axis 1, then axis 2.
pub fn path_integral_from_origin(
    v: &VectorField,
    target: &[usize],
    tolerance: &PotentialTolerance,
) -> Result<f64> {
    let grid = v.grid();
    if target.len() != grid.dim() || target.iter().zip(grid.extents()).any(|(&i, &n)| i >= n) {
        return Err(Error::InvalidParameter(format!("target {target:?} is outside the grid")));
    }
    tolerance.check_curl(v)?;
    let mut position = vec![0; grid.dim()];
    let mut total = 0.0;
    for axis in 0..grid.dim() {
        let h = grid.spacing()[axis];
        let comp = v.component(axis).values();
        for step in 0..target[axis] {
            position[axis] = step;
            let a = comp[grid.flat_index(&position)];
            position[axis] = step + 1;
            let b = comp[grid.flat_index(&position)];
            total += 0.5 * h * (a + b);
        }
        position[axis] = target[axis];
    }
    Ok(total)
}

/// The staircase line integral evaluated at every grid point at once.
///
/// Agrees with [`path_integral_from_origin`] point by point; costs one pass
/// per axis instead of one path per point.
pub fn potential_from_origin(v: &VectorField, tolerance: &PotentialTolerance) -> Result<ScalarField> {
    tolerance.check_curl(v)?;
    let grid = v.grid();
    let strides = grid.strides();
    let mut potential = vec![0.0; grid.len()];
    for axis in 0..grid.dim() {
        let h = grid.spacing()[axis];
        let n = grid.extents()[axis];
        let stride = strides[axis];
        let comp = v.component(axis).values();
        // Lines along `axis` whose coordinates on later axes are zero carry the
        // path segment; later segments start from their end points.
        for start in grid.line_starts(axis) {
            let idx = grid.multi_index(start);
            if idx[axis + 1..].iter().any(|&i| i != 0) {
                continue;
            }
            let mut acc = potential[start];
            for j in 1..n {
                let p = start + j * stride;
                acc += 0.5 * h * (comp[p - stride] + comp[p]);
                potential[p] = acc;
            }
        }
    }
    Ok(ScalarField::from_parts(grid.clone(), potential))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L2,
    Linf,
}

/// Fields that carry an L2 / max norm.
pub trait FieldNorm {
    fn norm(&self, kind: NormKind) -> f64;
}

impl FieldNorm for ScalarField {
    fn norm(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::L2 => volume_integral(&self.map(|v| v * v)).sqrt(),
            NormKind::Linf => self.max_abs(),
        }
    }
}

impl FieldNorm for VectorField {
    fn norm(&self, kind: NormKind) -> f64 {
        let m2 = self.magnitude_squared();
        match kind {
            NormKind::L2 => volume_integral(&m2).sqrt(),
            NormKind::Linf => m2.max().sqrt(),
        }
    }
}

pub fn field_norm<F: FieldNorm + ?Sized>(f: &F, kind: NormKind) -> f64 {
    f.norm(kind)
}
