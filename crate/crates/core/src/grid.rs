//! Uniform rectilinear grids in one to three dimensions.
//!
//! Points are laid out row-major with axis 0 slowest. A periodic axis with
//! `n` points and spacing `h` has period `n * h`; the point at `origin + n * h`
//! is identified with the first point and is not stored. An open axis spans
//! `(n - 1) * h` and includes both end points.

use crate::error::{Error, Result};

/// Minimum number of points per axis; the one-sided second-derivative
/// closure needs four.
pub const MIN_EXTENT: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    extents: Vec<usize>,
    spacing: Vec<f64>,
    origin: Vec<f64>,
    periodic: Vec<bool>,
}

impl Grid {
    pub fn new(
        extents: Vec<usize>,
        spacing: Vec<f64>,
        origin: Vec<f64>,
        periodic: Vec<bool>,
    ) -> Result<Self> {
        let dim = extents.len();
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        if spacing.len() != dim || origin.len() != dim || periodic.len() != dim {
            return Err(Error::InvalidGrid(
                "extents, spacing, origin and periodic must have one entry per axis".into(),
            ));
        }
        if let Some(n) = extents.iter().find(|&&n| n < MIN_EXTENT) {
            return Err(Error::InvalidGrid(format!(
                "every axis needs at least {MIN_EXTENT} points, got {n}"
            )));
        }
        if let Some(h) = spacing.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
            return Err(Error::InvalidGrid(format!("spacing must be positive and finite, got {h}")));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(Self { extents, spacing, origin, periodic })
    }

    /// `n` points covering the period `[start, start + length)`.
    pub fn periodic_1d(n: usize, start: f64, length: f64) -> Result<Self> {
        Self::new(vec![n], vec![length / n as f64], vec![start], vec![true])
    }

    /// `n` points covering `[start, end]` inclusive.
    pub fn open_1d(n: usize, start: f64, end: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGrid("open axis needs at least two points".into()));
        }
        Self::new(vec![n], vec![(end - start) / (n - 1) as f64], vec![start], vec![false])
    }

    /// Same extent, box length and boundary type on every axis, origin at zero.
    pub fn cube(dim: usize, n: usize, length: f64, periodic: bool) -> Result<Self> {
        let h = if periodic { length / n as f64 } else { length / (n.max(2) - 1) as f64 };
        Self::new(vec![n; dim], vec![h; dim], vec![0.0; dim], vec![periodic; dim])
    }

    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn periodic(&self) -> &[bool] {
        &self.periodic
    }

    pub fn is_periodic(&self, axis: usize) -> bool {
        self.periodic[axis]
    }

    pub fn all_periodic(&self) -> bool {
        self.periodic.iter().all(|&p| p)
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Period of a periodic axis, or the span between the end points of an open one.
    pub fn axis_length(&self, axis: usize) -> f64 {
        let n = self.extents[axis] as f64;
        if self.periodic[axis] {
            n * self.spacing[axis]
        } else {
            (n - 1.0) * self.spacing[axis]
        }
    }

    /// Flat-index stride of each axis.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dim()];
        for axis in (0..self.dim().saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1] * self.extents[axis + 1];
        }
        strides
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.dim());
        index
            .iter()
            .zip(&self.extents)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut index = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            index[axis] = flat % self.extents[axis];
            flat /= self.extents[axis];
        }
        index
    }

    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + i as f64 * self.spacing[axis]
    }

    /// Physical coordinates of the point with the given flat index.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(axis, &i)| self.coordinate(axis, i))
            .collect()
    }

    /// Iterates over the physical coordinates of every point in storage order.
    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |p| self.point(p))
    }

    /// Per-axis quadrature weights: rectangle rule on periodic axes,
    /// trapezoid rule on open axes.
    pub fn axis_weights(&self, axis: usize) -> Vec<f64> {
        let n = self.extents[axis];
        let h = self.spacing[axis];
        let mut w = vec![h; n];
        if !self.periodic[axis] {
            w[0] = 0.5 * h;
            w[n - 1] = 0.5 * h;
        }
        w
    }

    /// Flat indices of the first point of every grid line running along `axis`.
    pub fn line_starts(&self, axis: usize) -> Vec<usize> {
        let stride = self.strides()[axis];
        let n = self.extents[axis];
        (0..self.len())
            .filter(|p| (p / stride).is_multiple_of(n))
            .collect()
    }
}

/// Applies a one-dimensional operator to every grid line along `axis`.
///
/// `op` receives the input line and a buffer of the same length to fill.
pub(crate) fn map_lines<F>(grid: &Grid, axis: usize, input: &[f64], output: &mut [f64], mut op: F)
where
    F: FnMut(&[f64], &mut [f64]),
{
    let stride = grid.strides()[axis];
    let n = grid.extents()[axis];
    let mut line = vec![0.0; n];
    let mut out = vec![0.0; n];
    for start in grid.line_starts(axis) {
        for (j, slot) in line.iter_mut().enumerate() {
            *slot = input[start + j * stride];
        }
        op(&line, &mut out);
        for (j, value) in out.iter().enumerate() {
            output[start + j * stride] = *value;
        }
    }
}
