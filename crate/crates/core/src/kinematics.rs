//! Probability density, probability current and phase velocity of a wave
//! function `psi = A exp(i theta)`.

use num_complex::Complex64;

use crate::calculus::{divergence, gradient, FieldNorm, NormKind};
use crate::error::{Error, Result};
use crate::field::{ComplexField, ScalarField, VectorField};

/// Default phase floor, relative to the largest amplitude in the field.
pub const DEFAULT_AMPLITUDE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    psi: ComplexField,
    hbar_over_m: f64,
}

impl WaveState {
    pub fn new(psi: ComplexField, hbar_over_m: f64) -> Result<Self> {
        if !(hbar_over_m.is_finite() && hbar_over_m > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "hbar/m must be positive and finite, got {hbar_over_m}"
            )));
        }
        Ok(Self { psi, hbar_over_m })
    }

    pub fn psi(&self) -> &ComplexField {
        &self.psi
    }

    pub fn hbar_over_m(&self) -> f64 {
        self.hbar_over_m
    }
}

/// `w = |psi|^2`.
pub fn probability_density(s: &WaveState) -> ScalarField {
    let w = s.psi.values().iter().map(|z| z.norm_sqr()).collect();
    ScalarField::from_parts(s.psi.grid().clone(), w)
}

/// `j = (hbar/m) (Re psi * grad Im psi - Im psi * grad Re psi)`, which equals
/// `A^2 (hbar/m) grad theta` for `psi = A exp(i theta)`.
pub fn probability_current(s: &WaveState) -> VectorField {
    let re = s.psi.real();
    let im = s.psi.imag();
    let grad_re = gradient(&re);
    let grad_im = gradient(&im);
    let grid = s.psi.grid();
    let comps = grad_re
        .components()
        .iter()
        .zip(grad_im.components())
        .map(|(dre, dim)| {
            let values = (0..grid.len())
                .map(|p| {
                    s.hbar_over_m * (re.values()[p] * dim.values()[p] - im.values()[p] * dre.values()[p])
                })
                .collect();
            ScalarField::from_parts(grid.clone(), values)
        })
        .collect();
    VectorField::from_parts(grid.clone(), comps)
}

/// Phase increment between neighbouring samples, `arg(b conj(a))`.
fn phase_step(a: Complex64, b: Complex64) -> f64 {
    (b * a.conj()).arg()
}

/// Derivative of the phase along one line, built from wrapped phase steps so
/// it matches the central difference of the unwrapped phase.
fn phase_derivative(line: &[Complex64], h: f64, periodic: bool, out: &mut [f64]) {
    let n = line.len();
    let inv = 0.5 / h;
    for i in 1..n - 1 {
        out[i] = phase_step(line[i - 1], line[i + 1]) * inv;
    }
    if periodic {
        out[0] = phase_step(line[n - 1], line[1]) * inv;
        out[n - 1] = phase_step(line[n - 2], line[0]) * inv;
    } else {
        let d01 = phase_step(line[0], line[1]);
        let d12 = phase_step(line[1], line[2]);
        out[0] = (3.0 * d01 - d12) * inv;
        let d_last = phase_step(line[n - 2], line[n - 1]);
        let d_prev = phase_step(line[n - 3], line[n - 2]);
        out[n - 1] = (3.0 * d_last - d_prev) * inv;
    }
}

/// `v = (hbar/m) grad theta`, the real part of `-i (hbar/m) grad psi / psi`.
///
/// The phase gradient is taken from wrapped phase differences of neighbouring
/// samples, so a linear phase is differentiated exactly and the result is
/// independent of any global phase or positive rescaling of `psi`.
pub fn velocity_from_wavefunction(s: &WaveState) -> Result<VectorField> {
    velocity_from_wavefunction_with_floor(s, DEFAULT_AMPLITUDE_FLOOR)
}

pub fn velocity_from_wavefunction_with_floor(s: &WaveState, relative_floor: f64) -> Result<VectorField> {
    let grid = s.psi.grid();
    let floor = relative_floor * s.psi.max_abs();
    if let Some((index, z)) = s
        .psi
        .values()
        .iter()
        .enumerate()
        .find(|(_, z)| !(z.norm() > floor))
    {
        return Err(Error::ZeroAmplitude { index, amplitude: z.norm() });
    }
    let strides = grid.strides();
    let mut comps = Vec::with_capacity(grid.dim());
    for axis in 0..grid.dim() {
        let n = grid.extents()[axis];
        let stride = strides[axis];
        let h = grid.spacing()[axis];
        let periodic = grid.is_periodic(axis);
        let mut values = vec![0.0; grid.len()];
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let mut out = vec![0.0; n];
        for start in grid.line_starts(axis) {
            for (j, z) in line.iter_mut().enumerate() {
                *z = s.psi.values()[start + j * stride];
            }
            phase_derivative(&line, h, periodic, &mut out);
            for (j, d) in out.iter().enumerate() {
                values[start + j * stride] = s.hbar_over_m * d;
            }
        }
        comps.push(ScalarField::from_parts(grid.clone(), values));
    }
    Ok(VectorField::from_parts(grid.clone(), comps))
}

/// Max-norm residual of the discrete continuity equation between two states
/// `dt` apart: `(w_after - w_before) / dt + div((j_before + j_after) / 2)`.
///
/// Both differences are second order. For a free Gaussian packet of width
/// `sigma0` and wavenumber `k0` with `hbar / m = 1`, sampled at spacing `h`,
/// the residual stays below `(k0^2 + 1 / sigma0^2) * (h^2 + dt^2)`.
pub fn continuity_residual(before: &WaveState, after: &WaveState, dt: f64) -> Result<f64> {
    if before.psi.grid() != after.psi.grid() {
        return Err(Error::GridMismatch);
    }
    if before.hbar_over_m != after.hbar_over_m {
        return Err(Error::InvalidParameter("states carry different hbar/m".into()));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::NonPositiveTime(dt));
    }
    let dw = probability_density(after).sub(&probability_density(before))?;
    let j_mid = probability_current(before).add(&probability_current(after))?.scale(0.5);
    let residual = dw.scale(1.0 / dt).add(&divergence(&j_mid))?;
    Ok(residual.norm(NormKind::Linf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    fn plane_wave(k: f64, n: usize) -> WaveState {
        let g = Grid::periodic_1d(n, 0.0, 2.0 * PI).unwrap();
        WaveState::new(ComplexField::from_fn(&g, |x| Complex64::from_polar(1.0, k * x[0])), 1.0).unwrap()
    }

    #[test]
    fn density_examples() {
        let g = Grid::periodic_1d(8, 0.0, 1.0).unwrap();
        let s = WaveState::new(ComplexField::from_fn(&g, |_| Complex64::new(2.0, 1.0)), 1.0).unwrap();
        assert!(probability_density(&s).values().iter().all(|&w| (w - 5.0).abs() < 1e-15));
        let w = probability_density(&plane_wave(3.0, 32));
        assert!(w.values().iter().all(|&w| (w - 1.0).abs() < 1e-15));
    }

    #[test]
    fn real_wave_function_carries_no_current_and_no_velocity() {
        let g = Grid::open_1d(41, -3.0, 3.0).unwrap();
        let s = WaveState::new(ComplexField::from_fn(&g, |x| Complex64::new((-x[0] * x[0]).exp(), 0.0)), 2.0)
            .unwrap();
        assert_eq!(probability_current(&s).max_abs(), 0.0);
        assert_eq!(velocity_from_wavefunction(&s).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn plane_wave_velocity_is_exact_and_current_is_close() {
        let s = plane_wave(3.0, 64);
        let v = velocity_from_wavefunction(&s).unwrap();
        assert!(v.component(0).values().iter().all(|&v| (v - 3.0).abs() < 1e-12));
        // Central differences of cos/sin carry the sinc factor sin(kh)/(kh).
        let h = 2.0 * PI / 64.0;
        let j = probability_current(&s);
        let expected = 3.0 * (3.0 * h).sin() / (3.0 * h);
        assert!(j.component(0).values().iter().all(|&j| (j - expected).abs() < 1e-12));
    }

    #[test]
    fn zero_amplitude_is_rejected() {
        let g = Grid::periodic_1d(8, 0.0, 1.0).unwrap();
        let s = WaveState::new(
            ComplexField::from_fn(&g, |x| if x[0] < 0.2 { Complex64::new(0.0, 0.0) } else { Complex64::new(1.0, 0.0) }),
            1.0,
        )
        .unwrap();
        assert!(matches!(velocity_from_wavefunction(&s), Err(Error::ZeroAmplitude { index: 0, .. })));
    }

    #[test]
    fn stationary_pair_has_zero_residual() {
        let g = Grid::open_1d(31, -3.0, 3.0).unwrap();
        let s = WaveState::new(ComplexField::from_fn(&g, |x| Complex64::new((-x[0] * x[0]).exp(), 0.0)), 1.0)
            .unwrap();
        assert_eq!(continuity_residual(&s, &s, 0.1).unwrap(), 0.0);
        let p = plane_wave(2.0, 32);
        assert!(continuity_residual(&p, &p, 0.01).unwrap() < 1e-12);
    }

    #[test]
    fn residual_rejects_mismatched_states() {
        let a = plane_wave(1.0, 32);
        let b = plane_wave(1.0, 64);
        assert!(matches!(continuity_residual(&a, &b, 0.1), Err(Error::GridMismatch)));
        assert!(WaveState::new(a.psi().clone(), 0.0).is_err());
    }
}
