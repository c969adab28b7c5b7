//! Independent reference solutions.
//!
//! The Burgers oracle evolves `psi` spectrally on a refined grid; everything
//! else here is explicit finite differences or closed form, sharing no code
//! path with the kernel-mapping solver.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::calculus::laplacian;
use crate::error::{Error, Result};
use crate::field::{ComplexField, ScalarField, VectorField};
use crate::grid::Grid;
use crate::mapping::ReactionSchedule;

/// Minimum number of Fourier modes used by [`burgers_exact`].
pub const SPECTRAL_MODES: usize = 4096;

/// Viscous Burgers problem on a one-dimensional periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BurgersProblem {
    nu: f64,
    v0: ScalarField,
}

impl BurgersProblem {
    pub fn new(nu: f64, v0: ScalarField) -> Result<Self> {
        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::InvalidParameter(format!("nu must be positive, got {nu}")));
        }
        let grid = v0.grid();
        if grid.dim() != 1 || !grid.is_periodic(0) {
            return Err(Error::InvalidGrid("the Burgers oracle needs a 1D periodic grid".into()));
        }
        let n = grid.len() as f64;
        let mean = v0.values().iter().sum::<f64>() / n;
        if mean.abs() > 1e-8 * v0.max_abs().max(1.0) {
            return Err(Error::PeriodCirculationNonzero { axis: 0, circulation: mean * grid.axis_length(0) });
        }
        Ok(Self { nu, v0 })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn grid(&self) -> &Grid {
        self.v0.grid()
    }

    pub fn v0(&self) -> &ScalarField {
        &self.v0
    }
}

fn wavenumber(j: usize, m: usize, length: f64) -> f64 {
    let j = if j <= m / 2 { j as f64 } else { j as f64 - m as f64 };
    2.0 * PI * j / length
}

/// Exact Burgers velocity at time `t`: the initial data is turned into
/// `psi = exp(-phi / (2 nu))` on a refined grid, the heat equation is solved
/// mode by mode and `v = -2 nu psi_x / psi` is sampled back onto the grid.
pub fn burgers_exact(p: &BurgersProblem, t: f64) -> Result<VectorField> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    let grid = p.grid();
    let n = grid.len();
    let length = grid.axis_length(0);
    let m = n * 4usize.max(SPECTRAL_MODES.div_ceil(n));
    let mut planner = FftPlanner::<f64>::new();
    let fwd_n = planner.plan_fft_forward(n);
    let fwd_m = planner.plan_fft_forward(m);
    let inv_m = planner.plan_fft_inverse(m);

    let mut vhat: Vec<Complex64> = p.v0.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd_n.process(&mut vhat);

    // Potential coefficients, zero padded onto the refined grid; the Nyquist
    // mode of an even grid carries no well-defined derivative and is dropped.
    let mut phi = vec![Complex64::new(0.0, 0.0); m];
    for (j, &c) in vhat.iter().enumerate().skip(1) {
        if 2 * j == n {
            continue;
        }
        let k = wavenumber(j, n, length);
        let target = if j < n / 2 + 1 { j } else { m - (n - j) };
        phi[target] = c / Complex64::new(0.0, k) * (m as f64 / n as f64);
    }
    inv_m.process(&mut phi);
    let phi: Vec<f64> = phi.iter().map(|z| z.re / m as f64).collect();
    let phi_min = phi.iter().copied().fold(f64::INFINITY, f64::min);

    let mut psi: Vec<Complex64> =
        phi.iter().map(|&f| Complex64::new((-(f - phi_min) / (2.0 * p.nu)).exp(), 0.0)).collect();
    fwd_m.process(&mut psi);
    let mut dpsi = psi.clone();
    for j in 0..m {
        let k = wavenumber(j, m, length);
        let decay = (-p.nu * k * k * t).exp();
        psi[j] *= decay;
        dpsi[j] = if 2 * j == m { Complex64::new(0.0, 0.0) } else { dpsi[j] * decay * Complex64::new(0.0, k) };
    }
    inv_m.process(&mut psi);
    inv_m.process(&mut dpsi);

    let stride = m / n;
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let value = psi[i * stride].re / m as f64;
        if !(value > 0.0) {
            return Err(Error::NonPositivePsi { index: i, value });
        }
        values.push(-2.0 * p.nu * (dpsi[i * stride].re / m as f64) / value);
    }
    VectorField::new(vec![ScalarField::new(grid.clone(), values)?])
}

fn step_count(horizon: f64, dt: f64) -> Result<(usize, f64)> {
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(Error::NonPositiveTime(horizon));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::NonPositiveTime(dt));
    }
    let steps = (horizon / dt - 1e-9).ceil().max(0.0) as usize;
    Ok((steps, if steps == 0 { 0.0 } else { horizon / steps as f64 }))
}

fn check_diffusion_number(grid: &Grid, nu: f64, dt: f64) -> Result<()> {
    for (axis, h) in grid.spacing().iter().enumerate() {
        let number = nu * dt / (h * h);
        if number > 0.25 {
            return Err(Error::UnstableStep(format!(
                "diffusion number nu*dt/h^2 = {number} exceeds 0.25 on axis {axis}"
            )));
        }
    }
    Ok(())
}

/// Forward-Euler solution of `psi_t = nu lap psi + c psi` up to `horizon`.
/// The step is shrunk so that a whole number of steps lands on `horizon`.
pub fn fd_reaction_diffusion(
    psi_init: &ScalarField,
    c: &ReactionSchedule,
    nu: f64,
    horizon: f64,
    dt: f64,
) -> Result<ScalarField> {
    let grid = psi_init.grid();
    let (steps, dt) = step_count(horizon, dt)?;
    check_diffusion_number(grid, nu, dt)?;
    let mut psi = psi_init.clone();
    for step in 0..steps {
        let t = step as f64 * dt;
        let reaction = c.at(grid, t)?;
        let growth = reaction.max_abs() * dt;
        if growth > 0.1 {
            return Err(Error::UnstableStep(format!("reaction step |c|*dt = {growth} exceeds 0.1 at t = {t}")));
        }
        let lap = laplacian(&psi);
        let values = psi
            .values()
            .iter()
            .zip(lap.values())
            .zip(reaction.values())
            .map(|((&p, &l), &c)| p + dt * (nu * l + c * p))
            .collect();
        psi = ScalarField::from_parts(grid.clone(), values);
    }
    Ok(psi)
}

/// Forward-Euler solution of `v_t + v v_x = nu v_xx` on a 1D periodic grid,
/// central differences in space.
pub fn fd_burgers(v0: &ScalarField, nu: f64, horizon: f64, dt: f64) -> Result<VectorField> {
    let grid = v0.grid();
    if grid.dim() != 1 || !grid.is_periodic(0) {
        return Err(Error::InvalidGrid("fd_burgers needs a 1D periodic grid".into()));
    }
    let (steps, dt) = step_count(horizon, dt)?;
    check_diffusion_number(grid, nu, dt)?;
    let h = grid.spacing()[0];
    let n = grid.len();
    let mut v = v0.values().to_vec();
    let mut next = vec![0.0; n];
    let (adv, dif) = (dt / (2.0 * h), nu * dt / (h * h));
    for step in 0..steps {
        let courant = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) * dt / h;
        if courant > 0.5 {
            return Err(Error::UnstableStep(format!(
                "Courant number max|v|*dt/h = {courant} exceeds 0.5 at step {step}"
            )));
        }
        for i in 0..n {
            let l = v[(i + n - 1) % n];
            let r = v[(i + 1) % n];
            let c = v[i];
            next[i] = c - adv * c * (r - l) + dif * (r - 2.0 * c + l);
        }
        std::mem::swap(&mut v, &mut next);
    }
    VectorField::new(vec![ScalarField::new(grid.clone(), v)?])
}

/// Decay factor `exp(-nu k^2 t)` of a heat mode with wavenumber `k`.
pub fn heat_mode_factor(nu: f64, k: f64, t: f64) -> f64 {
    (-nu * k * k * t).exp()
}

/// Freely evolving Gaussian packet on a 1D grid,
///
/// ```text
/// psi = s^(-1/2) exp(-(x - x0 - a k0 t)^2 / (4 sigma0^2 s) + i k0 x - i a k0^2 t / 2),
/// s = 1 + i a t / (2 sigma0^2),  a = hbar / m,
/// ```
///
/// which solves `i psi_t = -(a / 2) psi_xx`.
pub fn gaussian_free_packet(
    grid: &Grid,
    x0: f64,
    k0: f64,
    sigma0: f64,
    hbar_over_m: f64,
    t: f64,
) -> Result<ComplexField> {
    if grid.dim() != 1 {
        return Err(Error::InvalidGrid("the Gaussian packet is one-dimensional".into()));
    }
    if !(sigma0.is_finite() && sigma0 > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma0 must be positive, got {sigma0}")));
    }
    let a = hbar_over_m;
    let s = Complex64::new(1.0, a * t / (2.0 * sigma0 * sigma0));
    let amplitude = s.sqrt().inv();
    Ok(ComplexField::from_fn(grid, |x| {
        let u = x[0] - x0 - a * k0 * t;
        let exponent = -Complex64::new(u * u, 0.0) / (4.0 * sigma0 * sigma0 * s)
            + Complex64::new(0.0, k0 * x[0] - 0.5 * a * k0 * k0 * t);
        amplitude * exponent.exp()
    }))
}

fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn simpson_refine(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(fa, flm, fm, a, m);
    let right = simpson(fm, frm, fb, m, b);
    let delta = left + right - whole;
    // Past roundoff level the estimate cannot improve; stop refining.
    if depth == 0 || delta.abs() <= 15.0 * tol || tol < f64::EPSILON * whole.abs() {
        return left + right + delta / 15.0;
    }
    simpson_refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_quadrature(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    // Start from a few panels so narrow peaks are not stepped over.
    let panels = 16;
    let width = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let (lo, hi) = (a + i as f64 * width, a + (i + 1) as f64 * width);
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = simpson(fa, fm, fb, lo, hi);
            simpson_refine(&f, lo, hi, fa, fm, fb, whole, tol / panels as f64, 40)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(n: usize) -> Grid {
        Grid::periodic_1d(n, 0.0, 2.0 * PI).unwrap()
    }

    #[test]
    fn burgers_exact_zero_and_identity() {
        let g = ring(64);
        let zero = BurgersProblem::new(0.1, ScalarField::zeros(&g)).unwrap();
        assert_eq!(burgers_exact(&zero, 1.0).unwrap().max_abs(), 0.0);
        let v0 = ScalarField::from_fn(&g, |x| x[0].sin() + 0.3 * (2.0 * x[0]).cos());
        let p = BurgersProblem::new(0.1, v0.clone()).unwrap();
        let back = burgers_exact(&p, 0.0).unwrap();
        // Roundoff is amplified by max(psi) / min(psi), about e^13 here.
        let err = back.component(0).sub(&v0).unwrap().max_abs();
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn burgers_rejects_net_flow() {
        let g = ring(32);
        assert!(BurgersProblem::new(0.1, ScalarField::constant(&g, 1.0)).is_err());
        assert!(BurgersProblem::new(0.1, ScalarField::zeros(&Grid::open_1d(32, 0.0, 1.0).unwrap())).is_err());
    }

    #[test]
    fn burgers_exact_decays_a_small_mode_linearly() {
        // At tiny amplitude advection is negligible and v decays like a heat mode.
        let g = ring(64);
        let eps = 1e-6;
        let p = BurgersProblem::new(0.2, ScalarField::from_fn(&g, |x| eps * (3.0 * x[0]).sin())).unwrap();
        let v = burgers_exact(&p, 0.7).unwrap();
        let factor = heat_mode_factor(0.2, 3.0, 0.7);
        for (i, x) in g.points().enumerate() {
            assert!((v.component(0).values()[i] - eps * factor * (3.0 * x[0]).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn fd_burgers_keeps_constants() {
        let g = ring(32);
        let v = fd_burgers(&ScalarField::constant(&g, 0.7), 0.1, 0.5, 1e-3).unwrap();
        assert!(v.component(0).values().iter().all(|&x| (x - 0.7).abs() < 1e-14));
        assert_eq!(fd_burgers(&ScalarField::zeros(&g), 0.1, 0.5, 1e-3).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn fd_checks_stability() {
        let g = ring(64);
        let one = ScalarField::constant(&g, 1.0);
        assert!(matches!(
            fd_reaction_diffusion(&one, &ReactionSchedule::Uniform(0.0), 1.0, 1.0, 0.1),
            Err(Error::UnstableStep(_))
        ));
        assert!(matches!(
            fd_reaction_diffusion(&one, &ReactionSchedule::Uniform(50.0), 1e-3, 1.0, 0.01),
            Err(Error::UnstableStep(_))
        ));
        let fast = ScalarField::from_fn(&g, |x| 100.0 * x[0].sin());
        assert!(matches!(fd_burgers(&fast, 0.01, 0.1, 0.01), Err(Error::UnstableStep(_))));
    }

    #[test]
    fn fd_reaction_diffusion_examples() {
        let g = ring(32);
        let one = ScalarField::constant(&g, 1.0);
        let same = fd_reaction_diffusion(&one, &ReactionSchedule::Uniform(0.0), 0.1, 2.0, 1e-3).unwrap();
        assert!(same.values().iter().all(|&v| v == 1.0));

        let mut errors = Vec::new();
        for dt in [1e-2, 5e-3] {
            let out = fd_reaction_diffusion(&one, &ReactionSchedule::Uniform(0.5), 0.1, 1.0, dt).unwrap();
            errors.push((out.values()[0] - 0.5f64.exp()).abs());
        }
        assert!(errors[0] < 5e-3 && (errors[0] / errors[1] - 2.0).abs() < 0.1, "{errors:?}");
    }

    #[test]
    fn fd_heat_mode_error_is_first_order_in_dt() {
        let g = ring(16);
        let nu = 0.1;
        let mode = ScalarField::from_fn(&g, |x| x[0].cos());
        // Compare against the exact decay of the discrete Laplacian eigenvalue
        // to isolate the time error.
        let h = g.spacing()[0];
        let lambda = 4.0 * (0.5 * h).sin().powi(2) / (h * h);
        let mut errors = Vec::new();
        for dt in [4e-3, 2e-3, 1e-3] {
            let out = fd_reaction_diffusion(&mode, &ReactionSchedule::Uniform(0.0), nu, 1.0, dt).unwrap();
            errors.push((out.values()[0] - (-nu * lambda).exp()).abs());
        }
        for w in errors.windows(2) {
            assert!((w[0] / w[1] - 2.0).abs() < 0.05, "{errors:?}");
        }
    }

    #[test]
    fn fd_reaction_diffusion_conserves_mass_without_reaction() {
        let g = ring(64);
        let init = ScalarField::from_fn(&g, |x| 1.0 + 0.5 * x[0].cos() + 0.2 * (5.0 * x[0]).sin());
        let out = fd_reaction_diffusion(&init, &ReactionSchedule::Uniform(0.0), 0.1, 1.0, 1e-3).unwrap();
        let before = crate::calculus::volume_integral(&init);
        let after = crate::calculus::volume_integral(&out);
        assert!((before - after).abs() < 1e-8);
    }

    #[test]
    fn packet_at_rest_and_at_time_zero() {
        let g = Grid::open_1d(201, -10.0, 10.0).unwrap();
        let p = gaussian_free_packet(&g, 1.0, 2.0, 1.5, 1.0, 0.0).unwrap();
        for (i, x) in g.points().enumerate() {
            let expect = Complex64::new(-(x[0] - 1.0).powi(2) / 9.0, 2.0 * x[0]).exp();
            assert!((p.values()[i] - expect).norm() < 1e-14);
        }
        let still = gaussian_free_packet(&g, 0.0, 0.0, 1.0, 1.0, 3.0).unwrap();
        let w: Vec<f64> = still.values().iter().map(|z| z.norm_sqr()).collect();
        for i in 0..100 {
            assert!((w[i] - w[200 - i]).abs() < 1e-14);
        }
    }

    #[test]
    fn packet_solves_the_free_schrodinger_equation() {
        let g = Grid::open_1d(4, 0.0, 0.3).unwrap();
        let (a, dt, dx) = (0.7, 1e-4, 1e-3);
        let at = |x: f64, t: f64| {
            let g = Grid::open_1d(4, x, x + 3.0).unwrap();
            gaussian_free_packet(&g, 0.2, 1.3, 0.8, a, t).unwrap().values()[0]
        };
        let _ = g;
        for &(x, t) in &[(0.0, 0.5), (1.0, 1.2), (-0.7, 0.1)] {
            let psi_t = (at(x, t + dt) - at(x, t - dt)) / (2.0 * dt);
            let psi_xx = (at(x + dx, t) - 2.0 * at(x, t) + at(x - dx, t)) / (dx * dx);
            let residual = Complex64::new(0.0, 1.0) * psi_t + 0.5 * a * psi_xx;
            assert!(residual.norm() < 1e-5, "{residual}");
        }
    }

    #[test]
    fn adaptive_quadrature_integrates_a_gaussian() {
        let value = adaptive_quadrature(|x| (-x * x).exp(), -12.0, 12.0, 1e-12);
        assert!((value - PI.sqrt()).abs() < 1e-11);
    }
}
