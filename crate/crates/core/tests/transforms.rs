use std::f64::consts::PI;

use colehopf::oracles::gaussian_free_packet;
use colehopf::*;
use num_complex::Complex64;

fn ring(n: usize) -> Grid {
    Grid::periodic_1d(n, 0.0, 2.0 * PI).unwrap()
}

fn sine(g: &Grid) -> VectorField {
    VectorField::from_fn(g, |x, v| v[0] = x[0].sin())
}

#[test]
fn linear_velocity_gives_gaussian_psi() {
    let g = Grid::open_1d(201, 0.0, 3.0).unwrap();
    let params = FluidParams::kinematic(0.5).unwrap();
    let v = VectorField::from_fn(&g, |x, o| o[0] = x[0]);
    let psi = velocity_to_psi(&v, &params, 1.0).unwrap();
    // Trapezoid integration of a linear integrand is exact.
    for (x, p) in g.points().zip(psi.values()) {
        assert!((p - (-x[0] * x[0] / 2.0).exp()).abs() < 1e-12);
    }
}

#[test]
fn sine_velocity_gives_periodic_psi() {
    let g = ring(256);
    let params = FluidParams::kinematic(0.1).unwrap();
    let psi = velocity_to_psi(&sine(&g), &params, 1.0).unwrap();
    let h = g.spacing()[0];
    for (x, p) in g.points().zip(psi.values()) {
        let phi = 1.0 - x[0].cos();
        let exact = (-phi / 0.2).exp();
        // Cumulative trapezoid error on the potential is h^2 phi / 12.
        let bound = 1.01 * h * h * phi / 12.0 / 0.2;
        assert!((p / exact - 1.0).abs() <= bound + 1e-13, "{}", x[0]);
    }
}

#[test]
fn gaussian_psi_gives_linear_velocity() {
    let nu = 0.3;
    let g = Grid::open_1d(101, -2.0, 2.0).unwrap();
    let psi = ScalarField::from_fn(&g, |x| (-x[0] * x[0] / (4.0 * nu)).exp());
    let v = psi_to_velocity(&psi, &FluidParams::kinematic(nu).unwrap()).unwrap();
    for (x, v) in g.points().zip(v.component(0).values()) {
        assert!((v - x[0]).abs() < 1e-12);
    }
}

#[test]
fn round_trip_converges_at_second_order() {
    let params = FluidParams::kinematic(0.1).unwrap();
    let error = |n: usize| {
        let g = ring(n);
        let v = sine(&g);
        psi_to_velocity(&velocity_to_psi(&v, &params, 1.0).unwrap(), &params)
            .unwrap()
            .sub(&v)
            .unwrap()
            .max_abs()
    };
    let errors: Vec<f64> = [128, 256, 512].iter().map(|&n| error(n)).collect();
    assert!(errors[0] < 1e-3);
    for w in errors.windows(2) {
        assert!((3.5..=4.5).contains(&(w[0] / w[1])), "{errors:?}");
    }
}

#[test]
fn initial_psi_is_max_normalized() {
    let g = ring(256);
    let psi = initial_psi(&sine(&g), &FluidParams::kinematic(0.1).unwrap()).unwrap();
    assert!((psi.values()[0] - 1.0).abs() < 1e-15);
    assert!((psi.max() - 1.0).abs() < 1e-15);
    let at_pi = psi.values()[128];
    assert!((at_pi / (-10.0f64).exp() - 1.0).abs() < 1e-3, "{at_pi}");
}

#[test]
fn reaction_of_decaying_exponential() {
    let g = Grid::open_1d(801, 0.0, 4.0).unwrap();
    let psi = ScalarField::from_fn(&g, |x| (-x[0]).exp());
    let c = reaction_from_psi(&psi, &FluidParams::kinematic(0.1).unwrap()).unwrap();
    for (x, c) in g.points().zip(c.field().values()) {
        assert!((c - 0.8 * (-x[0]).exp()).abs() < 1e-9);
    }
}

#[test]
fn plane_wave_current_is_uniform_k() {
    // j = A^2 (hbar/m) grad theta with A = 1; central differences of the
    // real and imaginary parts reproduce it up to the factor sin(kh)/(kh).
    let g = ring(2048);
    let k = 2.0;
    let s = WaveState::new(ComplexField::from_fn(&g, |x| Complex64::from_polar(1.0, k * x[0])), 1.0).unwrap();
    let j = probability_current(&s);
    let first = j.component(0).values()[0];
    assert!(j.component(0).values().iter().all(|&v| (v - first).abs() < 1e-12));
    assert!((first - k).abs() < 1e-4 * k);
}

#[test]
fn gaussian_packet_current() {
    let (hbar_over_m, k) = (1.5, 2.0);
    let error = |n: usize| {
        let g = Grid::open_1d(n, -5.0, 5.0).unwrap();
        let psi = ComplexField::from_fn(&g, |x| Complex64::new(-x[0] * x[0], k * x[0]).exp());
        let j = probability_current(&WaveState::new(psi, hbar_over_m).unwrap());
        g.points()
            .zip(j.component(0).values())
            .map(|(x, j)| (j - (-2.0 * x[0] * x[0]).exp() * k * hbar_over_m).abs())
            .fold(0.0, f64::max)
    };
    let (coarse, fine) = (error(401), error(801));
    assert!(coarse < 1e-2, "{coarse}");
    assert!((3.5..=4.5).contains(&(coarse / fine)));
}

#[test]
fn phase_velocity_of_sine_phase() {
    let hbar_over_m = 0.5;
    let error = |n: usize| {
        let g = ring(n);
        let psi = ComplexField::from_fn(&g, |x| Complex64::from_polar(1.0, x[0].sin()));
        let v = velocity_from_wavefunction(&WaveState::new(psi, hbar_over_m).unwrap()).unwrap();
        g.points().zip(v.component(0).values()).map(|(x, v)| (v - hbar_over_m * x[0].cos()).abs()).fold(0.0, f64::max)
    };
    let (coarse, fine) = (error(64), error(128));
    assert!(coarse < 1e-3);
    assert!((3.5..=4.5).contains(&(coarse / fine)));
}

#[test]
fn velocity_times_density_matches_current() {
    let g = Grid::open_1d(801, -6.0, 6.0).unwrap();
    let psi = gaussian_free_packet(&g, 0.0, 1.2, 1.0, 0.8, 0.6).unwrap();
    let s = WaveState::new(psi, 0.8).unwrap();
    let v = velocity_from_wavefunction(&s).unwrap();
    let w = probability_density(&s);
    let j = probability_current(&s);
    for p in 0..g.len() {
        let vw = v.component(0).values()[p] * w.values()[p];
        assert!((vw - j.component(0).values()[p]).abs() < 1e-3);
    }
}

#[test]
fn continuity_residual_is_second_order_for_free_packets() {
    let residual = |n: usize, dt: f64| {
        let g = Grid::open_1d(n, -15.0, 15.0).unwrap();
        let state = |t: f64| WaveState::new(gaussian_free_packet(&g, -1.0, 1.0, 1.2, 1.0, t).unwrap(), 1.0).unwrap();
        continuity_residual(&state(0.5), &state(0.5 + dt), dt).unwrap()
    };
    let r: Vec<f64> = [(301, 0.02), (601, 0.01), (1201, 0.005)].iter().map(|&(n, dt)| residual(n, dt)).collect();
    for w in r.windows(2) {
        assert!((3.5..=4.5).contains(&(w[0] / w[1])), "{r:?}");
    }
}

#[test]
fn plane_wave_pair_has_negligible_residual() {
    let g = ring(128);
    let wave = |phase: f64| {
        WaveState::new(ComplexField::from_fn(&g, |x| Complex64::from_polar(1.0, 3.0 * x[0] - phase)), 1.0).unwrap()
    };
    assert!(continuity_residual(&wave(0.0), &wave(0.045), 0.01).unwrap() < 1e-10);
}
