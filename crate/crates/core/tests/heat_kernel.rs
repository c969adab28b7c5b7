use std::f64::consts::PI;

use colehopf::oracles::adaptive_quadrature;
use colehopf::*;

fn ring(n: usize, length: f64) -> Grid {
    Grid::periodic_1d(n, 0.0, length).unwrap()
}

#[test]
fn free_space_kernel_prefactor_cancels() {
    let nu = 0.25;
    let dt = 1.0 / (4.0 * PI * nu);
    assert!((free_space_kernel(&[0.3], &[0.3], dt, nu).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn free_space_kernel_is_normalized() {
    for (nu, dt, x) in [(0.1f64, 0.02, 0.0), (1.0, 3.0, -2.0), (0.01, 1e-3, 5.0)] {
        let reach = 40.0 * (nu * dt).sqrt();
        let total = adaptive_quadrature(|xi| free_space_kernel(&[x], &[xi], dt, nu).unwrap(), x - reach, x + reach, 1e-13);
        assert!((total - 1.0).abs() < 1e-8, "{total}");
    }
}

#[test]
fn free_space_kernel_composes() {
    let (nu, t1, t2): (f64, f64, f64) = (0.3, 0.4, 0.7);
    for (x, y) in [(0.0, 0.5), (1.0, -1.0), (0.2, 0.2)] {
        let reach = 40.0 * (nu * (t1 + t2)).sqrt();
        let composed = adaptive_quadrature(
            |xi| free_space_kernel(&[x], &[xi], t1, nu).unwrap() * free_space_kernel(&[xi], &[y], t2, nu).unwrap(),
            x - reach,
            x + reach,
            1e-14,
        );
        let direct = free_space_kernel(&[x], &[y], t1 + t2, nu).unwrap();
        assert!((composed - direct).abs() < 1e-8);
    }
}

#[test]
fn kernel_rejects_offsets_below_the_floor() {
    let spec = KernelSpec::new(0.1, ring(64, 1.0)).unwrap();
    let dt = 0.5 * spec.dt_floor();
    assert!(matches!(spec.free_space(&[0.0], &[0.0], dt), Err(Error::TimeOffsetTooSmall { .. })));
    assert!(matches!(build_kernel_table(&spec, dt), Err(Error::TimeOffsetTooSmall { .. })));
    assert!(matches!(spec.propagator(dt).unwrap(), Propagator::Identity));
}

#[test]
fn periodic_kernel_equilibrates() {
    let length = 1.0;
    let spec = KernelSpec::new(1.0, ring(32, length)).unwrap();
    for (x, xi) in [(0.0, 0.5), (0.1, 0.9), (0.3, 0.3)] {
        assert!((spec.periodic(&[x], &[xi], 10.0).unwrap() - 1.0 / length).abs() < 1e-6);
    }
}

#[test]
fn periodic_kernel_is_normalized_and_symmetric() {
    let length = 2.0;
    let spec = KernelSpec::new(0.5, ring(32, length)).unwrap();
    for dt in [0.05, 0.5, 2.0] {
        let total = adaptive_quadrature(|xi| spec.periodic(&[0.3], &[xi], dt).unwrap(), 0.0, length, 1e-13);
        assert!((total - 1.0).abs() < 1e-9);
        for (a, b) in [(0.1, 1.7), (0.0, 1.0), (1.9, 0.2)] {
            let forward = spec.periodic(&[a], &[b], dt).unwrap();
            assert!((forward - spec.periodic(&[b], &[a], dt).unwrap()).abs() < 1e-15);
            assert!((forward - spec.periodic(&[a + length], &[b], dt).unwrap()).abs() < 1e-12);
        }
    }
}

#[test]
fn table_keeps_constants_exactly() {
    let g = Grid::new(vec![24, 16], vec![0.25, 0.4], vec![0.0, 0.0], vec![true, true]).unwrap();
    let spec = KernelSpec::new(0.2, g.clone()).unwrap();
    let table = build_kernel_table(&spec, 0.3).unwrap();
    let out = convolve(&table, &ScalarField::constant(&g, 3.5)).unwrap();
    let first = out.values()[0];
    assert!(out.values().iter().all(|&v| v == first));
    assert!((first - 3.5).abs() < 1e-14);
    assert_eq!(convolve(&table, &ScalarField::zeros(&g)).unwrap().max_abs(), 0.0);
}

#[test]
fn table_decays_a_cosine_mode() {
    let (nu, length) = (0.1, 3.0);
    let g = ring(256, length);
    let k = 2.0 * PI / length;
    let spec = KernelSpec::new(nu, g.clone()).unwrap();
    let mode = ScalarField::from_fn(&g, |x| (k * x[0]).cos());
    for dt in [0.01, 0.3, 2.0] {
        let out = convolve(&build_kernel_table(&spec, dt).unwrap(), &mode).unwrap();
        let expected = mode.scale((-nu * k * k * dt).exp());
        assert!(out.sub(&expected).unwrap().max_abs() < 1e-6);
    }
}

#[test]
fn tables_compose() {
    let g = Grid::new(vec![64, 48], vec![0.1, 0.15], vec![0.0, 0.0], vec![true, false]).unwrap();
    let spec = KernelSpec::new(0.05, g.clone()).unwrap();
    let f = ScalarField::from_fn(&g, |x| (2.0 * PI * x[0] / 6.4).sin() * (-(x[1] - 3.6).powi(2)).exp() + 1.0);
    let once = build_kernel_table(&spec, 0.2).unwrap();
    let twice = build_kernel_table(&spec, 0.4).unwrap();
    let stepped = convolve(&once, &convolve(&once, &f).unwrap()).unwrap();
    let direct = convolve(&twice, &f).unwrap();
    // The open axis loses mass through its edges; compare away from them.
    for (p, (a, b)) in stepped.values().iter().zip(direct.values()).enumerate() {
        let j = g.multi_index(p)[1];
        if (12..36).contains(&j) {
            assert!((a - b).abs() < 1e-6, "{p}: {a} vs {b}");
        }
    }
    let periodic = ring(128, 2.0);
    let spec = KernelSpec::new(0.05, periodic.clone()).unwrap();
    let f = ScalarField::from_fn(&periodic, |x| (PI * x[0]).cos().exp());
    let once = build_kernel_table(&spec, 0.2).unwrap();
    let stepped = convolve(&once, &convolve(&once, &f).unwrap()).unwrap();
    let direct = convolve(&build_kernel_table(&spec, 0.4).unwrap(), &f).unwrap();
    assert!(stepped.sub(&direct).unwrap().max_abs() < 1e-6);
}

#[test]
fn gaussian_widens_by_two_nu_dt() {
    let g = Grid::open_1d(801, -20.0, 20.0).unwrap();
    let (nu, dt, s2) = (0.1, 1.0, 1.0);
    let spec = KernelSpec::new(nu, g.clone()).unwrap();
    let f = ScalarField::from_fn(&g, |x| (-x[0] * x[0] / (2.0 * s2)).exp());
    let out = convolve(&build_kernel_table(&spec, dt).unwrap(), &f).unwrap();
    let widened = s2 + 2.0 * nu * dt;
    let exact = ScalarField::from_fn(&g, |x| (s2 / widened).sqrt() * (-x[0] * x[0] / (2.0 * widened)).exp());
    assert!(out.sub(&exact).unwrap().max_abs() < 1e-5);
}

#[test]
fn periodic_convolution_conserves_mass() {
    let g = Grid::new(vec![40, 30], vec![0.1, 0.2], vec![0.0, 0.0], vec![true, true]).unwrap();
    let spec = KernelSpec::new(0.3, g.clone()).unwrap();
    let f = ScalarField::from_fn(&g, |x| 1.0 + (x[0] * 3.0).sin().powi(2) * (x[1]).cos().abs());
    for dt in [0.01, 0.2, 5.0] {
        let table = build_kernel_table(&spec, dt).unwrap();
        // Sampling a Gaussian narrower than a few cells loses mass at the
        // level 2 exp(-4 pi^2 nu dt / h^2); the renormalization restores it.
        if 4.0 * PI * PI * 0.3 * dt / 0.04 > 16.0 {
            assert!(table.normalization_correction() < 1e-6);
        }
        let before = volume_integral(&f);
        let after = volume_integral(&convolve(&table, &f).unwrap());
        assert!(((after - before) / before).abs() < 1e-9);
    }
}
