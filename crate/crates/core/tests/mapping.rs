use std::f64::consts::PI;

use colehopf::oracles::{burgers_exact, fd_reaction_diffusion, BurgersProblem};
use colehopf::*;

fn ring(n: usize) -> Grid {
    Grid::periodic_1d(n, 0.0, 2.0 * PI).unwrap()
}

fn config(n: usize, nu: f64) -> MappingConfig {
    MappingConfig::new(FluidParams::kinematic(nu).unwrap(), ring(n))
}

fn uniform(cfg: &mut MappingConfig, gamma: f64, window: f64, substeps: usize) {
    cfg.reaction = ReactionMode::Prescribed(ReactionSchedule::Uniform(gamma));
    cfg.window = window;
    cfg.substeps = substeps;
}

#[test]
fn weak_reaction_contracts_like_a_picard_series() {
    let mut cfg = config(64, 0.1);
    uniform(&mut cfg, 0.4, 1.0, 16);
    let one = ScalarField::constant(&cfg.grid, 1.0);
    let (psi, trace) = fixed_point_solve(&one, 1.0, &cfg).unwrap();
    assert!(trace.converged());
    assert!(trace.is_strictly_decreasing());
    // Successive Picard corrections of psi' = c psi shrink by c t / (m + 2).
    for (m, r) in trace.ratios().iter().take(5).enumerate() {
        let expected = 0.4 / (m as f64 + 2.0);
        assert!((r / expected - 1.0).abs() < 0.05, "{m}: {r} vs {expected}");
    }
    assert!(trace.ratios().iter().all(|&r| r <= 0.2 + 1e-9));
    // Trapezoid weights over 16 nodes put the end state within (t/S)^2 of e^0.4.
    assert!((psi.values()[0] - 0.4f64.exp()).abs() < 1e-3);
}

#[test]
fn strong_reaction_is_cured_by_a_shorter_window() {
    let mut cfg = config(64, 0.1);
    uniform(&mut cfg, 2.0, 1.0, 16);
    let one = ScalarField::constant(&cfg.grid, 1.0);
    let mut solver = MappingSolver::new(cfg.clone()).unwrap();
    let long = solver.iterate_window(&one, 0.0, 1.0, cfg.fp_max_iters, Some(cfg.fp_tolerance)).unwrap();
    let worst = long.trace.ratios().iter().cloned().fold(0.0, f64::max);
    assert!(!long.trace.converged() || worst > 0.9, "{worst}");

    let short = solver.fixed_point(&one, 0.0, 0.5).unwrap();
    assert!(short.trace.ratios().iter().all(|&r| r <= 0.5 + 1e-9));
}

#[test]
fn reaction_beyond_the_contraction_bound_does_not_converge() {
    let mut cfg = config(64, 0.1);
    uniform(&mut cfg, 5.0, 1.0, 2);
    cfg.fp_max_iters = 30;
    let one = ScalarField::constant(&cfg.grid, 1.0);
    match fixed_point_solve(&one, 1.0, &cfg) {
        Err(Error::NotConverged(trace)) => {
            assert_eq!(trace.differences().len(), 30);
            assert!(trace.ratios().iter().all(|&r| r > 1.0));
        }
        other => panic!("expected NotConverged, got {other:?}"),
    }
}

#[test]
fn mapping_matches_finite_differences_for_a_spatial_reaction() {
    let mut cfg = config(128, 0.1);
    let c = ScalarField::from_fn(&cfg.grid, |x| 0.3 * x[0].cos());
    let schedule = ReactionSchedule::Static(ReactionField::new(c).unwrap());
    cfg.reaction = ReactionMode::Prescribed(schedule.clone());
    cfg.window = 0.5;
    cfg.substeps = 32;
    let init = ScalarField::from_fn(&cfg.grid, |x| 1.0 + 0.2 * x[0].sin());
    let (psi, trace) = fixed_point_solve(&init, 0.5, &cfg).unwrap();
    assert!(trace.converged());
    let reference = fd_reaction_diffusion(&init, &schedule, 0.1, 0.5, 1e-4).unwrap();
    assert!(psi.sub(&reference).unwrap().max_abs() < 1e-3);
}

#[test]
fn sine_flow_follows_the_exact_burgers_solution() {
    let nu = 0.1;
    let mut cfg = config(256, nu);
    cfg.window = 0.05;
    let v0 = VectorField::from_fn(&cfg.grid, |x, o| o[0] = x[0].sin());
    let report = march(&v0, 1.0, &cfg).unwrap();
    let problem = BurgersProblem::new(nu, v0.component(0).clone()).unwrap();
    for sample in &report.snapshots {
        let exact = burgers_exact(&problem, sample.time).unwrap();
        let err = sample.velocity.sub(&exact).unwrap().max_abs();
        assert!(err < 1e-2, "t = {}: {err}", sample.time);
    }
    assert_eq!(report.times.len(), 21);
    assert!((report.times.last().unwrap() - 1.0).abs() < 1e-12);
    assert!(report.energy.windows(2).all(|w| w[1] < w[0]));
    assert!(report.warnings.is_empty());
}

#[test]
fn reynolds_schedule_dissipates_energy() {
    let mut cfg = config(256, 0.1);
    cfg.reaction = ReactionMode::ReynoldsSchedule { re0: 50.0, t0: 0.1 };
    // c w = 2 re0 w / t0 must stay below 2 S for the iteration to contract.
    cfg.window = 0.001;
    cfg.substeps = 1;
    cfg.fp_max_iters = 60;
    let v0 = VectorField::from_fn(&cfg.grid, |x, o| o[0] = x[0].sin());
    let report = march(&v0, 0.2, &cfg).unwrap();
    assert!(report.warnings.is_empty());
    let rise = report.energy.windows(2).map(|w| w[1] - w[0]).fold(f64::MIN, f64::max);
    assert!(rise <= 0.0, "{rise}");
    assert!(report.energy.last().unwrap() < &report.energy[0]);
    assert!(report.traces.iter().all(|t| t.converged()));
}

#[test]
fn windows_below_the_kernel_floor_are_reported() {
    let mut cfg = config(128, 0.1);
    cfg.window = 0.001;
    cfg.substeps = 1;
    let v0 = VectorField::from_fn(&cfg.grid, |x, o| o[0] = x[0].sin());
    let report = march(&v0, 0.003, &cfg).unwrap();
    assert!(report.warnings.iter().any(|w| w.contains("kernel floor")));
}

#[test]
fn zero_reaction_separation_decays() {
    let mut cfg = config(128, 0.2);
    cfg.window = 0.1;
    let v0 = VectorField::from_fn(&cfg.grid, |x, o| o[0] = x[0].sin());
    let delta = ScalarField::from_fn(&cfg.grid, |x| 0.01 * (2.0 * x[0]).sin());
    let curve = perturbation_separation(&v0, &delta, 1.0, &cfg).unwrap();
    assert_eq!(curve.times.len(), 11);
    assert!(curve.separation[0] > 0.0);
    assert!(curve.separation.windows(2).all(|w| w[1] < w[0]), "{:?}", curve.separation);
}

#[test]
fn self_consistent_runs_stay_positive_and_close() {
    let mut cfg = config(64, 0.2);
    cfg.reaction = ReactionMode::SelfConsistent;
    cfg.window = 0.05;
    cfg.substeps = 4;
    let v0 = VectorField::from_fn(&cfg.grid, |x, o| o[0] = 0.5 * x[0].sin());
    let report = march(&v0, 0.5, &cfg).unwrap();
    for s in &report.snapshots {
        assert!(s.psi.min() > 0.0);
        assert!(s.velocity.is_finite());
    }
    let delta = ScalarField::from_fn(&cfg.grid, |x| 1e-3 * x[0].cos());
    let curve = perturbation_separation(&v0, &delta, 0.5, &cfg).unwrap();
    assert!(curve.separation.iter().all(|s| s.is_finite()));
    assert!(curve.separation.last().unwrap() < &(10.0 * curve.separation[0]));
}

#[test]
fn zero_reaction_march_equals_direct_heat_propagation() {
    let mut cfg = config(64, 0.1);
    cfg.window = 0.25;
    let init = ScalarField::from_fn(&cfg.grid, |x| (0.5 * x[0].cos()).exp());
    let report = MappingSolver::new(cfg.clone()).unwrap().march_psi(&init, 1.0).unwrap();
    let direct = psi0(&init, 1.0, &cfg).unwrap();
    let marched = &report.final_snapshot().unwrap().psi;
    let gap = marched.scale(1.0 / marched.max()).sub(&direct.scale(1.0 / direct.max())).unwrap().max_abs();
    assert!(gap < 1e-6, "{gap}");
    assert!(report.fp_iterations[1..].iter().all(|&n| n == 1));
}

#[test]
fn psi_stays_positive_under_strong_prescribed_reaction() {
    let mut cfg = config(64, 0.05);
    let c = ScalarField::from_fn(&cfg.grid, |x| -3.0 + 2.0 * x[0].sin());
    cfg.reaction = ReactionMode::Prescribed(ReactionSchedule::Static(ReactionField::new(c).unwrap()));
    cfg.window = 0.1;
    cfg.substeps = 8;
    let init = ScalarField::from_fn(&cfg.grid, |x| 1.0 + 0.9 * x[0].cos());
    let report = MappingSolver::new(cfg).unwrap().march_psi(&init, 1.0).unwrap();
    assert!(report.snapshots.iter().all(|s| s.psi.min() > 0.0));
}
