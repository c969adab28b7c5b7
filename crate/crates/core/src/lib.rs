//! Viscous Burgers flow through the Cole-Hopf transform.
//!
//! A potential velocity field `v = grad(phi)` is mapped to a positive scalar
//! `psi = exp(-phi / (2 nu))`, which obeys a linear reaction-diffusion
//! equation. That equation is advanced with heat-kernel integral mappings
//! solved by fixed-point iteration, and the velocity is recovered as
//! `v = -2 nu grad(psi) / psi`.
//!
//! ```
//! use colehopf::{FluidParams, Grid, MappingConfig, VectorField};
//!
//! let grid = Grid::periodic_1d(64, 0.0, std::f64::consts::TAU).unwrap();
//! let v0 = VectorField::from_fn(&grid, |x, v| v[0] = x[0].sin());
//! let mut cfg = MappingConfig::new(FluidParams::kinematic(0.1).unwrap(), grid);
//! cfg.window = 0.1;
//! let report = colehopf::march(&v0, 0.5, &cfg).unwrap();
//! assert!(report.energy.last().unwrap() < &report.energy[0]);
//! ```

pub mod acceptance;
pub mod bifurcation;
pub mod calculus;
pub mod cli;
pub mod cole_hopf;
pub mod error;
pub mod field;
pub mod grid;
pub mod kernel;
pub mod kinematics;
pub mod mapping;
pub mod oracles;
pub mod scenario;
pub mod snapshot;

pub use calculus::{
    curl_residual, divergence, field_norm, gradient, laplacian, partial, path_integral_from_origin,
    potential_from_origin, volume_integral, FieldNorm, NormKind, PotentialTolerance,
};
pub use cole_hopf::{
    initial_psi, pressure_difference, psi_to_velocity, reaction_from_pressure, reaction_from_psi,
    reynolds_diagnostic, velocity_to_psi, FluidParams, PsiFloor, ReactionField,
};
pub use error::{Error, Result};
pub use field::{ComplexField, ScalarField, VectorField};
pub use grid::Grid;
pub use kernel::{build_kernel_table, convolve, free_space_kernel, KernelSpec, KernelTable, Propagator};
pub use kinematics::{
    continuity_residual, probability_current, probability_density, velocity_from_wavefunction, WaveState,
};
pub use mapping::{
    apply_mapping, fixed_point_solve, kinetic_energy, march, perturbation_separation, psi0, IterationTrace,
    MappingConfig, MappingSolver, ReactionMode, ReactionSchedule, SolveReport,
};
pub use snapshot::{FieldData, Snapshot};
