//! The Cole-Hopf pair `v = -2 nu grad(psi) / psi` and
//! `psi = C exp(-(1 / 2 nu) * integral of v . dx)`, plus the reaction
//! coefficient of the resulting linear equation
//! `d psi / dt - nu lap psi = (dp / 2 mu) psi`.

use crate::calculus::{gradient, potential_from_origin, PotentialTolerance};
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidParams {
    nu: f64,
    mu: f64,
    rho: f64,
}

impl FluidParams {
    /// Kinematic viscosity `nu`, dynamic viscosity `mu` and density `rho`;
    /// `nu` must equal `mu / rho` to 1e-12 relative.
    pub fn new(nu: f64, mu: f64, rho: f64) -> Result<Self> {
        for (name, value) in [("nu", nu), ("mu", mu), ("rho", rho)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {value}")));
            }
        }
        if ((mu / rho - nu) / nu).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("nu = {nu} disagrees with mu / rho = {}", mu / rho)));
        }
        Ok(Self { nu, mu, rho })
    }

    pub fn from_dynamic(mu: f64, rho: f64) -> Result<Self> {
        Self::new(mu / rho, mu, rho)
    }

    /// Unit density, so `mu = nu`.
    pub fn kinematic(nu: f64) -> Result<Self> {
        Self::new(nu, nu, 1.0)
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

/// The reaction coefficient `c` (units 1/time) multiplying `psi`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionField(ScalarField);

impl ReactionField {
    pub fn new(c: ScalarField) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::InvalidField("reaction coefficient must be finite".into()));
        }
        Ok(Self(c))
    }

    pub fn field(&self) -> &ScalarField {
        &self.0
    }

    pub fn into_field(self) -> ScalarField {
        self.0
    }
}

/// Smallest admissible `psi`: both an absolute and a max-relative bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiFloor {
    pub absolute: f64,
    pub relative: f64,
}

impl Default for PsiFloor {
    fn default() -> Self {
        Self { absolute: 1e-300, relative: 1e-14 }
    }
}

impl PsiFloor {
    pub fn check(&self, psi: &ScalarField) -> Result<()> {
        let floor = self.absolute.max(self.relative * psi.max());
        match psi.values().iter().position(|&v| !(v > floor)) {
            Some(index) => Err(Error::NonPositivePsi { index, value: psi.values()[index] }),
            None => Ok(()),
        }
    }
}

fn psi_from_potential(potential: &ScalarField, nu: f64, shift: f64, log_scale: f64) -> Result<ScalarField> {
    let psi = potential.map(|p| (log_scale - (p - shift) / (2.0 * nu)).exp());
    if let Some(index) = psi.values().iter().position(|&v| !(v > PsiFloor::default().absolute) || !v.is_finite()) {
        return Err(Error::NonPositivePsi { index, value: psi.values()[index] });
    }
    Ok(psi)
}

/// `psi(x) = normalization * exp(-(1 / 2 nu) * line integral of v from the origin to x)`.
pub fn velocity_to_psi(v: &VectorField, params: &FluidParams, normalization: f64) -> Result<ScalarField> {
    velocity_to_psi_with_tolerance(v, params, normalization, &PotentialTolerance::default())
}

pub fn velocity_to_psi_with_tolerance(
    v: &VectorField,
    params: &FluidParams,
    normalization: f64,
    tolerance: &PotentialTolerance,
) -> Result<ScalarField> {
    if !(normalization.is_finite() && normalization > 0.0) {
        return Err(Error::InvalidParameter(format!("normalization must be positive, got {normalization}")));
    }
    tolerance.check_circulation(v)?;
    let potential = potential_from_origin(v, tolerance)?;
    psi_from_potential(&potential, params.nu, 0.0, normalization.ln())
}

/// The transformed initial condition, scaled so that `max psi = 1`.
pub fn initial_psi(v0: &VectorField, params: &FluidParams) -> Result<ScalarField> {
    let tolerance = PotentialTolerance::default();
    tolerance.check_circulation(v0)?;
    let potential = potential_from_origin(v0, &tolerance)?;
    psi_from_potential(&potential, params.nu, potential.min(), 0.0)
}

/// `grad(psi) / psi`, evaluated as the gradient of `ln psi`.
fn log_gradient(psi: &ScalarField) -> Result<VectorField> {
    PsiFloor::default().check(psi)?;
    let top = psi.max();
    Ok(gradient(&psi.map(|p| (p / top).ln())))
}

/// `v = -2 nu grad(psi) / psi`.
///
/// The quotient is evaluated as `grad(ln psi)`: identical in exact arithmetic,
/// exact for Gaussian `psi`, and unchanged by rescaling `psi`.
pub fn psi_to_velocity(psi: &ScalarField, params: &FluidParams) -> Result<VectorField> {
    Ok(log_gradient(psi)?.scale(-2.0 * params.nu))
}

/// `c = dp / (2 mu)`.
pub fn reaction_from_pressure(delta_p: &ScalarField, params: &FluidParams) -> ReactionField {
    ReactionField(delta_p.scale(1.0 / (2.0 * params.mu)))
}

/// Pressure excess over a reference value (e.g. ambient pressure).
pub fn pressure_difference(p: &ScalarField, reference: f64) -> ScalarField {
    p.map(|v| v - reference)
}

/// `c = 8 nu |grad psi|^2 / psi`, with the first power of `psi` in the denominator.
pub fn reaction_from_psi(psi: &ScalarField, params: &FluidParams) -> Result<ReactionField> {
    let g2 = log_gradient(psi)?.magnitude_squared();
    let c = psi
        .zip_with(&g2, |p, g| 8.0 * params.nu * p * g)?;
    Ok(ReactionField(c))
}

/// Pointwise Reynolds-number reading `Re = t c / 2` of the reaction coefficient.
pub fn reynolds_diagnostic(c: &ReactionField, t: f64) -> Result<ScalarField> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    Ok(c.0.scale(0.5 * t))
}
