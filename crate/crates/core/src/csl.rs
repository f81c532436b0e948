//! CSL dephasing and heating rates from surface tensors.
//!
//! Every rate is built on the prefactor `c = 2πλσ²ρ²/m_N²` (1/(s·m⁴)).
//! Heating rates carry an explicit `ħ²` from the double commutator of the
//! position operator with the kinetic energy.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, MassProperties, Shape};
use crate::tensors::{self, SymTensor3};
use crate::{units, Mat3, Vec3};

/// Superpositions larger than this fraction of σ leave the quadratic regime.
pub const QUADRATIC_REGIME_LIMIT: f64 = 0.3;

#[derive(Debug, Error)]
pub enum CslError {
    #[error("parameter {name} must be positive and finite, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("inertia tensor is singular (principal moments {0:?})")]
    SingularInertia([f64; 3]),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Model parameters, SI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CslParams {
    /// Collapse rate, 1/s.
    #[serde(default = "default_lambda", deserialize_with = "units::rate")]
    pub lambda: f64,
    /// Localization length, m.
    #[serde(default = "default_sigma", deserialize_with = "units::length")]
    pub sigma: f64,
    /// Nucleon mass, kg.
    #[serde(default = "default_nucleon_mass", deserialize_with = "units::mass")]
    pub nucleon_mass: f64,
    /// Reduced Planck constant, J·s.
    #[serde(default = "default_hbar", deserialize_with = "units::action")]
    pub hbar: f64,
}

fn default_lambda() -> f64 {
    1e-16
}
fn default_sigma() -> f64 {
    1e-7
}
fn default_nucleon_mass() -> f64 {
    1.66054e-27
}
fn default_hbar() -> f64 {
    1.054572e-34
}

impl Default for CslParams {
    fn default() -> Self {
        Self {
            lambda: default_lambda(),
            sigma: default_sigma(),
            nucleon_mass: default_nucleon_mass(),
            hbar: default_hbar(),
        }
    }
}

impl CslParams {
    pub fn validate(&self) -> Result<(), CslError> {
        for (name, value) in [
            ("lambda", self.lambda),
            ("sigma", self.sigma),
            ("nucleon_mass", self.nucleon_mass),
            ("hbar", self.hbar),
        ] {
            positive(name, value)?;
        }
        Ok(())
    }

    /// `2πλσ²ρ²/m_N²`, 1/(s·m⁴).
    pub fn prefactor(&self, density: f64) -> f64 {
        2.0 * std::f64::consts::PI * self.lambda * (self.sigma * density / self.nucleon_mass).powi(2)
    }
}

fn positive(name: &'static str, value: f64) -> Result<(), CslError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(CslError::InvalidParameter { name, value })
    }
}

/// `Λ = c·S`, 1/(s·m²). Carries σ for the quadratic-regime warning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DephasingMatrix {
    pub matrix: SymTensor3,
    pub sigma: f64,
}

/// Which tensor stands for `I` in the rotational heating rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InertiaConvention {
    /// `∫ρ(r²δ − r∘r) dV`.
    #[default]
    Standard,
    /// `J = ∫ρ r∘r dV`, the literal second moment.
    SecondMoment,
}

pub fn dephasing_matrix(s: &SymTensor3, density: f64, p: &CslParams) -> DephasingMatrix {
    DephasingMatrix {
        matrix: *s * p.prefactor(density),
        sigma: p.sigma,
    }
}

/// `Δ·Λ·Δ`, 1/s. Logs a warning beyond `0.3σ`, where the quadratic form
/// overestimates the saturating exact rate.
pub fn superposition_dephasing_rate(lambda: &DephasingMatrix, delta: &Vec3) -> f64 {
    if delta.norm() > QUADRATIC_REGIME_LIMIT * lambda.sigma {
        log::warn!(
            "|Δ| = {:e} m exceeds {QUADRATIC_REGIME_LIMIT}σ; quadratic rate is outside its regime",
            delta.norm()
        );
    }
    lambda.matrix.quadratic_form(delta).max(0.0)
}

/// `c·∮[r,n,a]² dS`, 1/(s·rad²).
pub fn angular_dephasing_coefficient(s_rot_axial: f64, density: f64, p: &CslParams) -> f64 {
    p.prefactor(density) * s_rot_axial
}

/// `Γ_cm = ħ²·c·A/M`, W, with `A` the total boundary area.
pub fn com_heating_rate(area: f64, mass: f64, density: f64, p: &CslParams) -> f64 {
    p.hbar * p.hbar * p.prefactor(density) * area / mass
}

/// The same rate written through the volume: `ħ²(2πλσ²ρ/m_N²)·A/V`.
pub fn com_heating_rate_by_volume(area: f64, volume: f64, density: f64, p: &CslParams) -> f64 {
    let c1 = 2.0 * std::f64::consts::PI * p.lambda * p.sigma * p.sigma * density
        / (p.nucleon_mass * p.nucleon_mass);
    p.hbar * p.hbar * c1 * area / volume
}

/// `Γ = 3ħ²λM/(2m_N²σ²)`, W.
pub fn total_heating_rate(mass: f64, p: &CslParams) -> f64 {
    3.0 * p.hbar * p.hbar * p.lambda * mass / (2.0 * (p.nucleon_mass * p.sigma).powi(2))
}

/// `Γ_rot = ħ²·c·Tr(I⁻¹ S_rot)`, W.
pub fn rotational_heating_rate(
    s_rot: &SymTensor3,
    inertia: &Mat3,
    density: f64,
    p: &CslParams,
) -> Result<f64, CslError> {
    let sym = SymTensor3::from_matrix(inertia);
    let moments = sym.eigenvalues();
    if moments[0] <= 1e-12 * moments[2].abs() || moments[2] <= 0.0 {
        return Err(CslError::SingularInertia(moments));
    }
    let inv = inertia
        .try_inverse()
        .ok_or(CslError::SingularInertia(moments))?;
    let tr = (inv * s_rot.to_matrix()).trace();
    Ok(p.hbar * p.hbar * p.prefactor(density) * tr.max(0.0))
}

/// Everything the rates subcommand reports for one body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub dephasing: DephasingMatrix,
    /// Angular coefficients about the x, y, z axes through the centroid,
    /// 1/(s·rad²).
    pub angular_coefficients: [f64; 3],
    pub gamma_cm: f64,
    pub gamma_total: f64,
    pub gamma_rot: f64,
    /// `Γ_cm/Γ`.
    pub heating_ratio: f64,
}

impl RateReport {
    /// Rates of `shape` at `density`, surface tensors from quadrature at
    /// `resolution` and `S_rot` taken about the centroid.
    pub fn compute(
        shape: &Shape,
        density: f64,
        p: &CslParams,
        resolution: usize,
        convention: InertiaConvention,
    ) -> Result<(Self, MassProperties), CslError> {
        p.validate()?;
        positive("density", density)?;
        let patches = shape.quadrature(resolution)?;
        let mass = shape.mass_properties(density)?;
        let s = tensors::surface_tensor(&patches);
        let s_rot = tensors::rotational_surface_tensor(&patches, &mass.centroid);
        Ok((Self::from_tensors(&s, &s_rot, &mass, density, p, convention)?, mass))
    }

    pub fn from_tensors(
        s: &SymTensor3,
        s_rot: &SymTensor3,
        mass: &MassProperties,
        density: f64,
        p: &CslParams,
        convention: InertiaConvention,
    ) -> Result<Self, CslError> {
        let inertia = match convention {
            InertiaConvention::Standard => mass.inertia,
            InertiaConvention::SecondMoment => mass.second_moment,
        };
        let gamma_cm = com_heating_rate(s.trace(), mass.mass, density, p);
        let gamma_total = total_heating_rate(mass.mass, p);
        Ok(Self {
            dephasing: dephasing_matrix(s, density, p),
            angular_coefficients: [s_rot.xx, s_rot.yy, s_rot.zz]
                .map(|a| angular_dephasing_coefficient(a, density, p)),
            gamma_cm,
            gamma_total,
            gamma_rot: rotational_heating_rate(s_rot, &inertia, density, p)?,
            heating_ratio: gamma_cm / gamma_total,
        })
    }
}
