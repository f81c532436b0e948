use csl_core::csl::{angular_dephasing_coefficient, dephasing_matrix, superposition_dephasing_rate, QUADRATIC_REGIME_LIMIT};
use csl_core::oracle::{cross_validate, decoherence_function, rasterize_smoothed_density, CrossValidation, EdgeProfile};
use csl_core::tensors::{rotational_surface_tensor, surface_tensor};
use csl_core::{build_shape, DephasingMatrix, Mat3, RateReport, Shape, SymTensor3, Vec3};
use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, SweepVariable};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Tensors,
    Rates,
    Validate,
    Sweep,
    Dephasing,
}

impl CommandKind {
    pub fn needs_density(self) -> bool {
        matches!(self, Self::Rates | Self::Dephasing)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "result", rename_all = "snake_case")]
pub enum Output {
    Tensors(TensorsResult),
    Rates(RatesResult),
    Validate(ValidateResult),
    Sweep(SweepResult),
    Dephasing(DephasingResult),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorsResult {
    /// `∮ n∘n dS`, m².
    pub surface_tensor: SymTensor3,
    /// `∮ (r×n)∘(r×n) dS` about `origin`, m⁴.
    pub rotational_surface_tensor: SymTensor3,
    pub origin: Vec3,
    /// m²
    pub area: f64,
    /// m³
    pub volume: f64,
    pub centroid: Vec3,
    /// Unit principal axes of inertia as columns, ascending moments.
    pub principal_axes: Mat3,
    /// Present when a density is configured.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<MassResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassResult {
    /// kg
    pub mass: f64,
    /// About the centroid, kg·m².
    pub inertia: Mat3,
    pub principal_moments: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatesResult {
    #[serde(flatten)]
    pub rates: RateReport,
    pub origin: Vec3,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateResult {
    #[serde(flatten)]
    pub comparison: CrossValidation,
    /// Density the tensors are evaluated at, kg/m³; 1 when unconfigured.
    pub density: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub variable: SweepVariable,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub area: f64,
    pub volume: f64,
    /// Diagonal of `S` in the world frame, m².
    pub s: [f64; 3],
    /// Diagonal of `S_rot` about the centroid, m⁴.
    pub s_rot: [f64; 3],
    /// Diagonal of `Λ`, 1/(s·m²), when a density is configured.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dephasing: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_cm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DephasingResult {
    pub dephasing: DephasingMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translation: Option<TranslationDephasing>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<RotationDephasing>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationDephasing {
    pub delta: Vec3,
    pub delta_over_sigma: f64,
    /// `Δ·Λ·Δ`, 1/s.
    pub rate: f64,
    pub quadratic_regime: bool,
    /// `F(Δ)` from the voxelised smoothed density, 1/s.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationDephasing {
    pub axis: Vec3,
    /// rad
    pub angle: f64,
    /// `a·S_rot·a` about the centroid, m⁴.
    pub axial_strength: f64,
    /// `c·(a·S_rot·a)·δφ²`, 1/s.
    pub rate: f64,
}

/// A finished run; `failure` carries a non-fatal verdict such as a failed
/// validation, reported after the output is written.
pub struct Outcome {
    pub output: Output,
    pub failure: Option<CliError>,
}

impl From<Output> for Outcome {
    fn from(output: Output) -> Self {
        Self { output, failure: None }
    }
}

pub fn run(kind: CommandKind, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match kind {
        CommandKind::Tensors => run_tensors(cfg).map(|r| Output::Tensors(r).into()),
        CommandKind::Rates => run_rates(cfg).map(|r| Output::Rates(r).into()),
        CommandKind::Validate => run_validate(cfg),
        CommandKind::Sweep => run_sweep(cfg).map(|r| Output::Sweep(r).into()),
        CommandKind::Dephasing => run_dephasing(cfg).map(|r| Output::Dephasing(r).into()),
    }
}

/// `S`, `S_rot` about the configured origin or the centroid, and the
/// unit-density mass properties.
fn tensors_of(shape: &Shape, cfg: &RunConfig) -> Result<(SymTensor3, SymTensor3, Vec3, csl_core::MassProperties), CliError> {
    let patches = shape.quadrature(cfg.resolution())?;
    let props = shape.mass_properties(cfg.density.unwrap_or(1.0))?;
    let origin = cfg.origin.unwrap_or(props.centroid);
    let s = surface_tensor(&patches).clamp_psd();
    let s_rot = rotational_surface_tensor(&patches, &origin).clamp_psd();
    Ok((s, s_rot, origin, props))
}

pub fn run_tensors(cfg: &RunConfig) -> Result<TensorsResult, CliError> {
    let shape = cfg.build()?;
    let (s, s_rot, origin, props) = tensors_of(&shape, cfg)?;
    let (moments, axes) = props.principal_axes();
    Ok(TensorsResult {
        surface_tensor: s,
        rotational_surface_tensor: s_rot,
        origin,
        area: s.trace(),
        volume: props.volume,
        centroid: props.centroid,
        principal_axes: axes,
        mass: cfg.density.map(|_| MassResult {
            mass: props.mass,
            inertia: props.inertia,
            principal_moments: moments,
        }),
    })
}

pub fn run_rates(cfg: &RunConfig) -> Result<RatesResult, CliError> {
    let density = cfg.density.ok_or_else(|| CliError::Usage("rates need a density".into()))?;
    let shape = cfg.build()?;
    let (s, s_rot, origin, props) = tensors_of(&shape, cfg)?;
    let rates = RateReport::from_tensors(&s, &s_rot, &props, density, &cfg.csl, cfg.inertia)?;
    Ok(RatesResult {
        rates,
        origin,
        mass: props.mass,
    })
}

pub fn run_validate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let shape = cfg.build()?;
    let density = cfg.density.unwrap_or(1.0);
    let tolerance = cfg.tolerance.unwrap_or(crate::config::DEFAULT_TOLERANCE);
    let grid = cfg.grid_options();
    info!("validating {} on a grid of spacing {:e} m", shape.spec().type_name(), grid.spacing);
    let comparison = cross_validate(&shape, density, cfg.csl.sigma, &grid, cfg.resolution())?;
    if comparison.max_boundary_value > 1e-6 * density {
        warn!(
            "smoothed density reaches {:.2e} of ρ at the grid boundary; increase the padding",
            comparison.max_boundary_value / density
        );
    }
    let worst = comparison.worst();
    let passed = worst <= tolerance;
    Ok(Outcome {
        output: Output::Validate(ValidateResult {
            comparison,
            density,
            tolerance,
            passed,
        }),
        failure: (!passed).then_some(CliError::ToleranceExceeded { worst, tolerance }),
    })
}

pub fn run_sweep(cfg: &RunConfig) -> Result<SweepResult, CliError> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Usage("sweep needs a variable and values (--var with --values or --from/--to/--steps)".into()))?;
    let base = cfg
        .shape
        .as_ref()
        .ok_or_else(|| CliError::Config("sweeps need an analytic shape, not a mesh".into()))?;
    let mut rows = Vec::with_capacity(sweep.values.len());
    for &value in &sweep.values {
        let shape = build_shape(&sweep.variable.apply(base, value)?)?;
        let (s, s_rot, _, props) = tensors_of(&shape, cfg)?;
        let dephasing = cfg.density.map(|rho| {
            let m = dephasing_matrix(&s, rho, &cfg.csl).matrix;
            [m.xx, m.yy, m.zz]
        });
        let gamma_cm = cfg
            .density
            .map(|rho| csl_core::csl::com_heating_rate(s.trace(), props.mass, rho, &cfg.csl));
        rows.push(SweepRow {
            value,
            area: s.trace(),
            volume: props.volume,
            s: [s.xx, s.yy, s.zz],
            s_rot: [s_rot.xx, s_rot.yy, s_rot.zz],
            dephasing,
            gamma_cm,
        });
    }
    Ok(SweepResult {
        variable: sweep.variable,
        rows,
    })
}

pub fn run_dephasing(cfg: &RunConfig) -> Result<DephasingResult, CliError> {
    let density = cfg.density.ok_or_else(|| CliError::Usage("dephasing needs a density".into()))?;
    if cfg.delta.is_none() && cfg.angle.is_none() {
        return Err(CliError::Usage("dephasing needs --delta and/or --angle".into()));
    }
    if cfg.oracle && cfg.delta.is_none() {
        return Err(CliError::Usage("--oracle needs --delta".into()));
    }
    let shape = cfg.build()?;
    let (s, s_rot, _, _) = tensors_of(&shape, cfg)?;
    let lambda = dephasing_matrix(&s, density, &cfg.csl);
    let sigma = cfg.csl.sigma;
    let translation = match cfg.delta {
        Some(delta) => {
            let oracle_rate = if cfg.oracle {
                let field = rasterize_smoothed_density(&shape, density, sigma, &cfg.grid_options(), &EdgeProfile::Step)?;
                Some(decoherence_function(&field, &delta, &cfg.csl)?)
            } else {
                None
            };
            Some(TranslationDephasing {
                delta,
                delta_over_sigma: delta.norm() / sigma,
                rate: superposition_dephasing_rate(&lambda, &delta),
                quadratic_regime: delta.norm() <= QUADRATIC_REGIME_LIMIT * sigma,
                oracle_rate,
            })
        }
        None => None,
    };
    let rotation = match cfg.angle {
        Some(angle) => {
            let axis = cfg.axis.unwrap_or_else(Vec3::z);
            let n = axis.norm();
            if !(n.is_finite() && n > 0.0) {
                return Err(CliError::Config("rotation axis must be a non-zero vector".into()));
            }
            let axis = axis / n;
            let axial_strength = s_rot.quadratic_form(&axis);
            Some(RotationDephasing {
                axis,
                angle,
                axial_strength,
                rate: angular_dephasing_coefficient(axial_strength, density, &cfg.csl) * angle * angle,
            })
        }
        None => None,
    };
    Ok(DephasingResult {
        dephasing: lambda,
        translation,
        rotation,
    })
}
