//! Run configuration: a JSON document merged with command-line overrides
//! and resolved to SI with every default filled in.

use std::path::{Path, PathBuf};

use csl_core::geometry::{load_mesh_file, DEFAULT_RESOLUTION};
use csl_core::oracle::{GridOptions, RasterMethod, DEFAULT_MAX_CELLS};
use csl_core::units::{self, parse_quantity, Dimension};
use csl_core::{build_shape, CslParams, InertiaConvention, Shape, ShapeKind, ShapeSpec, Vec3};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::CliError;

/// Pairwise tolerance of `validate` when none is configured.
pub const DEFAULT_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Everything a run depends on. Quantities accept unit suffixes on input
/// and are written back as SI numbers.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<ShapeSpec>,
    /// STL or OBJ file; coordinates are multiplied by `mesh_scale`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<PathBuf>,
    #[serde(default, deserialize_with = "units::opt_length", skip_serializing_if = "Option::is_none")]
    pub mesh_scale: Option<f64>,
    #[serde(default, deserialize_with = "units::opt_density", skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
    #[serde(default)]
    pub csl: CslParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub inertia: InertiaConvention,
    /// Reference point of `S_rot`; the centroid when absent.
    #[serde(default, deserialize_with = "opt_length_vec", skip_serializing_if = "Option::is_none")]
    pub origin: Option<Vec3>,
    #[serde(default, deserialize_with = "opt_length_vec", skip_serializing_if = "Option::is_none")]
    pub delta: Option<Vec3>,
    #[serde(default, deserialize_with = "opt_angle", skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<Vec3>,
    /// Also evaluate the decoherence function on a voxel grid.
    #[serde(default)]
    pub oracle: bool,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default, deserialize_with = "units::opt_length", skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    #[serde(default, deserialize_with = "units::opt_length", skip_serializing_if = "Option::is_none")]
    pub padding: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_cells: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supersample: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<RasterMethod>,
}

impl GridConfig {
    /// Defaults scale with σ.
    pub fn options(&self, sigma: f64) -> GridOptions {
        let d = GridOptions::for_sigma(sigma);
        GridOptions {
            spacing: self.spacing.unwrap_or(d.spacing),
            padding: self.padding.unwrap_or(d.padding),
            max_cells: self.max_cells.unwrap_or(DEFAULT_MAX_CELLS),
            supersample: self.supersample.unwrap_or(d.supersample),
            method: self.method.unwrap_or(d.method),
        }
    }

    fn resolved(&self, sigma: f64) -> Self {
        let o = self.options(sigma);
        Self {
            spacing: Some(o.spacing),
            padding: Some(o.padding),
            max_cells: Some(o.max_cells),
            supersample: Some(o.supersample),
            method: Some(o.method),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum SweepVariable {
    /// Length.
    #[serde(rename = "L")]
    #[value(name = "L")]
    Length,
    /// Cone apex angle.
    #[serde(rename = "theta", alias = "θ")]
    #[value(name = "theta", alias = "θ")]
    Theta,
    /// Gap count.
    #[serde(rename = "N")]
    #[value(name = "N")]
    Gaps,
    /// Eccentricity of an elliptic section, `b = a·√(1 − e²)`.
    #[serde(rename = "e")]
    #[value(name = "e")]
    Eccentricity,
    /// Radius.
    #[serde(rename = "R")]
    #[value(name = "R")]
    Radius,
}

impl SweepVariable {
    pub fn dimension(self) -> Option<Dimension> {
        match self {
            Self::Length | Self::Radius => Some(Dimension::Length),
            Self::Theta => Some(Dimension::Angle),
            Self::Gaps | Self::Eccentricity => None,
        }
    }

    pub fn parse_value(self, text: &str) -> Result<f64, CliError> {
        match self.dimension() {
            Some(dim) => Ok(parse_quantity(text, dim)?),
            None => text
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("sweep value {text:?} is not a number"))),
        }
    }

    /// `base` with this variable set to `value`.
    pub fn apply(self, base: &ShapeSpec, value: f64) -> Result<ShapeSpec, CliError> {
        let mut spec = base.clone();
        let bad = || {
            CliError::Config(format!(
                "sweep variable {} does not apply to a {}",
                self.label(),
                base.type_name()
            ))
        };
        match (self, &mut spec.kind) {
            (Self::Length, ShapeKind::Box { a, .. }) => *a = value,
            (
                Self::Length,
                ShapeKind::Cylinder { length, .. }
                | ShapeKind::ConeCappedCylinder { length, .. }
                | ShapeKind::EllipticCylinder { length, .. }
                | ShapeKind::GappedCylinder { length, .. },
            ) => *length = value,
            (Self::Theta, ShapeKind::ConeCappedCylinder { apex_angle, .. }) => *apex_angle = value,
            (Self::Gaps, ShapeKind::GappedCylinder { gaps, .. }) => {
                if !(value >= 0.0 && value.fract() == 0.0) {
                    return Err(CliError::Config(format!("gap count must be a whole number, got {value}")));
                }
                *gaps = value as usize;
            }
            (Self::Eccentricity, ShapeKind::EllipticCylinder { a, b, .. }) => {
                if !(0.0..1.0).contains(&value) {
                    return Err(CliError::Config(format!("eccentricity must lie in [0, 1), got {value}")));
                }
                *b = *a * (1.0 - value * value).sqrt();
            }
            (
                Self::Radius,
                ShapeKind::Sphere { radius }
                | ShapeKind::Cylinder { radius, .. }
                | ShapeKind::ConeCappedCylinder { radius, .. }
                | ShapeKind::GappedCylinder { radius, .. },
            ) => *radius = value,
            _ => return Err(bad()),
        }
        Ok(spec)
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Length => "L",
            Self::Theta => "theta",
            Self::Gaps => "N",
            Self::Eccentricity => "e",
            Self::Radius => "R",
        }
    }
}

/// Sweep over explicit values, or `steps` evenly spaced values from `from`
/// to `to`. Values take the units of the variable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

impl SweepConfig {
    pub fn range(variable: SweepVariable, from: f64, to: f64, steps: usize) -> Result<Self, CliError> {
        if steps == 0 {
            return Err(CliError::Usage("sweep needs at least one step".into()));
        }
        let values = if steps == 1 {
            vec![from]
        } else {
            (0..steps)
                .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
                .collect()
        };
        Ok(Self { variable, values })
    }
}

impl<'de> Deserialize<'de> for SweepConfig {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            variable: SweepVariable,
            #[serde(default)]
            values: Option<Vec<Quantity>>,
            #[serde(default)]
            from: Option<Quantity>,
            #[serde(default)]
            to: Option<Quantity>,
            #[serde(default)]
            steps: Option<usize>,
        }
        let raw = Raw::deserialize(d)?;
        let v = raw.variable;
        let conv = |q: &Quantity| q.resolve(v).map_err(serde::de::Error::custom);
        match (raw.values, raw.from, raw.to, raw.steps) {
            (Some(values), None, None, None) => Ok(Self {
                variable: v,
                values: values.iter().map(conv).collect::<Result<_, _>>()?,
            }),
            (None, Some(from), Some(to), Some(steps)) => {
                SweepConfig::range(v, conv(&from)?, conv(&to)?, steps).map_err(serde::de::Error::custom)
            }
            _ => Err(serde::de::Error::custom("sweep needs either `values` or `from`, `to` and `steps`")),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Quantity {
    Number(f64),
    Text(String),
}

impl Quantity {
    fn resolve(&self, v: SweepVariable) -> Result<f64, CliError> {
        match self {
            Quantity::Number(x) => Ok(*x),
            Quantity::Text(s) => v.parse_value(s),
        }
    }
}

fn opt_length_vec<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec3>, D::Error> {
    let raw: Option<[Quantity; 3]> = Option::deserialize(d)?;
    raw.map(|q| {
        let mut v = Vec3::zeros();
        for (i, c) in q.iter().enumerate() {
            v[i] = match c {
                Quantity::Number(x) => *x,
                Quantity::Text(s) => parse_quantity(s, Dimension::Length).map_err(serde::de::Error::custom)?,
            };
        }
        Ok(v)
    })
    .transpose()
}

fn opt_angle<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
    let raw: Option<Quantity> = Option::deserialize(d)?;
    raw.map(|q| match q {
        Quantity::Number(x) => Ok(x),
        Quantity::Text(s) => parse_quantity(&s, Dimension::Angle).map_err(serde::de::Error::custom),
    })
    .transpose()
}

/// Parses `"x,y,z"` with optional length units on each component.
pub fn parse_length_vec(text: &str) -> Result<Vec3, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!("expected three comma-separated components, got {text:?}")));
    }
    let mut v = Vec3::zeros();
    for (i, p) in parts.iter().enumerate() {
        v[i] = parse_quantity(p, Dimension::Length)?;
    }
    Ok(v)
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Fills defaults and checks invariants. Resolving twice is a no-op.
    pub fn resolve(mut self, needs_density: bool) -> Result<Self, CliError> {
        match (&self.shape, &self.mesh) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config("give either a shape or a mesh, not both".into()));
            }
            (None, None) => return Err(CliError::Config("no shape: pass --shape, --mesh or a config".into())),
            (Some(_), None) => self.mesh_scale = None,
            (None, Some(_)) => self.mesh_scale = Some(self.mesh_scale.unwrap_or(1.0)),
        }
        if let Some(s) = self.mesh_scale {
            if !(s.is_finite() && s > 0.0) {
                return Err(CliError::Config(format!("mesh scale must be positive, got {s}")));
            }
        }
        match self.density {
            Some(rho) if !(rho.is_finite() && rho > 0.0) => {
                return Err(CliError::Config(format!("density must be positive, got {rho}")));
            }
            None if needs_density => return Err(CliError::Usage("this command needs a density (--density)".into())),
            _ => {}
        }
        self.csl.validate()?;
        self.resolution = Some(self.resolution.unwrap_or(DEFAULT_RESOLUTION));
        if self.resolution == Some(0) {
            return Err(CliError::Config("resolution must be at least 1".into()));
        }
        let tol = self.tolerance.unwrap_or(DEFAULT_TOLERANCE);
        if !(tol.is_finite() && tol > 0.0) {
            return Err(CliError::Config(format!("tolerance must be positive, got {tol}")));
        }
        self.tolerance = Some(tol);
        self.grid = self.grid.resolved(self.csl.sigma);
        Ok(self)
    }

    pub fn resolution(&self) -> usize {
        self.resolution.unwrap_or(DEFAULT_RESOLUTION)
    }

    pub fn grid_options(&self) -> GridOptions {
        self.grid.options(self.csl.sigma)
    }

    /// The base shape spec, loading and scaling the mesh file if needed.
    pub fn shape_spec(&self) -> Result<ShapeSpec, CliError> {
        if let Some(spec) = &self.shape {
            return Ok(spec.clone());
        }
        let path = self.mesh.as_ref().expect("resolved config has a shape source");
        let mesh = load_mesh_file(path)?.scaled(self.mesh_scale.unwrap_or(1.0));
        Ok(ShapeSpec::mesh(&mesh))
    }

    pub fn build(&self) -> Result<Shape, CliError> {
        Ok(build_shape(&self.shape_spec()?)?)
    }
}
