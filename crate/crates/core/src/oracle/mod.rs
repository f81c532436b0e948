//! Brute-force re-derivations of the surface-tensor structure.
//!
//! The same tensor `(2π)³ ∫ ∇μ_σ∘∇μ_σ dr` is computed three ways: from the
//! surface tensor, from finite differences on a voxelised smoothed density,
//! and as a k-space integral of the geometric factor. [`cross_validate`]
//! runs all three.

mod fft;
mod grid;
mod integrals;
mod kspace;
mod profile;
mod raster;

pub use grid::VoxelGrid;
pub use integrals::{
    decoherence_function, gradient_outer_integral, surface_formula_outer_integral, DecoherenceEvaluator,
};
pub use kspace::{kspace_outer_integral, kspace_outer_integral_with, KspaceOptions};
pub use profile::{edge_layer_factor, EdgeProfile};
pub use raster::{rasterize_smoothed_density, GridOptions, RasterMethod, DEFAULT_MAX_CELLS};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gauss::NotConverged;
use crate::geometry::{GeometryError, Shape};
use crate::tensors::{surface_tensor, SymTensor3};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("grid needs {requested} cells, cap is {cap}")]
    GridTooLarge { requested: usize, cap: usize },
    #[error("grid spacing {spacing:e} m exceeds the limit {max:e} m")]
    SpacingTooCoarse { spacing: f64, max: f64 },
    #[error("unsupported edge profile: {0}")]
    UnsupportedProfile(String),
    #[error("shift component {shift:e} m exceeds the grid padding {padding:e} m")]
    ShiftOutOfGrid { shift: f64, padding: f64 },
    #[error(transparent)]
    QuadratureNotConverged(#[from] NotConverged),
    #[error("invalid edge profile: {0}")]
    InvalidProfile(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Parse(String),
}

/// The three evaluations of `(2π)³ ∫ ∇μ_σ∘∇μ_σ dr` and their pairwise
/// Frobenius relative differences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub surface: SymTensor3,
    pub gradient: SymTensor3,
    pub kspace: SymTensor3,
    pub surface_vs_gradient: f64,
    pub gradient_vs_kspace: f64,
    pub surface_vs_kspace: f64,
    pub grid_dims: [usize; 3],
    pub max_boundary_value: f64,
}

impl CrossValidation {
    /// Largest of the three pairwise differences.
    pub fn worst(&self) -> f64 {
        self.surface_vs_gradient
            .max(self.gradient_vs_kspace)
            .max(self.surface_vs_kspace)
    }
}

pub fn cross_validate(
    shape: &Shape,
    density: f64,
    sigma: f64,
    grid: &GridOptions,
    resolution: usize,
) -> Result<CrossValidation, OracleError> {
    let s = surface_tensor(&shape.quadrature(resolution)?);
    let surface = surface_formula_outer_integral(&s, density, sigma);
    let field = rasterize_smoothed_density(shape, density, sigma, grid, &EdgeProfile::Step)?;
    let gradient = gradient_outer_integral(&field);
    let kspace = kspace_outer_integral(shape, density, sigma)?;
    Ok(CrossValidation {
        surface_vs_gradient: surface.rel_diff(&gradient),
        gradient_vs_kspace: gradient.rel_diff(&kspace),
        surface_vs_kspace: surface.rel_diff(&kspace),
        surface,
        gradient,
        kspace,
        grid_dims: field.dims,
        max_boundary_value: field.max_boundary_value(),
    })
}
