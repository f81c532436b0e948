//! Surface-tensor invariants of homogeneous rigid bodies and the CSL
//! decoherence and heating rates they determine.
//!
//! The crate is organised the way a computation flows:
//!
//! - [`geometry`] builds solids (analytic or triangle meshes), decomposes
//!   their boundary into weighted quadrature patches and computes bulk mass
//!   properties.
//! - [`tensors`] reduces a patch decomposition to the translational
//!   surface-tensor `S = ∮ n∘n dS` and the rotational one
//!   `S_rot = ∮ (r×n)∘(r×n) dS`.
//! - [`csl`] turns those tensors into dephasing matrices and heating rates.
//! - [`oracle`] re-derives the same structure by brute force: volume
//!   integrals over a voxelised σ-smoothed density and k-space integrals of
//!   the geometric factor.
//!
//! All quantities are SI internally; [`units`] converts suffixed strings
//! such as `"1e-5 cm"` at the boundary.

pub mod csl;
pub mod gauss;
pub mod geometry;
pub mod oracle;
pub mod special;
pub mod tensors;
pub mod units;

/// Coordinate triple in meters, or a dimensionless direction.
pub type Vec3 = nalgebra::Vector3<f64>;
/// Dense 3×3 matrix.
pub type Mat3 = nalgebra::Matrix3<f64>;

pub use csl::{CslParams, DephasingMatrix, InertiaConvention, RateReport};
pub use geometry::{
    build_shape, MassProperties, Patch, Shape, ShapeKind, ShapeSpec, SurfacePatches, TriangleMesh,
};
pub use tensors::SymTensor3;

/// Relative difference `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
