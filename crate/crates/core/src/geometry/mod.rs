//! Solids, their boundary quadrature and their mass properties.
//!
//! Every analytic solid is described in a local frame whose `x` axis is the
//! body's symmetry (or "length") axis and whose origin is the body's
//! geometric centre; [`ShapeSpec::center`] and [`ShapeSpec::axis`] place that
//! frame in the world.

mod io;
mod lines;
mod mass;
mod mesh;
mod quadrature;
mod sdf;
mod shape;

pub use io::{load_mesh, load_mesh_file, write_obj, write_stl, MeshFormat};
pub use mass::MassProperties;
pub use mesh::TriangleMesh;
pub use quadrature::{Patch, SurfacePatches, DEFAULT_MAX_PATCHES, DEFAULT_RESOLUTION};
pub use shape::{build_shape, Frame, Shape, ShapeKind, ShapeSpec};
pub(crate) use lines::{pair_crossings, subtract, Intervals};
pub(crate) use shape::Body;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("mesh is not watertight: {0}")]
    NonWatertightMesh(String),
    #[error("mesh orientation cannot be made consistent: {0}")]
    InvertedOrientation(String),
    #[error("degenerate dimension: {0}")]
    DegenerateDimension(String),
    #[error("invalid cavity: {0}")]
    CavityOverlap(String),
    #[error("mesh parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("quadrature needs {requested} patches, cap is {cap}")]
    ResolutionOverflow { requested: usize, cap: usize },
    #[error("resolution must be at least 1")]
    InvalidResolution,
    #[error("density must be positive and finite, got {0}")]
    InvalidDensity(f64),
}
