use nalgebra::{Rotation3, Unit};
use serde::{Deserialize, Serialize};

use super::mesh::TriangleMesh;
use super::GeometryError;
use crate::{units, Vec3};

/// Declarative description of a homogeneous solid.
///
/// Serialised as a flat JSON object tagged by `"type"`, e.g.
/// `{"type": "cylinder", "radius": "1 mm", "length": 0.01}`. Lengths accept
/// unit suffixes; bare numbers are meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    #[serde(flatten)]
    pub kind: ShapeKind,
    /// World position of the local origin.
    #[serde(default = "zero")]
    pub center: Vec3,
    /// World direction of the local `x` (length/symmetry) axis.
    #[serde(default = "x_axis")]
    pub axis: Vec3,
    /// Empty interior regions, each strictly inside the body and disjoint
    /// from the others.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cavities: Vec<ShapeSpec>,
}

fn zero() -> Vec3 {
    Vec3::zeros()
}

fn x_axis() -> Vec3 {
    Vec3::x()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ShapeKind {
    Sphere {
        #[serde(deserialize_with = "units::length")]
        radius: f64,
    },
    /// Circular cylinder of total `length` along the local x axis.
    Cylinder {
        #[serde(deserialize_with = "units::length")]
        radius: f64,
        #[serde(deserialize_with = "units::length")]
        length: f64,
    },
    /// Rectangular box with full edge lengths `a`, `b`, `c` along local x, y, z.
    Box {
        #[serde(deserialize_with = "units::length")]
        a: f64,
        #[serde(deserialize_with = "units::length")]
        b: f64,
        #[serde(deserialize_with = "units::length")]
        c: f64,
    },
    /// Cylinder of `length` whose two flat faces are replaced by cones of
    /// full apex angle `apex_angle`. The cones add to the total length.
    ConeCappedCylinder {
        #[serde(deserialize_with = "units::length")]
        radius: f64,
        #[serde(deserialize_with = "units::length")]
        length: f64,
        #[serde(deserialize_with = "units::angle")]
        apex_angle: f64,
    },
    /// Elliptic cylinder with semi-axes `a` (local y) and `b` (local z).
    EllipticCylinder {
        #[serde(deserialize_with = "units::length")]
        a: f64,
        #[serde(deserialize_with = "units::length")]
        b: f64,
        #[serde(deserialize_with = "units::length")]
        length: f64,
    },
    /// Cylinder of total `length` cut by `gaps` perpendicular slots of width
    /// `gap_width` into `gaps + 1` equal segments.
    GappedCylinder {
        #[serde(deserialize_with = "units::length")]
        radius: f64,
        #[serde(deserialize_with = "units::length")]
        length: f64,
        gaps: usize,
        #[serde(deserialize_with = "units::length")]
        gap_width: f64,
    },
    Mesh {
        vertices: Vec<Vec3>,
        triangles: Vec<[usize; 3]>,
    },
}

impl ShapeSpec {
    pub fn new(kind: ShapeKind) -> Self {
        Self {
            kind,
            center: Vec3::zeros(),
            axis: Vec3::x(),
            cavities: Vec::new(),
        }
    }

    pub fn sphere(radius: f64) -> Self {
        Self::new(ShapeKind::Sphere { radius })
    }

    pub fn cylinder(radius: f64, length: f64) -> Self {
        Self::new(ShapeKind::Cylinder { radius, length })
    }

    pub fn cuboid(a: f64, b: f64, c: f64) -> Self {
        Self::new(ShapeKind::Box { a, b, c })
    }

    pub fn cone_capped_cylinder(radius: f64, length: f64, apex_angle: f64) -> Self {
        Self::new(ShapeKind::ConeCappedCylinder {
            radius,
            length,
            apex_angle,
        })
    }

    pub fn elliptic_cylinder(a: f64, b: f64, length: f64) -> Self {
        Self::new(ShapeKind::EllipticCylinder { a, b, length })
    }

    pub fn gapped_cylinder(radius: f64, length: f64, gaps: usize, gap_width: f64) -> Self {
        Self::new(ShapeKind::GappedCylinder {
            radius,
            length,
            gaps,
            gap_width,
        })
    }

    pub fn mesh(mesh: &TriangleMesh) -> Self {
        Self::new(ShapeKind::Mesh {
            vertices: mesh.vertices().to_vec(),
            triangles: mesh.triangles().to_vec(),
        })
    }

    pub fn with_center(mut self, center: Vec3) -> Self {
        self.center = center;
        self
    }

    pub fn with_axis(mut self, axis: Vec3) -> Self {
        self.axis = axis;
        self
    }

    pub fn with_cavity(mut self, cavity: ShapeSpec) -> Self {
        self.cavities.push(cavity);
        self
    }

    pub fn type_name(&self) -> &'static str {
        match self.kind {
            ShapeKind::Sphere { .. } => "sphere",
            ShapeKind::Cylinder { .. } => "cylinder",
            ShapeKind::Box { .. } => "box",
            ShapeKind::ConeCappedCylinder { .. } => "cone_capped_cylinder",
            ShapeKind::EllipticCylinder { .. } => "elliptic_cylinder",
            ShapeKind::GappedCylinder { .. } => "gapped_cylinder",
            ShapeKind::Mesh { .. } => "mesh",
        }
    }
}

/// Rigid placement of a local frame in the world.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub center: Vec3,
    pub rotation: Rotation3<f64>,
}

impl Frame {
    pub fn identity() -> Self {
        Self {
            center: Vec3::zeros(),
            rotation: Rotation3::identity(),
        }
    }

    /// Frame whose local x axis points along `axis`.
    pub fn aligned(center: Vec3, axis: &Vec3) -> Self {
        let dir = axis.normalize();
        let rotation = Rotation3::rotation_between(&Vec3::x(), &dir).unwrap_or_else(|| {
            // antiparallel: half turn about z
            Rotation3::from_axis_angle(&Unit::new_normalize(Vec3::z()), std::f64::consts::PI)
        });
        Self { center, rotation }
    }

    pub fn to_world(&self, p: &Vec3) -> Vec3 {
        self.center + self.rotation * p
    }

    pub fn to_local(&self, p: &Vec3) -> Vec3 {
        self.rotation.inverse() * (p - self.center)
    }

    pub fn dir_to_world(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }
}

/// Concrete solid in its local frame.
#[derive(Debug, Clone)]
pub(crate) enum Body {
    Sphere {
        radius: f64,
    },
    Cylinder {
        radius: f64,
        length: f64,
    },
    Cuboid {
        size: Vec3,
    },
    ConeCapped {
        radius: f64,
        length: f64,
        apex_angle: f64,
    },
    Elliptic {
        a: f64,
        b: f64,
        length: f64,
    },
    Gapped {
        radius: f64,
        length: f64,
        gaps: usize,
        gap_width: f64,
    },
    Mesh(TriangleMesh),
}

impl Body {
    /// `(center_x, length)` of each solid cylinder segment of a gapped cylinder.
    pub(crate) fn gapped_segments(length: f64, gaps: usize, gap_width: f64) -> Vec<(f64, f64)> {
        let pieces = gaps + 1;
        let seg = (length - gaps as f64 * gap_width) / pieces as f64;
        (0..pieces)
            .map(|k| {
                let x = -0.5 * length + 0.5 * seg + k as f64 * (seg + gap_width);
                (x, seg)
            })
            .collect()
    }

    /// Height of a cone cap with base radius `radius` and full apex angle.
    pub(crate) fn cone_height(radius: f64, apex_angle: f64) -> f64 {
        radius / (0.5 * apex_angle).tan()
    }
}

/// A validated, immutable solid.
#[derive(Debug, Clone)]
pub struct Shape {
    spec: ShapeSpec,
    pub(crate) body: Body,
    frame: Frame,
    cavities: Vec<Shape>,
}

fn positive(name: &str, v: f64) -> Result<(), GeometryError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(GeometryError::DegenerateDimension(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

/// Validates a [`ShapeSpec`] and builds the corresponding [`Shape`].
///
/// Mesh bodies are checked for watertightness and re-oriented outward.
/// Cavities must be strictly interior and mutually disjoint; this is checked
/// on boundary samples of every cavity and of the host.
pub fn build_shape(spec: &ShapeSpec) -> Result<Shape, GeometryError> {
    let shape = build_body(spec)?;
    let mut cavities = Vec::with_capacity(spec.cavities.len());
    for c in &spec.cavities {
        if !c.cavities.is_empty() {
            return Err(GeometryError::CavityOverlap(
                "cavities may not contain cavities".into(),
            ));
        }
        cavities.push(build_body(c)?);
    }
    let shape = Shape {
        cavities,
        ..shape
    };
    shape.check_cavities()?;
    Ok(shape)
}

fn build_body(spec: &ShapeSpec) -> Result<Shape, GeometryError> {
    if !(spec.center.iter().all(|c| c.is_finite())) {
        return Err(GeometryError::DegenerateDimension("center must be finite".into()));
    }
    let axis_norm = spec.axis.norm();
    if !(axis_norm.is_finite() && axis_norm > 0.0) {
        return Err(GeometryError::DegenerateDimension("axis must be non-zero".into()));
    }
    let body = match spec.kind {
        ShapeKind::Sphere { radius } => {
            positive("radius", radius)?;
            Body::Sphere { radius }
        }
        ShapeKind::Cylinder { radius, length } => {
            positive("radius", radius)?;
            positive("length", length)?;
            Body::Cylinder { radius, length }
        }
        ShapeKind::Box { a, b, c } => {
            positive("a", a)?;
            positive("b", b)?;
            positive("c", c)?;
            Body::Cuboid {
                size: Vec3::new(a, b, c),
            }
        }
        ShapeKind::ConeCappedCylinder {
            radius,
            length,
            apex_angle,
        } => {
            positive("radius", radius)?;
            positive("length", length)?;
            if !(apex_angle > 0.0 && apex_angle < std::f64::consts::PI) {
                return Err(GeometryError::DegenerateDimension(format!(
                    "apex angle must lie in (0, π), got {apex_angle}"
                )));
            }
            Body::ConeCapped {
                radius,
                length,
                apex_angle,
            }
        }
        ShapeKind::EllipticCylinder { a, b, length } => {
            positive("a", a)?;
            positive("b", b)?;
            positive("length", length)?;
            Body::Elliptic { a, b, length }
        }
        ShapeKind::GappedCylinder {
            radius,
            length,
            gaps,
            gap_width,
        } => {
            positive("radius", radius)?;
            positive("length", length)?;
            if gaps > 0 {
                positive("gap_width", gap_width)?;
            }
            if gap_width * gaps as f64 >= length {
                return Err(GeometryError::DegenerateDimension(format!(
                    "{gaps} gaps of width {gap_width} do not fit in length {length}"
                )));
            }
            Body::Gapped {
                radius,
                length,
                gaps,
                gap_width,
            }
        }
        ShapeKind::Mesh {
            ref vertices,
            ref triangles,
        } => Body::Mesh(TriangleMesh::new(vertices.clone(), triangles.clone())?),
    };
    Ok(Shape {
        spec: ShapeSpec {
            cavities: Vec::new(),
            ..spec.clone()
        },
        body,
        frame: Frame::aligned(spec.center, &spec.axis),
        cavities: Vec::new(),
    })
}

impl Shape {
    /// The spec this shape was built from, cavities included.
    pub fn spec(&self) -> ShapeSpec {
        ShapeSpec {
            cavities: self.cavities.iter().map(|c| c.spec.clone()).collect(),
            ..self.spec.clone()
        }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn cavities(&self) -> &[Shape] {
        &self.cavities
    }

    pub fn is_mesh(&self) -> bool {
        matches!(self.body, Body::Mesh(_))
    }

    pub fn mesh(&self) -> Option<&TriangleMesh> {
        match &self.body {
            Body::Mesh(m) => Some(m),
            _ => None,
        }
    }

    /// Whether `p` lies in the material (inside the body, outside every cavity).
    pub fn contains(&self, p: &Vec3) -> bool {
        self.body_contains(p) && !self.cavities.iter().any(|c| c.body_contains(p))
    }

    pub(crate) fn body_contains(&self, p: &Vec3) -> bool {
        let q = self.frame.to_local(p);
        self.body.local_contains(&q)
    }

    /// Signed distance to the material boundary, negative inside the
    /// material. `None` for meshes.
    pub fn signed_distance(&self, p: &Vec3) -> Option<f64> {
        let mut d = self.body_signed_distance(p)?;
        for c in &self.cavities {
            d = d.max(-c.body_signed_distance(p)?);
        }
        Some(d)
    }

    pub(crate) fn body_signed_distance(&self, p: &Vec3) -> Option<f64> {
        let q = self.frame.to_local(p);
        self.body.local_signed_distance(&q)
    }

    /// World-space axis-aligned bounding box of the body.
    pub fn bounding_box(&self) -> (Vec3, Vec3) {
        let (lo, hi) = self.body.local_bounds();
        let mut min = Vec3::repeat(f64::INFINITY);
        let mut max = Vec3::repeat(f64::NEG_INFINITY);
        for i in 0..8 {
            let corner = Vec3::new(
                if i & 1 == 0 { lo.x } else { hi.x },
                if i & 2 == 0 { lo.y } else { hi.y },
                if i & 4 == 0 { lo.z } else { hi.z },
            );
            let w = self.frame.to_world(&corner);
            min = min.inf(&w);
            max = max.sup(&w);
        }
        (min, max)
    }

    /// Largest extent of the local bounding box.
    pub fn characteristic_length(&self) -> f64 {
        let (lo, hi) = self.body.local_bounds();
        (hi - lo).max()
    }

    fn boundary_samples(&self) -> Vec<Vec3> {
        let mut pts: Vec<Vec3> = match &self.body {
            Body::Mesh(m) => m.vertices().iter().map(|v| self.frame.to_world(v)).collect(),
            _ => Vec::new(),
        };
        if let Ok(p) = self.body_patches(3, usize::MAX) {
            pts.extend(p.iter().map(|q| q.point));
        }
        pts
    }

    fn check_cavities(&self) -> Result<(), GeometryError> {
        if self.cavities.is_empty() {
            return Ok(());
        }
        let scale = self.characteristic_length();
        let host_samples = self.boundary_samples();
        for (i, cav) in self.cavities.iter().enumerate() {
            let samples = cav.boundary_samples();
            let inside = |p: &Vec3| match self.body_signed_distance(p) {
                Some(d) => d < -1e-9 * scale,
                None => self.body_contains(p),
            };
            if !samples.iter().all(inside) {
                return Err(GeometryError::CavityOverlap(format!(
                    "cavity {i} is not strictly inside the body"
                )));
            }
            if host_samples.iter().any(|p| cav.body_contains(p)) {
                return Err(GeometryError::CavityOverlap(format!(
                    "cavity {i} crosses the outer boundary"
                )));
            }
            for (j, other) in self.cavities.iter().enumerate().skip(i + 1) {
                let other_samples = other.boundary_samples();
                if samples.iter().any(|p| other.body_contains(p))
                    || other_samples.iter().any(|p| cav.body_contains(p))
                {
                    return Err(GeometryError::CavityOverlap(format!(
                        "cavities {i} and {j} overlap"
                    )));
                }
            }
        }
        Ok(())
    }
}
