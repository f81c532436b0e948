use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::quadrature::analytic_area;
use super::shape::{Body, Shape};
use super::GeometryError;
use crate::{Mat3, Vec3};

/// Bulk properties of a homogeneous solid, tensors taken about the centroid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassProperties {
    /// m³
    pub volume: f64,
    /// Boundary area including cavity walls, m².
    pub area: f64,
    /// kg
    pub mass: f64,
    pub centroid: Vec3,
    /// `∫ρ(r²δ − r∘r) dV`, kg·m².
    pub inertia: Mat3,
    /// `J = ∫ρ r∘r dV`, kg·m².
    pub second_moment: Mat3,
}

impl MassProperties {
    /// Principal moments (ascending) and the matching unit axes as columns.
    pub fn principal_axes(&self) -> ([f64; 3], Mat3) {
        let eig = self.inertia.symmetric_eigen();
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let moments = order.map(|i| eig.eigenvalues[i]);
        let axes = Mat3::from_columns(&order.map(|i| eig.eigenvectors.column(i).into_owned()));
        (moments, axes)
    }
}

/// Volume, centroid and centroidal `∫ r∘r dV` of a body in its local frame.
struct Moments {
    volume: f64,
    centroid: Vec3,
    second: Mat3,
}

impl Shape {
    /// Mass properties at uniform density `density` (kg/m³). Cavities remove
    /// volume and contribute their walls to the area.
    pub fn mass_properties(&self, density: f64) -> Result<MassProperties, GeometryError> {
        if !(density.is_finite() && density > 0.0) {
            return Err(GeometryError::InvalidDensity(density));
        }
        // accumulate volume, first and second moment about the world origin
        let world = |s: &Shape| {
            let m = s.body.local_moments();
            let c = s.frame().to_world(&m.centroid);
            let r = s.frame().rotation.matrix();
            let k = r * m.second * r.transpose() + m.volume * c * c.transpose();
            (m.volume, m.volume * c, k)
        };
        let (mut v, mut first, mut k) = world(self);
        let mut area = analytic_area(&self.body);
        for c in self.cavities() {
            let (cv, cf, ck) = world(c);
            v -= cv;
            first -= cf;
            k -= ck;
            area += analytic_area(&c.body);
        }
        let centroid = first / v;
        let about_centroid = k - v * centroid * centroid.transpose();
        let j = density * 0.5 * (about_centroid + about_centroid.transpose());
        let inertia = Mat3::identity() * j.trace() - j;
        Ok(MassProperties {
            volume: v,
            area,
            mass: density * v,
            centroid,
            inertia,
            second_moment: j,
        })
    }
}

impl Body {
    fn local_moments(&self) -> Moments {
        let diag = |v: f64, x2: f64, y2: f64, z2: f64| Moments {
            volume: v,
            centroid: Vec3::zeros(),
            second: Mat3::from_diagonal(&Vec3::new(v * x2, v * y2, v * z2)),
        };
        match *self {
            Body::Sphere { radius } => {
                let r2 = radius * radius / 5.0;
                diag(4.0 / 3.0 * PI * radius.powi(3), r2, r2, r2)
            }
            Body::Cylinder { radius, length } => {
                let r2 = radius * radius / 4.0;
                diag(PI * radius * radius * length, length * length / 12.0, r2, r2)
            }
            Body::Cuboid { size } => diag(
                size.x * size.y * size.z,
                size.x * size.x / 12.0,
                size.y * size.y / 12.0,
                size.z * size.z / 12.0,
            ),
            Body::Elliptic { a, b, length } => {
                diag(PI * a * b * length, length * length / 12.0, a * a / 4.0, b * b / 4.0)
            }
            Body::Gapped {
                radius,
                length,
                gaps,
                gap_width,
            } => {
                let (mut v, mut kx) = (0.0, 0.0);
                for (cx, seg) in Body::gapped_segments(length, gaps, gap_width) {
                    let vs = PI * radius * radius * seg;
                    v += vs;
                    kx += vs * (seg * seg / 12.0 + cx * cx);
                }
                let r2 = radius * radius / 4.0;
                Moments {
                    volume: v,
                    centroid: Vec3::zeros(),
                    second: Mat3::from_diagonal(&Vec3::new(kx, v * r2, v * r2)),
                }
            }
            Body::ConeCapped {
                radius,
                length,
                apex_angle,
            } => {
                let h = Body::cone_height(radius, apex_angle);
                let vc = PI * radius * radius * length;
                let vk = PI * radius * radius * h / 3.0;
                // one cap, measured from its tip: ∫x' dV = ¾hV, ∫x'² dV = πR²h³/5
                let tip = 0.5 * length + h;
                let cap_x2 = tip * tip * vk - 2.0 * tip * 0.75 * h * vk + PI * radius * radius * h.powi(3) / 5.0;
                let cap_r2 = PI * radius.powi(4) * h / 20.0;
                let kx = vc * length * length / 12.0 + 2.0 * cap_x2;
                let ky = vc * radius * radius / 4.0 + 2.0 * cap_r2;
                Moments {
                    volume: vc + 2.0 * vk,
                    centroid: Vec3::zeros(),
                    second: Mat3::from_diagonal(&Vec3::new(kx, ky, ky)),
                }
            }
            Body::Mesh(ref mesh) => {
                let o = mesh.vertices()[0];
                let (mut v, mut m1, mut k) = (0.0, Vec3::zeros(), Mat3::zeros());
                for t in 0..mesh.triangles().len() {
                    let [a, b, c] = mesh.corners(t).map(|p| p - o);
                    let vol = a.dot(&b.cross(&c)) / 6.0;
                    let s = a + b + c;
                    v += vol;
                    m1 += vol * s / 4.0;
                    k += vol / 20.0
                        * (a * a.transpose() + b * b.transpose() + c * c.transpose() + s * s.transpose());
                }
                let c = m1 / v;
                Moments {
                    volume: v,
                    centroid: o + c,
                    second: k - v * c * c.transpose(),
                }
            }
        }
    }
}
