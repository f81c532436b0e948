//! Signed distance, containment and bounds of bodies in their local frame.

use super::shape::Body;
use crate::Vec3;

impl Body {
    /// Exact Euclidean signed distance, negative inside. `None` for meshes.
    pub(crate) fn local_signed_distance(&self, q: &Vec3) -> Option<f64> {
        let rho = (q.y * q.y + q.z * q.z).sqrt();
        Some(match *self {
            Body::Sphere { radius } => q.norm() - radius,
            Body::Cylinder { radius, length } => extrude(rho - radius, q.x.abs() - 0.5 * length),
            Body::Cuboid { size } => {
                let d = q.abs() - size * 0.5;
                let outside = d.sup(&Vec3::zeros()).norm();
                outside + d.max().min(0.0)
            }
            Body::ConeCapped {
                radius,
                length,
                apex_angle,
            } => cone_capped_distance(radius, length, apex_angle, q.x.abs(), rho),
            Body::Elliptic { a, b, length } => {
                extrude(ellipse_signed_distance(a, b, q.y, q.z), q.x.abs() - 0.5 * length)
            }
            Body::Gapped {
                radius,
                length,
                gaps,
                gap_width,
            } => Body::gapped_segments(length, gaps, gap_width)
                .into_iter()
                .map(|(cx, seg)| extrude(rho - radius, (q.x - cx).abs() - 0.5 * seg))
                .fold(f64::INFINITY, f64::min),
            Body::Mesh(_) => return None,
        })
    }

    pub(crate) fn local_contains(&self, q: &Vec3) -> bool {
        match self {
            Body::Mesh(m) => m.contains(q),
            _ => self.local_signed_distance(q).unwrap() < 0.0,
        }
    }

    pub(crate) fn local_bounds(&self) -> (Vec3, Vec3) {
        let hi = match *self {
            Body::Sphere { radius } => Vec3::repeat(radius),
            Body::Cylinder { radius, length } | Body::Gapped { radius, length, .. } => {
                Vec3::new(0.5 * length, radius, radius)
            }
            Body::Cuboid { size } => size * 0.5,
            Body::ConeCapped {
                radius,
                length,
                apex_angle,
            } => Vec3::new(
                0.5 * length + Body::cone_height(radius, apex_angle),
                radius,
                radius,
            ),
            Body::Elliptic { a, b, length } => Vec3::new(0.5 * length, a, b),
            Body::Mesh(ref m) => return m.bounds(),
        };
        (-hi, hi)
    }
}

/// Signed distance of a 2-D section extruded along an axis, given the
/// section's signed distance `d2` and the axial excess `dx = |x| - L/2`.
fn extrude(d2: f64, dx: f64) -> f64 {
    let outside = (d2.max(0.0).powi(2) + dx.max(0.0).powi(2)).sqrt();
    outside + d2.max(dx).min(0.0)
}

/// Meridian-plane distance for the cone-capped cylinder, with `x ≥ 0`.
fn cone_capped_distance(radius: f64, length: f64, apex: f64, x: f64, rho: f64) -> f64 {
    let half = 0.5 * length;
    let h = Body::cone_height(radius, apex);
    let p = (x, rho);
    let d = seg_distance(p, (-half, radius), (half, radius))
        .min(seg_distance(p, (half, radius), (half + h, 0.0)));
    let profile = if x <= half {
        radius
    } else if x < half + h {
        radius * (half + h - x) / h
    } else {
        -1.0
    };
    if rho < profile {
        -d
    } else {
        d
    }
}

fn seg_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (abx, aby) = (b.0 - a.0, b.1 - a.1);
    let (apx, apy) = (p.0 - a.0, p.1 - a.1);
    let t = ((apx * abx + apy * aby) / (abx * abx + aby * aby)).clamp(0.0, 1.0);
    ((apx - t * abx).powi(2) + (apy - t * aby).powi(2)).sqrt()
}

/// Signed distance from `(y, z)` to the ellipse `(y/a)² + (z/b)² = 1`.
pub(crate) fn ellipse_signed_distance(a: f64, b: f64, y: f64, z: f64) -> f64 {
    let d = ellipse_distance(a, b, y, z);
    if (y / a).powi(2) + (z / b).powi(2) < 1.0 {
        -d
    } else {
        d
    }
}

/// Unsigned distance to an ellipse, by bisection on the Lagrange
/// multiplier of the nearest-point problem (Eberly).
fn ellipse_distance(a: f64, b: f64, y: f64, z: f64) -> f64 {
    let (e0, e1, y0, y1) = if a >= b {
        (a, b, y.abs(), z.abs())
    } else {
        (b, a, z.abs(), y.abs())
    };
    if y1 > 0.0 {
        if y0 > 0.0 {
            let z0 = y0 / e0;
            let z1 = y1 / e1;
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g == 0.0 {
                return 0.0;
            }
            let r0 = (e0 / e1).powi(2);
            let s = ellipse_root(r0, z0, z1, g);
            let x0 = r0 * y0 / (s + r0);
            let x1 = y1 / (s + 1.0);
            ((x0 - y0).powi(2) + (x1 - y1).powi(2)).sqrt()
        } else {
            (y1 - e1).abs()
        }
    } else {
        let numer = e0 * y0;
        let denom = e0 * e0 - e1 * e1;
        if numer < denom {
            let xde = numer / denom;
            let x0 = e0 * xde;
            let x1 = e1 * (1.0 - xde * xde).sqrt();
            ((x0 - y0).powi(2) + x1 * x1).sqrt()
        } else {
            (y0 - e0).abs()
        }
    }
}

fn ellipse_root(r0: f64, z0: f64, z1: f64, g: f64) -> f64 {
    let n0 = r0 * z0;
    let mut s0 = z1 - 1.0;
    let mut s1 = if g < 0.0 { 0.0 } else { n0.hypot(z1) - 1.0 };
    let mut s = 0.0;
    for _ in 0..200 {
        s = 0.5 * (s0 + s1);
        if s == s0 || s == s1 {
            break;
        }
        let g = (n0 / (s + r0)).powi(2) + (z1 / (s + 1.0)).powi(2) - 1.0;
        if g > 0.0 {
            s0 = s;
        } else if g < 0.0 {
            s1 = s;
        } else {
            break;
        }
    }
    s
}
