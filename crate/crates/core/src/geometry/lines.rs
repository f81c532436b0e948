//! Exact intersections of straight lines with solids.
//!
//! A line is `origin + t·dir` with `dir` a unit vector; results are sorted,
//! disjoint parameter intervals `(t_in, t_out)` where the line is inside.

use super::mesh::TriangleMesh;
use super::shape::{Body, Shape};
use crate::Vec3;

pub(crate) type Intervals = Vec<(f64, f64)>;

const ALL: (f64, f64) = (f64::NEG_INFINITY, f64::INFINITY);

impl Shape {
    /// Parameter intervals where the line lies in the material.
    pub fn line_intervals(&self, origin: &Vec3, dir: &Vec3) -> Intervals {
        let mut out = self.body_line_intervals(origin, dir);
        for c in self.cavities() {
            if out.is_empty() {
                break;
            }
            out = subtract(&out, &c.body_line_intervals(origin, dir));
        }
        out
    }

    pub(crate) fn body_line_intervals(&self, origin: &Vec3, dir: &Vec3) -> Intervals {
        let p = self.frame().to_local(origin);
        let d = self.frame().rotation.inverse() * dir;
        self.body.local_line_intervals(&p, &d)
    }
}

impl Body {
    pub(crate) fn local_line_intervals(&self, p: &Vec3, d: &Vec3) -> Intervals {
        match *self {
            Body::Sphere { radius } => {
                quadratic_nonpositive(d.norm_squared(), 2.0 * p.dot(d), p.norm_squared() - radius * radius)
            }
            Body::Cylinder { radius, length } => revolution_piece(p, d, -0.5 * length, 0.5 * length, radius, 0.0),
            Body::Cuboid { size } => {
                let mut span = ALL;
                for a in 0..3 {
                    match slab(p[a], d[a], -0.5 * size[a], 0.5 * size[a]) {
                        Some(s) => span = (span.0.max(s.0), span.1.min(s.1)),
                        None => return Vec::new(),
                    }
                }
                if span.0 < span.1 {
                    vec![span]
                } else {
                    Vec::new()
                }
            }
            Body::ConeCapped {
                radius,
                length,
                apex_angle,
            } => {
                let (half, h) = (0.5 * length, Body::cone_height(radius, apex_angle));
                let slope = radius / h;
                let mut all = revolution_piece(p, d, -half - h, -half, slope * (half + h), slope);
                all.extend(revolution_piece(p, d, -half, half, radius, 0.0));
                all.extend(revolution_piece(p, d, half, half + h, slope * (half + h), -slope));
                union(all)
            }
            Body::Elliptic { a, b, length } => {
                let scale = Vec3::new(1.0, 1.0 / a, 1.0 / b);
                revolution_piece(&p.component_mul(&scale), &d.component_mul(&scale), -0.5 * length, 0.5 * length, 1.0, 0.0)
            }
            Body::Gapped {
                radius,
                length,
                gaps,
                gap_width,
            } => union(
                Body::gapped_segments(length, gaps, gap_width)
                    .into_iter()
                    .flat_map(|(c, seg)| revolution_piece(p, d, c - 0.5 * seg, c + 0.5 * seg, radius, 0.0))
                    .collect(),
            ),
            Body::Mesh(ref m) => mesh_line_intervals(m, p, d),
        }
    }
}

/// Range of `t` with `lo ≤ p + t·d ≤ hi`.
fn slab(p: f64, d: f64, lo: f64, hi: f64) -> Option<(f64, f64)> {
    if d == 0.0 {
        return (lo <= p && p <= hi).then_some(ALL);
    }
    let (a, b) = ((lo - p) / d, (hi - p) / d);
    Some((a.min(b), a.max(b)))
}

/// `t` with `A t² + B t + C ≤ 0`.
fn quadratic_nonpositive(a: f64, b: f64, c: f64) -> Intervals {
    if a == 0.0 {
        return if b == 0.0 {
            if c <= 0.0 {
                vec![ALL]
            } else {
                Vec::new()
            }
        } else if b > 0.0 {
            vec![(f64::NEG_INFINITY, -c / b)]
        } else {
            vec![(-c / b, f64::INFINITY)]
        };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return if a > 0.0 { Vec::new() } else { vec![ALL] };
    }
    let q = -0.5 * (b + disc.sqrt().copysign(b));
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
    let (lo, hi) = (r1.min(r2), r1.max(r2));
    if a > 0.0 {
        vec![(lo, hi)]
    } else {
        vec![(f64::NEG_INFINITY, lo), (hi, f64::INFINITY)]
    }
}

/// Piece of a solid of revolution about x between `x0` and `x1` with radius
/// `r(x) = r0 + slope·x`, non-negative on the piece.
fn revolution_piece(p: &Vec3, d: &Vec3, x0: f64, x1: f64, r0: f64, slope: f64) -> Intervals {
    let Some(span) = slab(p.x, d.x, x0, x1) else {
        return Vec::new();
    };
    let (rp, rd) = (r0 + slope * p.x, slope * d.x);
    let a = d.y * d.y + d.z * d.z - rd * rd;
    let b = 2.0 * (p.y * d.y + p.z * d.z - rp * rd);
    let c = p.y * p.y + p.z * p.z - rp * rp;
    quadratic_nonpositive(a, b, c)
        .into_iter()
        .filter_map(|(lo, hi)| {
            let (lo, hi) = (lo.max(span.0), hi.min(span.1));
            (lo < hi).then_some((lo, hi))
        })
        .collect()
}

/// Crossings with every triangle, paired by parity.
fn mesh_line_intervals(m: &TriangleMesh, p: &Vec3, d: &Vec3) -> Intervals {
    let mut ts: Vec<f64> = (0..m.triangles().len())
        .filter_map(|t| line_triangle(&m.corners(t), p, d))
        .collect();
    ts.sort_by(f64::total_cmp);
    pair_crossings(&ts)
}

/// Intervals between consecutive crossing pairs of a closed surface.
pub(crate) fn pair_crossings(ts: &[f64]) -> Intervals {
    ts.chunks_exact(2).filter(|c| c[0] < c[1]).map(|c| (c[0], c[1])).collect()
}

/// Möller–Trumbore, two-sided.
fn line_triangle(c: &[Vec3; 3], p: &Vec3, d: &Vec3) -> Option<f64> {
    let (e1, e2) = (c[1] - c[0], c[2] - c[0]);
    let h = d.cross(&e2);
    let det = e1.dot(&h);
    if det == 0.0 {
        return None;
    }
    let s = p - c[0];
    let u = s.dot(&h) / det;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = d.dot(&q) / det;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    Some(e2.dot(&q) / det)
}

/// Sorted union of possibly overlapping intervals.
pub(crate) fn union(mut v: Intervals) -> Intervals {
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Intervals = Vec::with_capacity(v.len());
    for (lo, hi) in v {
        match out.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

/// `a \ b` for sorted, disjoint interval lists.
pub(crate) fn subtract(a: &Intervals, b: &Intervals) -> Intervals {
    let mut out = Vec::new();
    for &(lo, hi) in a {
        let mut start = lo;
        for &(blo, bhi) in b {
            if bhi <= start || blo >= hi {
                continue;
            }
            if blo > start {
                out.push((start, blo));
            }
            start = start.max(bhi);
        }
        if start < hi {
            out.push((start, hi));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_shape, ShapeSpec};

    fn inside_by_intervals(iv: &Intervals, t: f64) -> bool {
        iv.iter().any(|&(a, b)| a < t && t < b)
    }

    /// Membership along random lines agrees with point containment.
    fn check(spec: ShapeSpec) {
        let shape = build_shape(&spec).unwrap();
        let (lo, hi) = shape.bounding_box();
        let span = (hi - lo).norm();
        let mut seed = 0x2545_f491_4f6c_dd1du64;
        let mut rnd = || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..200 {
            let o = lo + (hi - lo).component_mul(&Vec3::new(rnd(), rnd(), rnd()));
            let d = Vec3::new(rnd() - 0.5, rnd() - 0.5, rnd() - 0.5).normalize();
            let iv = shape.line_intervals(&o, &d);
            for w in iv.windows(2) {
                assert!(w[0].1 <= w[1].0);
            }
            for m in 0..101 {
                let t = (m as f64 / 100.0 - 0.5) * 2.0 * span + 1e-7 * rnd();
                let p = o + d * t;
                let near = shape.signed_distance(&p).map_or(false, |s| s.abs() < 1e-9 * span);
                if !near {
                    assert_eq!(inside_by_intervals(&iv, t), shape.contains(&p), "{:?} t={t}", shape.spec().type_name());
                }
            }
        }
    }

    #[test]
    fn analytic_bodies_agree_with_containment() {
        let axis = Vec3::new(0.3, -1.0, 0.5);
        check(ShapeSpec::sphere(2.0).with_center(Vec3::new(0.5, 0.0, 1.0)));
        check(ShapeSpec::cylinder(1.0, 5.0).with_axis(axis));
        check(ShapeSpec::cuboid(1.0, 2.0, 3.0).with_axis(axis));
        check(ShapeSpec::cone_capped_cylinder(1.0, 3.0, 0.9).with_axis(axis));
        check(ShapeSpec::elliptic_cylinder(1.5, 0.7, 4.0).with_axis(axis));
        check(ShapeSpec::gapped_cylinder(1.0, 8.0, 3, 0.5).with_axis(axis));
        check(ShapeSpec::sphere(3.0).with_cavity(ShapeSpec::cuboid(1.0, 1.0, 1.0)));
    }

    #[test]
    fn mesh_crossings_pair_up() {
        let m = TriangleMesh::icosphere(2.0, 3);
        let shape = build_shape(&ShapeSpec::mesh(&m)).unwrap();
        let iv = shape.line_intervals(&Vec3::new(-5.0, 0.1, 0.2), &Vec3::x());
        assert_eq!(iv.len(), 1);
        let chord = 2.0 * (4.0f64 - 0.05).sqrt();
        assert!(((iv[0].1 - iv[0].0) - chord).abs() < 0.05);
    }

    #[test]
    fn interval_algebra() {
        assert_eq!(union(vec![(3.0, 4.0), (0.0, 1.0), (0.5, 2.0)]), vec![(0.0, 2.0), (3.0, 4.0)]);
        assert_eq!(subtract(&vec![(0.0, 10.0)], &vec![(2.0, 3.0), (5.0, 12.0)]), vec![(0.0, 2.0), (3.0, 5.0)]);
        assert_eq!(quadratic_nonpositive(-1.0, 0.0, 1.0), vec![(f64::NEG_INFINITY, -1.0), (1.0, f64::INFINITY)]);
    }
}
