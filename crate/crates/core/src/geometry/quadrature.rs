//! Boundary quadrature: exact parametric surfaces for analytic bodies,
//! a degree-2 triangle rule for meshes.
//!
//! Curved directions use a uniform azimuthal grid of `4·resolution` nodes
//! (spectrally accurate for periodic integrands); straight directions use
//! Gauss–Legendre with `max(2, ⌈resolution·extent/char_len⌉)` nodes, where
//! `char_len` is the body's largest extent.

use std::f64::consts::{PI, TAU};

use nalgebra::Rotation3;
use serde::{Deserialize, Serialize};

use super::shape::{Body, Shape};
use super::GeometryError;
use crate::gauss::GaussLegendre;
use crate::Vec3;

/// Keeps sphere area error far below 0.1%; see the crate tests.
pub const DEFAULT_RESOLUTION: usize = 16;

/// About 560 MB of patches.
pub const DEFAULT_MAX_PATCHES: usize = 10_000_000;

/// One quadrature node of a boundary integral `∮ f dS ≈ Σ f(point)·weight`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Patch {
    pub point: Vec3,
    /// Unit normal pointing out of the material.
    pub normal: Vec3,
    /// Area weight in m².
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfacePatches {
    pub patches: Vec<Patch>,
    pub total_area: f64,
}

impl SurfacePatches {
    pub fn new(patches: Vec<Patch>) -> Self {
        let total_area = patches.iter().map(|p| p.weight).sum();
        Self {
            patches,
            total_area,
        }
    }

    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    /// Rigid motion of every point and normal.
    pub fn transformed(&self, rotation: &Rotation3<f64>, translation: &Vec3) -> Self {
        Self {
            patches: self
                .patches
                .iter()
                .map(|p| Patch {
                    point: rotation * p.point + translation,
                    normal: rotation * p.normal,
                    weight: p.weight,
                })
                .collect(),
            total_area: self.total_area,
        }
    }
}

impl Shape {
    /// Boundary quadrature at `resolution` with the default patch cap.
    pub fn quadrature(&self, resolution: usize) -> Result<SurfacePatches, GeometryError> {
        self.quadrature_capped(resolution, DEFAULT_MAX_PATCHES)
    }

    /// Boundary quadrature including cavity walls (normals into the cavity).
    ///
    /// Mesh bodies ignore `resolution`: each triangle gets a three-point rule
    /// that is exact for the quadratic integrands of both surface tensors.
    pub fn quadrature_capped(
        &self,
        resolution: usize,
        max_patches: usize,
    ) -> Result<SurfacePatches, GeometryError> {
        if resolution == 0 {
            return Err(GeometryError::InvalidResolution);
        }
        let requested = std::iter::once(self)
            .chain(self.cavities())
            .map(|s| s.patch_count(resolution))
            .fold(0usize, usize::saturating_add);
        if requested > max_patches {
            return Err(GeometryError::ResolutionOverflow {
                requested,
                cap: max_patches,
            });
        }
        let mut patches = self.body_patches(resolution, max_patches)?;
        for cavity in self.cavities() {
            patches.extend(cavity.body_patches(resolution, max_patches)?.into_iter().map(|p| Patch {
                normal: -p.normal,
                ..p
            }));
        }
        Ok(SurfacePatches::new(patches))
    }

    fn lin(&self, resolution: usize, extent: f64) -> usize {
        let n = (resolution as f64 * extent / self.characteristic_length()).ceil();
        if n.is_finite() && n < usize::MAX as f64 {
            (n as usize).max(2)
        } else {
            usize::MAX
        }
    }

    fn patch_count(&self, res: usize) -> usize {
        let ring = res.saturating_mul(4);
        let m = |a: usize, b: usize| a.saturating_mul(b);
        match self.body {
            Body::Sphere { .. } => m(res.saturating_mul(2), ring),
            Body::Cylinder { radius, length } => {
                m(self.lin(res, length), ring).saturating_add(m(2 * self.lin(res, radius), ring))
            }
            Body::Cuboid { size } => {
                let (a, b, c) = (self.lin(res, size.x), self.lin(res, size.y), self.lin(res, size.z));
                m(2, m(a, b).saturating_add(m(b, c)).saturating_add(m(a, c)))
            }
            Body::ConeCapped {
                radius,
                length,
                apex_angle,
            } => {
                let slant = radius.hypot(Body::cone_height(radius, apex_angle));
                m(self.lin(res, length), ring).saturating_add(m(2 * self.lin(res, slant), ring))
            }
            Body::Elliptic { a, b, length } => m(self.lin(res, length), ring)
                .saturating_add(m(2 * self.lin(res, a.max(b)), ring)),
            Body::Gapped {
                radius,
                length,
                gaps,
                gap_width,
            } => Body::gapped_segments(length, gaps, gap_width)
                .iter()
                .map(|&(_, seg)| {
                    m(self.lin(res, seg), ring).saturating_add(m(2 * self.lin(res, radius), ring))
                })
                .fold(0, usize::saturating_add),
            Body::Mesh(ref mesh) => 3 * mesh.triangles().len(),
        }
    }

    /// Patches of the outer body only, in world coordinates.
    pub(crate) fn body_patches(
        &self,
        res: usize,
        max_patches: usize,
    ) -> Result<Vec<Patch>, GeometryError> {
        let requested = self.patch_count(res);
        if requested > max_patches {
            return Err(GeometryError::ResolutionOverflow {
                requested,
                cap: max_patches,
            });
        }
        let mut out = Vec::with_capacity(requested);
        let ring = 4 * res;
        match self.body {
            Body::Sphere { radius } => sphere(&mut out, radius, 2 * res, ring),
            Body::Cylinder { radius, length } => {
                cylinder(&mut out, radius, 0.0, length, self.lin(res, length), ring);
                disk(&mut out, radius, 0.5 * length, 1.0, self.lin(res, radius), ring);
                disk(&mut out, radius, -0.5 * length, -1.0, self.lin(res, radius), ring);
            }
            Body::Cuboid { size } => {
                let n = [self.lin(res, size.x), self.lin(res, size.y), self.lin(res, size.z)];
                cuboid(&mut out, size, n);
            }
            Body::ConeCapped {
                radius,
                length,
                apex_angle,
            } => {
                let h = Body::cone_height(radius, apex_angle);
                let slant = radius.hypot(h);
                cylinder(&mut out, radius, 0.0, length, self.lin(res, length), ring);
                cone(&mut out, radius, 0.5 * length, h, 1.0, self.lin(res, slant), ring);
                cone(&mut out, radius, -0.5 * length, h, -1.0, self.lin(res, slant), ring);
            }
            Body::Elliptic { a, b, length } => {
                elliptic(&mut out, a, b, length, self.lin(res, length), self.lin(res, a.max(b)), ring)
            }
            Body::Gapped {
                radius,
                length,
                gaps,
                gap_width,
            } => {
                let nr = self.lin(res, radius);
                for (cx, seg) in Body::gapped_segments(length, gaps, gap_width) {
                    cylinder(&mut out, radius, cx, seg, self.lin(res, seg), ring);
                    disk(&mut out, radius, cx + 0.5 * seg, 1.0, nr, ring);
                    disk(&mut out, radius, cx - 0.5 * seg, -1.0, nr, ring);
                }
            }
            Body::Mesh(ref mesh) => {
                for t in 0..mesh.triangles().len() {
                    let [a, b, c] = mesh.corners(t);
                    let w = mesh.areas()[t] / 3.0;
                    if w == 0.0 {
                        continue;
                    }
                    let n = mesh.normals()[t];
                    for (p, q, r) in [(a, b, c), (b, c, a), (c, a, b)] {
                        out.push(Patch {
                            point: p * (2.0 / 3.0) + (q + r) / 6.0,
                            normal: n,
                            weight: w,
                        });
                    }
                }
            }
        }
        let frame = self.frame();
        for p in &mut out {
            p.point = frame.to_world(&p.point);
            p.normal = frame.dir_to_world(&p.normal);
        }
        Ok(out)
    }
}

fn azimuth(ring: usize) -> impl Iterator<Item = (f64, f64)> {
    (0..ring).map(move |j| {
        let phi = TAU * (j as f64 + 0.5) / ring as f64;
        (phi.cos(), phi.sin())
    })
}

fn sphere(out: &mut Vec<Patch>, radius: f64, nu: usize, ring: usize) {
    let rule = GaussLegendre::new(nu);
    let dphi = TAU / ring as f64;
    for (u, wu) in rule.on_interval(-1.0, 1.0) {
        let s = (1.0 - u * u).sqrt();
        for (c, sn) in azimuth(ring) {
            let n = Vec3::new(u, s * c, s * sn);
            out.push(Patch {
                point: n * radius,
                normal: n,
                weight: radius * radius * wu * dphi,
            });
        }
    }
}

/// Lateral surface of a circular cylinder about the x axis centred at `cx`.
fn cylinder(out: &mut Vec<Patch>, radius: f64, cx: f64, length: f64, nx: usize, ring: usize) {
    let rule = GaussLegendre::new(nx);
    let dphi = TAU / ring as f64;
    for (x, wx) in rule.on_interval(cx - 0.5 * length, cx + 0.5 * length) {
        for (c, s) in azimuth(ring) {
            out.push(Patch {
                point: Vec3::new(x, radius * c, radius * s),
                normal: Vec3::new(0.0, c, s),
                weight: radius * wx * dphi,
            });
        }
    }
}

/// Flat disk at `x` with normal `sign·x̂`.
fn disk(out: &mut Vec<Patch>, radius: f64, x: f64, sign: f64, nr: usize, ring: usize) {
    let rule = GaussLegendre::new(nr);
    let dphi = TAU / ring as f64;
    for (r, wr) in rule.on_interval(0.0, radius) {
        for (c, s) in azimuth(ring) {
            out.push(Patch {
                point: Vec3::new(x, r * c, r * s),
                normal: Vec3::new(sign, 0.0, 0.0),
                weight: r * wr * dphi,
            });
        }
    }
}

/// Conical cap with base radius `radius` at `x0`, tip at `x0 + sign·h`.
fn cone(out: &mut Vec<Patch>, radius: f64, x0: f64, h: f64, sign: f64, ns: usize, ring: usize) {
    let rule = GaussLegendre::new(ns);
    let slant = radius.hypot(h);
    let (nx, nr) = (sign * radius / slant, h / slant);
    let dphi = TAU / ring as f64;
    for (t, wt) in rule.on_interval(0.0, 1.0) {
        let x = x0 + sign * t * h;
        let r = radius * (1.0 - t);
        for (c, s) in azimuth(ring) {
            out.push(Patch {
                point: Vec3::new(x, r * c, r * s),
                normal: Vec3::new(nx, nr * c, nr * s),
                weight: r * slant * wt * dphi,
            });
        }
    }
}

fn cuboid(out: &mut Vec<Patch>, size: Vec3, n: [usize; 3]) {
    let half = size * 0.5;
    for axis in 0..3 {
        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
        let ru = GaussLegendre::new(n[u]);
        let rv = GaussLegendre::new(n[v]);
        for sign in [-1.0, 1.0] {
            for (pu, wu) in ru.on_interval(-half[u], half[u]) {
                for (pv, wv) in rv.on_interval(-half[v], half[v]) {
                    let mut point = Vec3::zeros();
                    point[axis] = sign * half[axis];
                    point[u] = pu;
                    point[v] = pv;
                    let mut normal = Vec3::zeros();
                    normal[axis] = sign;
                    out.push(Patch {
                        point,
                        normal,
                        weight: wu * wv,
                    });
                }
            }
        }
    }
}

fn elliptic(out: &mut Vec<Patch>, a: f64, b: f64, length: f64, nx: usize, nr: usize, ring: usize) {
    let rx = GaussLegendre::new(nx);
    let dt = TAU / ring as f64;
    for (x, wx) in rx.on_interval(-0.5 * length, 0.5 * length) {
        for (c, s) in azimuth(ring) {
            let n = Vec3::new(0.0, b * c, a * s);
            let speed = n.norm();
            out.push(Patch {
                point: Vec3::new(x, a * c, b * s),
                normal: n / speed,
                weight: speed * wx * dt,
            });
        }
    }
    let rr = GaussLegendre::new(nr);
    for sign in [-1.0, 1.0] {
        for (r, wr) in rr.on_interval(0.0, 1.0) {
            for (c, s) in azimuth(ring) {
                out.push(Patch {
                    point: Vec3::new(sign * 0.5 * length, a * r * c, b * r * s),
                    normal: Vec3::new(sign, 0.0, 0.0),
                    weight: a * b * r * wr * dt,
                });
            }
        }
    }
}

/// Exact boundary area of the body alone (no cavities), for tests and
/// reports. Meshes return their facet sum.
pub(crate) fn analytic_area(body: &Body) -> f64 {
    match *body {
        Body::Sphere { radius } => 4.0 * PI * radius * radius,
        Body::Cylinder { radius, length } => TAU * radius * length + TAU * radius * radius,
        Body::Cuboid { size } => 2.0 * (size.x * size.y + size.y * size.z + size.x * size.z),
        Body::ConeCapped {
            radius,
            length,
            apex_angle,
        } => {
            let slant = radius.hypot(Body::cone_height(radius, apex_angle));
            TAU * radius * length + 2.0 * PI * radius * slant
        }
        Body::Elliptic { a, b, length } => {
            crate::special::ellipse_perimeter(a, b) * length + 2.0 * PI * a * b
        }
        Body::Gapped {
            radius,
            length,
            gaps,
            gap_width,
        } => {
            let solid = length - gaps as f64 * gap_width;
            TAU * radius * solid + (gaps + 1) as f64 * TAU * radius * radius
        }
        Body::Mesh(ref m) => m.area(),
    }
}
