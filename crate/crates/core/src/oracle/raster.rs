//! σ-smoothed density fields `μ_σ = ρ·(χ ⊛ G_σ)` on voxel grids.
//!
//! Three constructions:
//!
//! - **Exact**: closed-form convolution for spheres, boxes and (gapped)
//!   cylinders, cavities subtracted. Box factors are separable erf
//!   differences; cylinders combine an axial erf factor with a tabulated
//!   radial disk-Gaussian convolution.
//! - **Convolved**: lines along `x` intersected exactly with the body and
//!   blurred in closed form along the line, then summed over a lattice of
//!   lines with Gaussian weights in `y` and `z`. Works for every body,
//!   meshes included.
//! - **Normal profile**: `ρ·(H ⊛ g_σ)(d)` with `d` the signed distance,
//!   treating the boundary as locally flat. Needed for non-step edge
//!   profiles.

use std::f64::consts::{SQRT_2, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::VoxelGrid;
use super::profile::EdgeProfile;
use super::OracleError;
use crate::gauss::GaussLegendre;
use nalgebra::Rotation3;

use crate::geometry::{pair_crossings, subtract, Body, Frame, Intervals, Shape};
use crate::special::{bessel_i0e, normal_cdf};
use crate::Vec3;

/// 512³ doubles, 1 GiB.
pub const DEFAULT_MAX_CELLS: usize = 1 << 27;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RasterMethod {
    /// Exact where a closed form exists, else convolved; normal profile for
    /// non-step edges.
    #[default]
    Auto,
    Exact,
    Convolved,
    NormalProfile,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    pub spacing: f64,
    /// Margin around the bounding box on every side.
    pub padding: f64,
    pub max_cells: usize,
    /// The convolved route casts `supersample²` lines through each cell.
    pub supersample: usize,
    pub method: RasterMethod,
}

impl GridOptions {
    /// Spacing σ/2 and padding 6σ, which puts boundary values below 1e-8 ρ.
    pub fn for_sigma(sigma: f64) -> Self {
        Self {
            spacing: 0.5 * sigma,
            padding: 6.0 * sigma,
            max_cells: DEFAULT_MAX_CELLS,
            supersample: 3,
            method: RasterMethod::Auto,
        }
    }
}

/// Grid nodes centred on the body's bounding box with `padding` clearance.
pub(crate) fn layout(
    shape: &Shape,
    spacing: f64,
    padding: f64,
    max_cells: usize,
) -> Result<VoxelGrid, OracleError> {
    let (lo, hi) = shape.bounding_box();
    layout_box(lo, hi, spacing, padding, max_cells)
}

/// Grid for sampling `shape` in coordinates `q` with world point `view·q`.
pub(crate) fn layout_viewed(
    shape: &Shape,
    view: &Rotation3<f64>,
    spacing: f64,
    padding: f64,
    max_cells: usize,
) -> Result<VoxelGrid, OracleError> {
    let (wlo, whi) = shape.bounding_box();
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for m in 0..8 {
        let c = Vec3::new(
            if m & 1 == 0 { wlo.x } else { whi.x },
            if m & 2 == 0 { wlo.y } else { whi.y },
            if m & 4 == 0 { wlo.z } else { whi.z },
        );
        let q = view.inverse() * c;
        lo = lo.inf(&q);
        hi = hi.sup(&q);
    }
    layout_box(lo, hi, spacing, padding, max_cells)
}

fn layout_box(lo: Vec3, hi: Vec3, spacing: f64, padding: f64, max_cells: usize) -> Result<VoxelGrid, OracleError> {
    let centre = (lo + hi) * 0.5;
    let mut dims = [0usize; 3];
    for a in 0..3 {
        let n = ((hi[a] - lo[a] + 2.0 * padding) / spacing).ceil() + 1.0;
        if !(n.is_finite() && n < 1e12) {
            return Err(OracleError::GridTooLarge {
                requested: usize::MAX,
                cap: max_cells,
            });
        }
        dims[a] = n as usize;
    }
    let requested = dims
        .iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n))
        .unwrap_or(usize::MAX);
    if requested > max_cells {
        return Err(OracleError::GridTooLarge {
            requested,
            cap: max_cells,
        });
    }
    let half = Vec3::new(dims[0] as f64 - 1.0, dims[1] as f64 - 1.0, dims[2] as f64 - 1.0) * (0.5 * spacing);
    Ok(VoxelGrid::zeros(centre - half, spacing, dims, padding))
}

fn check_inputs(density: f64, sigma: f64, opts: &GridOptions) -> Result<(), OracleError> {
    if !(density.is_finite() && density > 0.0) {
        return Err(OracleError::InvalidInput(format!("density must be positive, got {density}")));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(OracleError::InvalidInput(format!("σ must be positive, got {sigma}")));
    }
    if !(opts.spacing.is_finite() && opts.spacing > 0.0) {
        return Err(OracleError::InvalidInput(format!(
            "spacing must be positive, got {}",
            opts.spacing
        )));
    }
    if opts.spacing > 0.5 * sigma * (1.0 + 1e-12) {
        return Err(OracleError::SpacingTooCoarse {
            spacing: opts.spacing,
            max: 0.5 * sigma,
        });
    }
    if opts.supersample == 0 {
        return Err(OracleError::InvalidInput("supersample must be ≥ 1".into()));
    }
    Ok(())
}

/// Rasterises `μ_σ` for `shape` at uniform `density`.
pub fn rasterize_smoothed_density(
    shape: &Shape,
    density: f64,
    sigma: f64,
    opts: &GridOptions,
    profile: &EdgeProfile,
) -> Result<VoxelGrid, OracleError> {
    check_inputs(density, sigma, opts)?;
    profile.validate()?;
    let any_mesh = shape.is_mesh() || shape.cavities().iter().any(Shape::is_mesh);
    let exact = exact_terms(shape, sigma);
    let method = match (opts.method, profile.is_step()) {
        (RasterMethod::Auto, true) if exact.is_some() => RasterMethod::Exact,
        (RasterMethod::Auto, true) => RasterMethod::Convolved,
        (RasterMethod::Auto, false) | (RasterMethod::NormalProfile, _) => RasterMethod::NormalProfile,
        (m, true) => m,
        (_, false) => {
            return Err(OracleError::UnsupportedProfile(
                "exact and convolved fields model the sharp step only".into(),
            ))
        }
    };
    if method == RasterMethod::NormalProfile && any_mesh {
        return Err(OracleError::UnsupportedProfile(
            "normal-profile fields need a signed distance, which meshes do not provide".into(),
        ));
    }
    let mut grid = layout(shape, opts.spacing, opts.padding, opts.max_cells)?;
    match method {
        RasterMethod::Exact => {
            let terms = exact.ok_or_else(|| {
                OracleError::UnsupportedProfile(format!(
                    "no closed-form smoothed field for {}",
                    shape.spec().type_name()
                ))
            })?;
            fill(&mut grid, |p| {
                density * terms.iter().map(|t| t.sign * t.field.eval(&t.frame.to_local(p), sigma)).sum::<f64>()
            });
        }
        RasterMethod::NormalProfile => {
            fill(&mut grid, |p| density * profile.smoothed(shape.signed_distance(p).unwrap(), sigma));
        }
        RasterMethod::Convolved => {
            convolved_field(&mut grid, shape, sigma, opts.supersample * opts.supersample);
            grid.values.iter_mut().for_each(|v| *v *= density);
        }
        RasterMethod::Auto => unreachable!(),
    }
    Ok(grid)
}

fn fill<F: Fn(&Vec3) -> f64 + Sync>(grid: &mut VoxelGrid, f: F) {
    let [nx, ny, _] = grid.dims;
    let (origin, h) = (grid.origin, grid.spacing);
    grid.values.par_chunks_mut(nx * ny).enumerate().for_each(|(k, slab)| {
        for j in 0..ny {
            for i in 0..nx {
                let p = origin + Vec3::new(i as f64, j as f64, k as f64) * h;
                slab[i + nx * j] = f(&p);
            }
        }
    });
}

struct ExactTerm {
    frame: Frame,
    field: ExactField,
    sign: f64,
}

enum ExactField {
    Sphere { radius: f64 },
    Box { half: Vec3 },
    /// Coaxial cylinder segments `(centre_x, half_length)` sharing a radius.
    Cylinders { segments: Vec<(f64, f64)>, radial: RadialTable },
}

fn exact_terms(shape: &Shape, sigma: f64) -> Option<Vec<ExactTerm>> {
    let term = |s: &Shape, sign: f64| -> Option<ExactTerm> {
        let field = match s.body {
            Body::Sphere { radius } => ExactField::Sphere { radius },
            Body::Cuboid { size } => ExactField::Box { half: size * 0.5 },
            Body::Cylinder { radius, length } => ExactField::Cylinders {
                segments: vec![(0.0, 0.5 * length)],
                radial: RadialTable::new(radius, sigma),
            },
            Body::Gapped {
                radius,
                length,
                gaps,
                gap_width,
            } => ExactField::Cylinders {
                segments: Body::gapped_segments(length, gaps, gap_width)
                    .into_iter()
                    .map(|(c, l)| (c, 0.5 * l))
                    .collect(),
                radial: RadialTable::new(radius, sigma),
            },
            _ => return None,
        };
        Some(ExactTerm {
            frame: *s.frame(),
            field,
            sign,
        })
    };
    let mut terms = vec![term(shape, 1.0)?];
    for c in shape.cavities() {
        terms.push(term(c, -1.0)?);
    }
    Some(terms)
}

/// `Φ((half − x)/σ) − Φ((−half − x)/σ)`: a slab of half-width `half`
/// smoothed along one axis.
fn slab(x: f64, half: f64, sigma: f64) -> f64 {
    let x = x.abs();
    normal_cdf((half - x) / sigma) - normal_cdf((-half - x) / sigma)
}

/// Ball of radius `r0` convolved with a unit 3-D Gaussian of width σ,
/// evaluated at distance `r` from the centre.
pub(crate) fn smoothed_ball(r: f64, r0: f64, sigma: f64) -> f64 {
    let s2 = SQRT_2 * sigma;
    let core = if r <= r0 {
        0.5 * (libm::erf((r0 - r) / s2) + libm::erf((r0 + r) / s2))
    } else {
        0.5 * (libm::erfc((r - r0) / s2) - libm::erfc((r + r0) / s2))
    };
    let g = (-(r0 - r).powi(2) / (2.0 * sigma * sigma)).exp();
    // σ/(r√2π)·[e^{−(R+r)²/2σ²} − e^{−(R−r)²/2σ²}], written with expm1
    let shell = if r > 1e-8 * sigma {
        sigma / (r * TAU.sqrt()) * g * (-2.0 * r0 * r / (sigma * sigma)).exp_m1()
    } else {
        -2.0 * r0 / (sigma * TAU.sqrt()) * g
    };
    core + shell
}

impl ExactField {
    fn eval(&self, q: &Vec3, sigma: f64) -> f64 {
        match self {
            Self::Sphere { radius } => smoothed_ball(q.norm(), *radius, sigma),
            Self::Box { half } => {
                slab(q.x, half.x, sigma) * slab(q.y, half.y, sigma) * slab(q.z, half.z, sigma)
            }
            Self::Cylinders { segments, radial } => {
                let d = radial.eval(q.y.hypot(q.z));
                if d == 0.0 {
                    return 0.0;
                }
                segments.iter().map(|&(c, half)| slab(q.x - c, half, sigma)).sum::<f64>() * d
            }
        }
    }
}

/// Disk of radius `R` convolved with a unit 2-D Gaussian of width σ, as a
/// function of the distance from the axis:
/// `D(ρ) = ∫₀ᴿ (r/σ²) e^{−(ρ−r)²/2σ²} I₀e(ρr/σ²) dr`.
pub(crate) struct RadialTable {
    step: f64,
    values: Vec<f64>,
}

impl RadialTable {
    const PER_SIGMA: f64 = 256.0;

    pub(crate) fn new(radius: f64, sigma: f64) -> Self {
        let step = sigma / Self::PER_SIGMA;
        let n = ((radius + 12.0 * sigma) / step).ceil() as usize + 2;
        let rule = GaussLegendre::new(16);
        let values = (0..n)
            .into_par_iter()
            .map(|i| {
                let rho = i as f64 * step;
                let a = (rho - 12.0 * sigma).max(0.0);
                let b = (rho + 12.0 * sigma).min(radius);
                if a >= b {
                    return 0.0;
                }
                let panels = ((b - a) / (0.5 * sigma)).ceil().max(1.0) as usize;
                rule.composite(
                    |r| {
                        r / (sigma * sigma)
                            * (-(rho - r).powi(2) / (2.0 * sigma * sigma)).exp()
                            * bessel_i0e(rho * r / (sigma * sigma))
                    },
                    a,
                    b,
                    panels,
                )
            })
            .collect();
        Self { step, values }
    }

    pub(crate) fn eval(&self, rho: f64) -> f64 {
        let t = rho / self.step;
        let i = t.floor() as usize;
        if i + 1 >= self.values.len() {
            return 0.0;
        }
        let f = t - i as f64;
        self.values[i] * (1.0 - f) + self.values[i + 1] * f
    }
}

/// Offsets `((m + ½)/n − ½)·h`, `m < n`, across a cell.
fn cell_offsets(n: usize, h: f64) -> impl Iterator<Item = f64> + Clone {
    (0..n).map(move |m| ((m as f64 + 0.5) / n as f64 - 0.5) * h)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `(y, z)` offsets of the rank-1 lattice `(m, m·g mod n)` whose generator
/// has the largest minimum toroidal distance. Both projections are uniform
/// `n`-point sets.
fn lattice_offsets(n: usize, h: f64) -> Vec<(f64, f64)> {
    let wrap = |d: usize| d.min(n - d);
    let g = (1..n.max(2))
        .filter(|&g| gcd(g, n) == 1)
        .max_by_key(|&g| (1..n).map(|m| wrap(m).pow(2) + wrap(m * g % n).pow(2)).min().unwrap_or(0))
        .unwrap_or(1);
    let at = |m: usize| ((m as f64 + 0.5) / n as f64 - 0.5) * h;
    (0..n).map(|m| (at(m), at(m * g % n))).collect()
}

/// Lines along grid `x` through a shape, in grid coordinates `q` with world
/// point `view·q`. Mesh triangles are binned by the `(y, z)` cell columns
/// their projections touch; analytic bodies are intersected directly.
struct RowCaster<'a> {
    shape: &'a Shape,
    view: Rotation3<f64>,
    mesh: Option<(crate::TriangleMesh, Vec<Vec<u32>>)>,
}

impl<'a> RowCaster<'a> {
    fn new(grid: &VoxelGrid, shape: &'a Shape, view: &Rotation3<f64>) -> Self {
        let mesh = shape.mesh().map(|m| {
            let f = shape.frame();
            let inv = view.inverse();
            let viewed = m.transformed(&(inv * f.rotation), &(inv * f.center));
            let [_, ny, nz] = grid.dims;
            let (origin, h) = (grid.origin, grid.spacing);
            let cell = |v: f64, o: f64, n: usize| (((v - o) / h + 0.5).floor().max(0.0) as usize).min(n - 1);
            let mut bins: Vec<Vec<u32>> = vec![Vec::new(); ny * nz];
            for t in 0..viewed.triangles().len() {
                let c = viewed.corners(t);
                let span = |a: usize| {
                    let lo = c.iter().map(|p| p[a]).fold(f64::INFINITY, f64::min);
                    let hi = c.iter().map(|p| p[a]).fold(f64::NEG_INFINITY, f64::max);
                    (lo, hi)
                };
                let ((ylo, yhi), (zlo, zhi)) = (span(1), span(2));
                for k in cell(zlo, origin.z, nz)..=cell(zhi, origin.z, nz) {
                    for j in cell(ylo, origin.y, ny)..=cell(yhi, origin.y, ny) {
                        bins[j + ny * k].push(t as u32);
                    }
                }
            }
            (viewed, bins)
        });
        Self {
            shape,
            view: *view,
            mesh,
        }
    }

    /// Inside intervals in `x` of the line `(·, y, z)`, which lies in the
    /// column of cell row `(j, k)`.
    fn intervals(&self, row: usize, y: f64, z: f64) -> Intervals {
        let origin = self.view * Vec3::new(0.0, y, z);
        let dir = self.view * Vec3::x();
        let Some((mesh, bins)) = &self.mesh else {
            return self.shape.line_intervals(&origin, &dir);
        };
        let mut xs: Vec<f64> = bins[row]
            .iter()
            .filter_map(|&t| ray_x_crossing(&mesh.corners(t as usize), y, z))
            .collect();
        xs.sort_by(f64::total_cmp);
        let mut out = pair_crossings(&xs);
        for c in self.shape.cavities() {
            if out.is_empty() {
                break;
            }
            out = subtract(&out, &c.body_line_intervals(&origin, &dir));
        }
        out
    }
}

/// Keeps sample lines off mesh edges and vertices lying on lattice planes.
fn nudge(h: f64) -> (f64, f64) {
    (0.618_033_988_7e-6 * h, 0.414_213_562_3e-6 * h)
}

/// Volume fraction of material in each cell from an `s × s × s` product
/// grid of subsamples, with grid coordinates `q` mapped to the world point
/// `view·q`.
pub(crate) fn fill_indicator_viewed(grid: &mut VoxelGrid, shape: &Shape, s: usize, view: &Rotation3<f64>) {
    let [nx, ny, _] = grid.dims;
    let (origin, h) = (grid.origin, grid.spacing);
    let caster = RowCaster::new(grid, shape, view);
    let offs = cell_offsets(s, h);
    let norm = 1.0 / (s * s * s) as f64;
    let (ny0, nz0) = nudge(h);
    grid.values.par_chunks_mut(nx * ny).enumerate().for_each(|(k, slab)| {
        for j in 0..ny {
            let row = &mut slab[nx * j..nx * (j + 1)];
            for dz in offs.clone() {
                for dy in offs.clone() {
                    let y = origin.y + j as f64 * h + dy + ny0;
                    let z = origin.z + k as f64 * h + dz + nz0;
                    for (a, b) in caster.intervals(j + ny * k, y, z) {
                        let first = (((a - origin.x) / h - 0.5).floor().max(0.0)) as usize;
                        let last = (((b - origin.x) / h + 0.5).ceil().max(0.0) as usize).min(nx - 1);
                        for (i, v) in row.iter_mut().enumerate().take(last + 1).skip(first) {
                            let xc = origin.x + i as f64 * h;
                            let inside = offs.clone().filter(|dx| (a..b).contains(&(xc + dx))).count();
                            *v += inside as f64 * norm;
                        }
                    }
                }
            }
        }
    });
}

/// `χ ⊛ G_σ` from lines along `x`. Each line is blurred exactly in `x` by
/// erf differences over its inside intervals; the `y`–`z` convolution is a
/// quadrature over `n` lines per cell placed on a rank-1 lattice.
fn convolved_field(grid: &mut VoxelGrid, shape: &Shape, sigma: f64, n: usize) {
    let [nx, ny, nz] = grid.dims;
    let (origin, h) = (grid.origin, grid.spacing);
    let caster = RowCaster::new(grid, shape, &Rotation3::identity());
    let (ny0, nz0) = nudge(h);
    let reach = (7.0 * sigma / h).ceil() as isize + 1;
    let kernel = |shift: f64| -> Vec<f64> {
        (-reach..=reach)
            .map(|m| h * normal_pdf((m as f64 * h + shift) / sigma) / sigma)
            .collect()
    };
    let mut line = vec![0.0; nx * ny * nz];
    for (dy, dz) in lattice_offsets(n, h) {
        line.par_chunks_mut(nx * ny).enumerate().for_each(|(k, slab)| {
            slab.fill(0.0);
            for j in 0..ny {
                let y = origin.y + j as f64 * h + dy + ny0;
                let z = origin.z + k as f64 * h + dz + nz0;
                let row = &mut slab[nx * j..nx * (j + 1)];
                for (a, b) in caster.intervals(j + ny * k, y, z) {
                    add_smoothed_interval(row, origin.x, h, a, b, sigma);
                }
            }
        });
        convolve_axis(&mut line, grid.dims, 1, &kernel(dy + ny0));
        convolve_axis(&mut line, grid.dims, 2, &kernel(dz + nz0));
        let w = 1.0 / n as f64;
        grid.values.par_iter_mut().zip(&line).for_each(|(v, l)| *v += w * l);
    }
}

fn normal_pdf(u: f64) -> f64 {
    (-0.5 * u * u).exp() / TAU.sqrt()
}

/// Adds `Φ((b − x)/σ) − Φ((a − x)/σ)` at the nodes `x = x0 + i·h`.
fn add_smoothed_interval(row: &mut [f64], x0: f64, h: f64, a: f64, b: f64, sigma: f64) {
    const TAIL: f64 = 9.0;
    let n = row.len() as f64;
    let index = |x: f64| ((x - x0) / h).clamp(-1.0, n);
    let lo = index(a - TAIL * sigma).ceil().max(0.0) as usize;
    let hi = index(b + TAIL * sigma).floor();
    if hi < 0.0 {
        return;
    }
    let (core_lo, core_hi) = (a + TAIL * sigma, b - TAIL * sigma);
    for (i, v) in row.iter_mut().enumerate().take(hi as usize + 1).skip(lo) {
        let x = x0 + i as f64 * h;
        *v += if core_lo < x && x < core_hi {
            1.0
        } else {
            normal_cdf((b - x) / sigma) - normal_cdf((a - x) / sigma)
        };
    }
}

/// `out[p] = Σ_m kernel[m + r]·in[p + m]` along `axis`, zero beyond the grid.
fn convolve_axis(values: &mut [f64], dims: [usize; 3], axis: usize, kernel: &[f64]) {
    let [nx, ny, _] = dims;
    let radius = (kernel.len() / 2) as isize;
    let stride = [1, nx, nx * ny][axis] as isize;
    let n = dims[axis] as isize;
    let src = values.to_vec();
    values.par_chunks_mut(nx * ny).enumerate().for_each(|(k, slab)| {
        for j in 0..ny {
            for i in 0..nx {
                let pos = [i, j, k][axis] as isize;
                let base = (i + nx * (j + ny * k)) as isize;
                let lo = (-radius).max(-pos);
                let hi = radius.min(n - 1 - pos);
                let mut acc = 0.0;
                for m in lo..=hi {
                    acc += kernel[(m + radius) as usize] * src[(base + m * stride) as usize];
                }
                slab[i + nx * j] = acc;
            }
        }
    });
}

/// `x` where the line `(·, y, z)` pierces the triangle, if it does.
fn ray_x_crossing(c: &[Vec3; 3], y: f64, z: f64) -> Option<f64> {
    let (a, b, d) = (c[0], c[1], c[2]);
    let cross = |uy: f64, uz: f64, vy: f64, vz: f64| uy * vz - uz * vy;
    let det = cross(b.y - a.y, b.z - a.z, d.y - a.y, d.z - a.z);
    if det == 0.0 {
        return None;
    }
    let u = cross(y - a.y, z - a.z, d.y - a.y, d.z - a.z) / det;
    let v = cross(b.y - a.y, b.z - a.z, y - a.y, z - a.z) / det;
    if u < 0.0 || v < 0.0 || u + v > 1.0 {
        return None;
    }
    Some(a.x + u * (b.x - a.x) + v * (d.x - a.x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::GaussLegendre;
    use crate::geometry::{build_shape, ShapeSpec, TriangleMesh};
    use crate::rel_diff;

    /// Radial oracle: ∫ over the ball of the 3-D Gaussian, reduced to
    /// `∫₀ᴿ r′² dr′ ∫ dΩ` with the angular part done analytically.
    fn ball_by_quadrature(r: f64, r0: f64, s: f64) -> f64 {
        let rule = GaussLegendre::new(32);
        let norm = 1.0 / ((TAU).sqrt() * s).powi(3);
        rule.composite(
            |rp| {
                let ang = if r == 0.0 {
                    4.0 * std::f64::consts::PI * (-(rp * rp) / (2.0 * s * s)).exp()
                } else {
                    // ∫dΩ e^{−|r−r′|²/2σ²} = 2π σ²/(r r′)·[e^{−(r−r′)²/2σ²} − e^{−(r+r′)²/2σ²}]
                    TAU * s * s / (r * rp)
                        * (-(r - rp).powi(2) / (2.0 * s * s)).exp()
                        * -(-2.0 * r * rp / (s * s)).exp_m1()
                };
                norm * rp * rp * ang
            },
            0.0,
            r0,
            64,
        )
    }

    #[test]
    fn ball_closed_form() {
        for &(r, r0) in &[(0.0, 10.0), (1e-12, 3.0), (2.5, 3.0), (3.0, 3.0), (4.0, 3.0), (10.0, 10.0), (14.0, 10.0)] {
            let got = smoothed_ball(r, r0, 1.0);
            let want = ball_by_quadrature(r, r0, 1.0);
            assert!((got - want).abs() < 1e-12, "r={r} R={r0}: {got} vs {want}");
        }
    }

    #[test]
    fn radial_table_against_disk_quadrature() {
        // direct 2-D quadrature over the disk in polar coordinates
        let (r0, s) = (3.0, 1.0);
        let t = RadialTable::new(r0, s);
        let rule = GaussLegendre::new(32);
        for &rho in &[0.0, 1.3, 3.0, 4.2, 7.0] {
            let want = rule.composite(
                |rp| {
                    rule.composite(
                        |phi| {
                            let d2 = rho * rho + rp * rp - 2.0 * rho * rp * phi.cos();
                            rp * (-d2 / (2.0 * s * s)).exp() / (TAU * s * s)
                        },
                        0.0,
                        TAU,
                        8,
                    )
                },
                0.0,
                r0,
                16,
            );
            assert!((t.eval(rho) - want).abs() < 1e-6, "ρ={rho}: {} vs {want}", t.eval(rho));
        }
    }

    #[test]
    fn sphere_centre_and_edge() {
        let sigma = 1.0;
        let shape = build_shape(&ShapeSpec::sphere(10.0)).unwrap();
        let mut opts = GridOptions::for_sigma(sigma);
        opts.padding = 5.0;
        let g = rasterize_smoothed_density(&shape, 3.0, sigma, &opts, &EdgeProfile::Step).unwrap();
        let c = g.dims.map(|n| n / 2);
        assert!((g.get(c[0], c[1], c[2]) - 3.0).abs() < 3.0 * 1e-6);
        // curvature pulls the exact surface value below ρ/2 by about σ/(R√2π)
        let surface = smoothed_ball(10.0, 10.0, sigma);
        assert!(rel_diff(surface, 0.5 - 1.0 / (10.0 * TAU.sqrt())) < 1e-6);

        opts.method = RasterMethod::NormalProfile;
        let g = rasterize_smoothed_density(&shape, 3.0, sigma, &opts, &EdgeProfile::Step).unwrap();
        // the node at x = R on the axis
        let i = ((10.0 - g.origin.x) / g.spacing).round() as usize;
        assert!(rel_diff(g.get(i, c[1], c[2]), 1.5) < 1e-2);
    }

    #[test]
    fn half_space_profile() {
        let sigma = 1.0;
        let shape = build_shape(&ShapeSpec::cuboid(200.0, 200.0, 40.0)).unwrap();
        let opts = GridOptions {
            max_cells: 1,
            ..GridOptions::for_sigma(sigma)
        };
        assert!(matches!(
            rasterize_smoothed_density(&shape, 1.0, sigma, &opts, &EdgeProfile::Step),
            Err(OracleError::GridTooLarge { .. })
        ));
        // far from the box edges the exact field is the 1-D erf step
        for &hgt in &[-2.0, -0.5, 0.0, 0.7, 3.0] {
            let q = Vec3::new(0.0, 0.0, 20.0 + hgt);
            let v = ExactField::Box { half: Vec3::new(100.0, 100.0, 20.0) }.eval(&q, sigma);
            assert!((v - normal_cdf(-hgt / sigma)).abs() < 1e-14);
        }
    }

    #[test]
    fn convolved_matches_exact() {
        let sigma = 1.0;
        let shape = build_shape(&ShapeSpec::sphere(4.0).with_center(Vec3::new(0.1, 0.2, -0.3))).unwrap();
        let mut opts = GridOptions::for_sigma(sigma);
        opts.spacing = 0.25;
        opts.supersample = 4;
        let exact = rasterize_smoothed_density(&shape, 1.0, sigma, &opts, &EdgeProfile::Step).unwrap();
        opts.method = RasterMethod::Convolved;
        let conv = rasterize_smoothed_density(&shape, 1.0, sigma, &opts, &EdgeProfile::Step).unwrap();
        let err = exact
            .values
            .iter()
            .zip(&conv.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 3e-3, "max deviation {err}");

        let mesh = TriangleMesh::icosphere(4.0, 5).translated(&Vec3::new(0.1, 0.2, -0.3));
        let mshape = build_shape(&ShapeSpec::mesh(&mesh)).unwrap();
        opts.method = RasterMethod::Auto;
        let meshed = rasterize_smoothed_density(&mshape, 1.0, sigma, &opts, &EdgeProfile::Step).unwrap();
        assert_eq!(meshed.dims, exact.dims);
        let err = exact
            .values
            .iter()
            .zip(&meshed.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 5e-3, "mesh max deviation {err}");
    }

    #[test]
    fn ramp_profile_midpoint_and_width() {
        let sigma = 1.0;
        let shape = build_shape(&ShapeSpec::cuboid(60.0, 60.0, 20.0)).unwrap();
        let opts = GridOptions::for_sigma(sigma);
        let step = rasterize_smoothed_density(&shape, 1.0, sigma, &opts, &EdgeProfile::Step).unwrap();
        let ramp = rasterize_smoothed_density(&shape, 1.0, sigma, &opts, &EdgeProfile::linear_ramp(sigma)).unwrap();
        let c = step.dims.map(|n| n / 2);
        let k_surface = ((10.0 - step.origin.z) / step.spacing).round() as usize;
        assert!((ramp.get(c[0], c[1], k_surface) - 0.5).abs() < 1e-12);
        // one σ outside the surface the ramp leaks more material than the step
        let k_out = k_surface + 2;
        assert!(ramp.get(c[0], c[1], k_out) > step.get(c[0], c[1], k_out));
        let mesh = build_shape(&ShapeSpec::mesh(&TriangleMesh::cuboid(Vec3::repeat(4.0)))).unwrap();
        assert!(matches!(
            rasterize_smoothed_density(&mesh, 1.0, sigma, &opts, &EdgeProfile::linear_ramp(sigma)),
            Err(OracleError::UnsupportedProfile(_))
        ));
    }

    #[test]
    fn spacing_cap() {
        let shape = build_shape(&ShapeSpec::sphere(4.0)).unwrap();
        let opts = GridOptions {
            spacing: 0.6,
            ..GridOptions::for_sigma(1.0)
        };
        assert!(matches!(
            rasterize_smoothed_density(&shape, 1.0, 1.0, &opts, &EdgeProfile::Step),
            Err(OracleError::SpacingTooCoarse { .. })
        ));
    }
}
