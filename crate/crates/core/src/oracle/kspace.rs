//! `∫ e^{−k²σ²} |μ_k|² k∘k dk` by quadrature over wavevectors.
//!
//! Spheres, boxes and (gapped) cylinders without cavities use their closed
//! form factors, reducing the integral to one-dimensional radial or
//! Cartesian quadratures. Every other body goes through a discrete Fourier
//! transform of its supersampled indicator.

use std::f64::consts::PI;

use nalgebra::Rotation3;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::fft::{fft3_forward, smooth_size, wavenumber};
use super::raster::{fill_indicator_viewed, layout_viewed, DEFAULT_MAX_CELLS};
use super::OracleError;
use crate::gauss::integrate_adaptive;
use crate::geometry::{Body, Shape};
use crate::special::{jinc, sinc};
use crate::tensors::SymTensor3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KspaceOptions {
    /// Wavenumber cutoff in units of 1/σ; the weight there is `e^{−cutoff²}`.
    pub cutoff: f64,
    /// Relative tolerance of the adaptive one-dimensional quadratures.
    pub tolerance: f64,
    /// Indicator spacing of the transform route, in units of σ.
    pub fft_spacing: f64,
    pub supersample: usize,
    pub max_cells: usize,
    /// Use the transform route even where a form factor is known.
    pub force_fft: bool,
}

impl Default for KspaceOptions {
    fn default() -> Self {
        Self {
            cutoff: 8.0,
            tolerance: 1e-4,
            fft_spacing: 0.25,
            supersample: 4,
            max_cells: DEFAULT_MAX_CELLS,
            force_fft: false,
        }
    }
}

/// `∫ e^{−k²σ²} |μ_k|² k∘k dk` (kg²/m⁵) with default options. Equal to
/// `(2π)³ ∫ ∇μ_σ∘∇μ_σ dr`.
pub fn kspace_outer_integral(shape: &Shape, density: f64, sigma: f64) -> Result<SymTensor3, OracleError> {
    kspace_outer_integral_with(shape, density, sigma, &KspaceOptions::default())
}

pub fn kspace_outer_integral_with(
    shape: &Shape,
    density: f64,
    sigma: f64,
    opts: &KspaceOptions,
) -> Result<SymTensor3, OracleError> {
    if !(density.is_finite() && density > 0.0) {
        return Err(OracleError::InvalidInput(format!("density must be positive, got {density}")));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(OracleError::InvalidInput(format!("σ must be positive, got {sigma}")));
    }
    if !(opts.cutoff > 0.0 && opts.tolerance > 0.0 && opts.fft_spacing > 0.0 && opts.supersample > 0) {
        return Err(OracleError::InvalidInput(format!("invalid k-space options {opts:?}")));
    }
    let kc = opts.cutoff / sigma;
    let analytic = if opts.force_fft || !shape.cavities().is_empty() {
        None
    } else {
        analytic_local(&shape.body, sigma, kc, opts.tolerance)?
    };
    match analytic {
        Some(local) => Ok(local.rotated(&shape.frame().rotation) * (density * density)),
        None => fft_route(shape, density, sigma, opts),
    }
}

/// `∫ e^{−k²σ²} |χ_k|² k∘k dk` in the body frame, for bodies with known form
/// factors.
fn analytic_local(body: &Body, sigma: f64, kc: f64, tol: f64) -> Result<Option<SymTensor3>, OracleError> {
    let gauss = |k: f64| (-(k * sigma).powi(2)).exp();
    let panels = |size: f64| (kc * size / PI).ceil() as usize + 8;
    Ok(Some(match *body {
        Body::Sphere { radius } => {
            let form = |k: f64| 4.0 * PI * radius.powi(3) * sphere_form(k * radius);
            let radial = integrate_adaptive(|k| k.powi(4) * gauss(k) * form(k).powi(2), 0.0, kc, tol, panels(radius))?;
            SymTensor3::isotropic(4.0 * PI / 3.0 * radial)
        }
        Body::Cuboid { size } => {
            let mut a = [0.0; 3];
            let mut b = [0.0; 3];
            for i in 0..3 {
                let s = size[i];
                let f = |k: f64| (s * sinc(0.5 * k * s)).powi(2) * gauss(k);
                a[i] = 2.0 * integrate_adaptive(f, 0.0, kc, tol, panels(s))?;
                b[i] = 2.0 * integrate_adaptive(|k| k * k * f(k), 0.0, kc, tol, panels(s))?;
            }
            SymTensor3::diagonal(crate::Vec3::new(b[0] * a[1] * a[2], a[0] * b[1] * a[2], a[0] * a[1] * b[2]))
        }
        Body::Cylinder { radius, length } => cylinder_local(radius, &[(0.0, length)], length, gauss, tol, kc)?,
        Body::Gapped {
            radius,
            length,
            gaps,
            gap_width,
        } => cylinder_local(
            radius,
            &Body::gapped_segments(length, gaps, gap_width),
            length,
            gauss,
            tol,
            kc,
        )?,
        _ => return Ok(None),
    }))
}

/// Axial segments `(centre, length)` along local x, common radius.
fn cylinder_local<G: Fn(f64) -> f64 + Copy>(
    radius: f64,
    segments: &[(f64, f64)],
    length: f64,
    gauss: G,
    tol: f64,
    kc: f64,
) -> Result<SymTensor3, OracleError> {
    let axial = |k: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for &(c, l) in segments {
            let f = l * sinc(0.5 * k * l);
            re += f * (k * c).cos();
            im -= f * (k * c).sin();
        }
        (re * re + im * im) * gauss(k)
    };
    let disk = |k: f64| (PI * radius * radius * jinc(k * radius)).powi(2) * gauss(k);
    let ax_panels = (kc * length / PI).ceil() as usize + 8;
    let rad_panels = (kc * radius / PI).ceil() as usize + 8;
    let ca = 2.0 * integrate_adaptive(axial, 0.0, kc, tol, ax_panels)?;
    let cb = 2.0 * integrate_adaptive(|k| k * k * axial(k), 0.0, kc, tol, ax_panels)?;
    let d0 = 2.0 * PI * integrate_adaptive(|k| k * disk(k), 0.0, kc, tol, rad_panels)?;
    let d2 = 2.0 * PI * integrate_adaptive(|k| k.powi(3) * disk(k), 0.0, kc, tol, rad_panels)?;
    Ok(SymTensor3::diagonal(crate::Vec3::new(cb * d0, 0.5 * ca * d2, 0.5 * ca * d2)))
}

/// `(sin x − x cos x)/x³`, the ball form factor over `4πR³`.
fn sphere_form(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        let x2 = x * x;
        1.0 / 3.0 - x2 / 30.0 + x2 * x2 / 840.0 - x2 * x2 * x2 / 45360.0
    } else {
        (x.sin() - x * x.cos()) / x.powi(3)
    }
}

/// Transform of the supersampled indicator on a grid padded so that the
/// autocorrelation does not wrap. The subsample average is divided out of
/// each coefficient.
fn fft_route(shape: &Shape, density: f64, sigma: f64, opts: &KspaceOptions) -> Result<SymTensor3, OracleError> {
    let h = opts.fft_spacing * sigma;
    // A lattice in generic orientation keeps plane faces off the subsample
    // rows, so the volume-fraction quantisation averages out over each face.
    let view = Rotation3::from_euler_angles(0.5, 0.8, 1.3);
    let mut grid = layout_viewed(shape, &view, h, 2.0 * h, opts.max_cells)?;
    fill_indicator_viewed(&mut grid, shape, opts.supersample, &view);
    let extra = (12.0 * sigma / h).ceil() as usize;
    let n = grid.dims.map(|d| smooth_size(2 * d + extra));
    let requested = n[0].saturating_mul(n[1]).saturating_mul(n[2]);
    if requested > opts.max_cells {
        return Err(OracleError::GridTooLarge {
            requested,
            cap: opts.max_cells,
        });
    }
    let mut data = vec![Complex64::default(); requested];
    let [gx, gy, gz] = grid.dims;
    for k in 0..gz {
        for j in 0..gy {
            for i in 0..gx {
                data[i + n[0] * (j + n[1] * k)] = Complex64::new(grid.get(i, j, k), 0.0);
            }
        }
    }
    drop(grid);
    fft3_forward(&mut data, n);

    let s = opts.supersample as f64;
    let axis = |a: usize| -> Vec<(f64, f64)> {
        (0..n[a])
            .map(|m| {
                let k = wavenumber(m, n[a], h);
                let t = if k == 0.0 { 1.0 } else { (0.5 * k * h).sin() / (s * (0.5 * k * h / s).sin()) };
                (k, (-(k * sigma).powi(2)).exp() / (t * t))
            })
            .collect()
    };
    let (ax, ay, az) = (axis(0), axis(1), axis(2));
    let (nx, ny) = (n[0], n[1]);
    let kc2 = (opts.cutoff / sigma).powi(2);
    let total: SymTensor3 = az
        .par_iter()
        .enumerate()
        .map(|(c, &(kz, wz))| {
            let mut acc = SymTensor3::zero();
            for (b, &(ky, wy)) in ay.iter().enumerate() {
                let base = nx * (b + ny * c);
                for (a, &(kx, wx)) in ax.iter().enumerate() {
                    if kx * kx + ky * ky + kz * kz > kc2 {
                        continue;
                    }
                    let w = wx * wy * wz * data[base + a].norm_sqr();
                    acc += SymTensor3::outer(&crate::Vec3::new(kx, ky, kz), w);
                }
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    // χ_k ≈ h³·DFT; the sum over modes carries (Δk)³ = (2π)³/(N h³)
    let dk3 = (2.0 * PI).powi(3) / (requested as f64 * h.powi(3));
    Ok((total * (density * density * h.powi(6) * dk3)).rotated(&view))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_shape, ShapeSpec};
    use crate::rel_diff;
    use crate::Vec3;

    #[test]
    fn sphere_form_series_continuity() {
        for x in [0.0099f64, 0.01, 0.0101] {
            let direct = (x.sin() - x * x.cos()) / x.powi(3);
            assert!((sphere_form(x) - direct).abs() < 1e-8);
        }
    }

    #[test]
    fn large_sigma_limit() {
        // For σ ≫ size, |μ_k|² → M² and the integral tends to M²π^{3/2}/(2σ⁵) δ.
        let sigma = 1.0;
        for spec in [ShapeSpec::sphere(0.01), ShapeSpec::cuboid(0.01, 0.015, 0.02), ShapeSpec::cylinder(0.01, 0.02)] {
            let shape = build_shape(&spec).unwrap();
            let m = shape.mass_properties(1.0).unwrap().mass;
            let k = kspace_outer_integral(&shape, 1.0, sigma).unwrap();
            let want = m * m * PI.powf(1.5) / (2.0 * sigma.powi(5));
            for i in 0..3 {
                assert!(rel_diff(k.get(i, i), want) < 1e-3, "{spec:?}");
            }
        }
    }

    #[test]
    fn cylinder_as_gapped_without_gaps() {
        let plain = build_shape(&ShapeSpec::cylinder(3.0, 9.0)).unwrap();
        let gapped = build_shape(&ShapeSpec::gapped_cylinder(3.0, 9.0, 0, 0.0)).unwrap();
        let a = kspace_outer_integral(&plain, 1.0, 1.0).unwrap();
        let b = kspace_outer_integral(&gapped, 1.0, 1.0).unwrap();
        assert!(a.rel_diff(&b) < 1e-12);
    }

    #[test]
    fn rotation_follows_frame() {
        let axis = Vec3::new(1.0, 2.0, -0.5);
        let base = build_shape(&ShapeSpec::cylinder(2.0, 6.0)).unwrap();
        let turned = build_shape(&ShapeSpec::cylinder(2.0, 6.0).with_axis(axis)).unwrap();
        let a = kspace_outer_integral(&base, 1.0, 1.0).unwrap();
        let b = kspace_outer_integral(&turned, 1.0, 1.0).unwrap();
        assert!(a.rotated(&turned.frame().rotation).rel_diff(&b) < 1e-12);
        let u = axis.normalize();
        assert!(rel_diff(b.quadratic_form(&u), a.xx) < 1e-12);
    }

    #[test]
    fn transform_route_matches_form_factors() {
        let opts = KspaceOptions {
            force_fft: true,
            ..KspaceOptions::default()
        };
        for spec in [
            ShapeSpec::sphere(4.0),
            ShapeSpec::cuboid(3.0, 5.0, 4.0),
            ShapeSpec::cuboid(3.1, 5.07, 4.03),
            ShapeSpec::cylinder(2.0, 6.0).with_axis(Vec3::new(0.3, 1.0, 0.2)),
        ] {
            let shape = build_shape(&spec).unwrap();
            let exact = kspace_outer_integral(&shape, 1.0, 1.0).unwrap();
            let fft = kspace_outer_integral_with(&shape, 1.0, 1.0, &opts).unwrap();
            assert!(exact.rel_diff(&fft) < 2e-3, "{spec:?}: {exact:?} vs {fft:?}");
        }
    }

    #[test]
    fn grid_cap() {
        let shape = build_shape(&ShapeSpec::sphere(50.0)).unwrap();
        let opts = KspaceOptions {
            force_fft: true,
            max_cells: 1000,
            ..KspaceOptions::default()
        };
        assert!(matches!(
            kspace_outer_integral_with(&shape, 1.0, 1.0, &opts),
            Err(OracleError::GridTooLarge { .. })
        ));
    }
}
