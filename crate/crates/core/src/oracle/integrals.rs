use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::fft::{fft3_forward, smooth_size, wavenumber};
use super::grid::VoxelGrid;
use super::OracleError;
use crate::csl::CslParams;
use crate::tensors::SymTensor3;
use crate::Vec3;

/// Eighth-order central first-derivative weights for offsets 1..=4.
const D8: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];

/// `(2π)³ ∫ ∇μ_σ∘∇μ_σ dr` (kg²/m⁵) from an eighth-order central-difference
/// gradient. The four outermost node layers, where the stencil does not
/// fit, are skipped; the padding keeps the field there negligible.
pub fn gradient_outer_integral(grid: &VoxelGrid) -> SymTensor3 {
    let [nx, ny, nz] = grid.dims;
    if nx < 9 || ny < 9 || nz < 9 {
        return SymTensor3::zero();
    }
    let h = grid.spacing;
    let v = &grid.values;
    let (sy, sz) = (nx, nx * ny);
    let partial: Vec<SymTensor3> = (4..nz - 4)
        .into_par_iter()
        .map(|k| {
            let mut acc = SymTensor3::zero();
            for j in 4..ny - 4 {
                let row = nx * (j + ny * k);
                for i in 4..nx - 4 {
                    let c = row + i;
                    let mut g = Vec3::zeros();
                    for (m, w) in D8.iter().enumerate() {
                        let o = m + 1;
                        g.x += w * (v[c + o] - v[c - o]);
                        g.y += w * (v[c + o * sy] - v[c - o * sy]);
                        g.z += w * (v[c + o * sz] - v[c - o * sz]);
                    }
                    acc += SymTensor3::outer(&g, 1.0);
                }
            }
            acc
        })
        .collect();
    // (∇μ)² carries 1/h², the volume element h³
    let scale = (2.0 * PI).powi(3) * h;
    partial.into_iter().sum::<SymTensor3>() * scale
}

/// `(2π)³ρ²/(2√π σ) · S`: the sharp-edge surface reduction of the gradient
/// integral.
pub fn surface_formula_outer_integral(s: &SymTensor3, density: f64, sigma: f64) -> SymTensor3 {
    *s * ((2.0 * PI).powi(3) * density * density / (2.0 * PI.sqrt() * sigma))
}

/// `λσ³/(π^{3/2} m_N²)`, the real-space prefactor of the decoherence
/// function.
fn real_space_prefactor(p: &CslParams) -> f64 {
    p.lambda * p.sigma.powi(3) / (PI.powf(1.5) * p.nucleon_mass * p.nucleon_mass)
}

/// Evaluates `F(Δ)` for many shifts of one grid.
///
/// The field is zero-padded and Fourier transformed once. Then
/// `∫[μ² − μ(r)μ(r+Δ)] dr = h³/N · Σ_k |μ̂_k|²·2sin²(k·Δ/2)`, which shifts
/// the band-limited field exactly instead of interpolating it.
pub struct DecoherenceEvaluator {
    power: Vec<f64>,
    k: [Vec<f64>; 3],
    spacing: f64,
    padding: f64,
    sum_sq: f64,
}

impl DecoherenceEvaluator {
    pub fn new(grid: &VoxelGrid) -> Self {
        let h = grid.spacing;
        let extra = (grid.padding / h).ceil() as usize + 2;
        let n = grid.dims.map(|d| smooth_size(d + extra));
        let mut data = vec![Complex64::default(); n[0] * n[1] * n[2]];
        let [gx, gy, gz] = grid.dims;
        for k in 0..gz {
            for j in 0..gy {
                for i in 0..gx {
                    data[i + n[0] * (j + n[1] * k)] = Complex64::new(grid.get(i, j, k), 0.0);
                }
            }
        }
        fft3_forward(&mut data, n);
        let power = data.into_iter().map(|c| c.norm_sqr()).collect();
        let k = [0, 1, 2].map(|a| (0..n[a]).map(|m| wavenumber(m, n[a], h)).collect());
        let sum_sq = grid.values.iter().map(|v| v * v).sum();
        Self {
            power,
            k,
            spacing: h,
            padding: grid.padding,
            sum_sq,
        }
    }

    /// `∫[μ² − μ(r)μ(r+Δ)] dr` in kg²/m³.
    pub fn overlap_deficit(&self, delta: &Vec3) -> Result<f64, OracleError> {
        if let Some(&d) = delta.iter().find(|d| !(d.abs() <= self.padding)) {
            return Err(OracleError::ShiftOutOfGrid {
                shift: d,
                padding: self.padding,
            });
        }
        let [kx, ky, kz] = &self.k;
        let (nx, ny) = (kx.len(), ky.len());
        let partial: Vec<f64> = (0..kz.len())
            .into_par_iter()
            .map(|c| {
                let pz = kz[c] * delta.z;
                let mut acc = 0.0;
                for b in 0..ny {
                    let pyz = pz + ky[b] * delta.y;
                    let base = nx * (b + ny * c);
                    for a in 0..nx {
                        let s = (0.5 * (kx[a] * delta.x + pyz)).sin();
                        acc += self.power[base + a] * 2.0 * s * s;
                    }
                }
                acc
            })
            .collect();
        let n = self.power.len() as f64;
        Ok(self.spacing.powi(3) / n * partial.iter().sum::<f64>())
    }

    /// `F(Δ) = (λσ³/π^{3/2}m_N²)(2π)³ ∫[μ² − μ(r)μ(r+Δ)] dr`, 1/s.
    pub fn eval(&self, delta: &Vec3, p: &CslParams) -> Result<f64, OracleError> {
        Ok(real_space_prefactor(p) * (2.0 * PI).powi(3) * self.overlap_deficit(delta)?)
    }

    /// The large-shift limit `(λσ³/π^{3/2}m_N²)(2π)³ ∫μ² dr`.
    pub fn saturation(&self, p: &CslParams) -> f64 {
        real_space_prefactor(p) * (2.0 * PI).powi(3) * self.spacing.powi(3) * self.sum_sq
    }
}

/// Single-shift convenience over [`DecoherenceEvaluator`].
pub fn decoherence_function(grid: &VoxelGrid, delta: &Vec3, p: &CslParams) -> Result<f64, OracleError> {
    if let Some(&d) = delta.iter().find(|d| !(d.abs() <= grid.padding)) {
        return Err(OracleError::ShiftOutOfGrid {
            shift: d,
            padding: grid.padding,
        });
    }
    if delta.norm() == 0.0 {
        return Ok(0.0);
    }
    DecoherenceEvaluator::new(grid).eval(delta, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rel_diff;

    fn gaussian_blob(n: usize, h: f64, s: f64) -> VoxelGrid {
        let c = (n - 1) as f64 * 0.5 * h;
        let mut g = VoxelGrid::zeros(Vec3::repeat(-c), h, [n, n, n], c - 6.0 * s);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    let r2 = g.point(i, j, k).norm_squared();
                    let idx = g.index(i, j, k);
                    g.values[idx] = (-r2 / (2.0 * s * s)).exp();
                }
            }
        }
        g
    }

    #[test]
    fn constant_field_has_no_gradient() {
        let mut g = VoxelGrid::zeros(Vec3::zeros(), 0.1, [12, 12, 12], 0.0);
        g.values.iter_mut().for_each(|v| *v = 7.0);
        assert_eq!(gradient_outer_integral(&g), SymTensor3::zero());
    }

    #[test]
    fn gaussian_gradient_integral() {
        // ∫ (∂x e^{−r²/2s²})² d³r = π^{3/2} s / 2; stencil error falls as h⁸
        let s = 1.0;
        let want = (2.0 * PI).powi(3) * PI.powf(1.5) * s / 2.0;
        let coarse = gradient_outer_integral(&gaussian_blob(61, 0.5, s));
        let fine = gradient_outer_integral(&gaussian_blob(121, 0.25, s));
        assert!(rel_diff(coarse.xx, want) < 1e-3, "{} vs {want}", coarse.xx);
        assert!(rel_diff(fine.xx, want) < 1e-5, "{} vs {want}", fine.xx);
        assert!(coarse.xy.abs() < 1e-10 * want);
    }

    #[test]
    fn spectral_shift_of_gaussian() {
        // ∫ e^{−r²/2s²} e^{−|r+Δ|²/2s²} = π^{3/2} s³ e^{−Δ²/4s²}
        let s = 1.0;
        let g = gaussian_blob(61, 0.5, s);
        let ev = DecoherenceEvaluator::new(&g);
        let d = Vec3::new(0.3, -0.7, 1.1);
        let want = PI.powf(1.5) * s.powi(3) * (1.0 - (-d.norm_squared() / (4.0 * s * s)).exp());
        assert!(rel_diff(ev.overlap_deficit(&d).unwrap(), want) < 1e-10);
        let back = ev.overlap_deficit(&-d).unwrap();
        assert!(rel_diff(back, ev.overlap_deficit(&d).unwrap()) < 1e-10);
        assert_eq!(ev.overlap_deficit(&Vec3::zeros()).unwrap(), 0.0);
        assert!(matches!(
            ev.overlap_deficit(&Vec3::new(100.0, 0.0, 0.0)),
            Err(OracleError::ShiftOutOfGrid { .. })
        ));
    }

    #[test]
    fn surface_formula_scale() {
        let s = SymTensor3::isotropic(2.0);
        let out = surface_formula_outer_integral(&s, 3.0, 0.5);
        let want = (2.0 * PI).powi(3) * 9.0 / (2.0 * PI.sqrt() * 0.5) * 2.0;
        assert!(rel_diff(out.yy, want) < 1e-15);
    }
}
