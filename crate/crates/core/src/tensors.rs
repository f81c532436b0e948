//! Translational and rotational surface tensors of a patch decomposition.
//!
//! Reductions run over fixed-size chunks in parallel and combine the chunk
//! sums in order, so results do not depend on the thread count.

use std::ops::{Add, AddAssign, Mul, Sub};

use nalgebra::Rotation3;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::geometry::{Patch, SurfacePatches};
use crate::{Mat3, Vec3};

const CHUNK: usize = 4096;

/// Relative eigenvalue tolerance for positive semidefiniteness.
pub const PSD_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum TensorError {
    #[error("rotation axis must be a unit vector, |n| = {0}")]
    NonUnitAxis(f64),
}

/// Symmetric 3×3 tensor stored by its six independent components.
///
/// Serialised as a nested 3×3 array.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymTensor3 {
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
    pub xy: f64,
    pub xz: f64,
    pub yz: f64,
}

impl SymTensor3 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn diagonal(d: Vec3) -> Self {
        Self {
            xx: d.x,
            yy: d.y,
            zz: d.z,
            ..Self::default()
        }
    }

    pub fn isotropic(value: f64) -> Self {
        Self::diagonal(Vec3::repeat(value))
    }

    /// `w · v∘v`.
    pub fn outer(v: &Vec3, w: f64) -> Self {
        Self {
            xx: w * v.x * v.x,
            yy: w * v.y * v.y,
            zz: w * v.z * v.z,
            xy: w * v.x * v.y,
            xz: w * v.x * v.z,
            yz: w * v.y * v.z,
        }
    }

    /// Symmetric part of `m`.
    pub fn from_matrix(m: &Mat3) -> Self {
        Self {
            xx: m[(0, 0)],
            yy: m[(1, 1)],
            zz: m[(2, 2)],
            xy: 0.5 * (m[(0, 1)] + m[(1, 0)]),
            xz: 0.5 * (m[(0, 2)] + m[(2, 0)]),
            yz: 0.5 * (m[(1, 2)] + m[(2, 1)]),
        }
    }

    pub fn to_matrix(&self) -> Mat3 {
        Mat3::new(
            self.xx, self.xy, self.xz, //
            self.xy, self.yy, self.yz, //
            self.xz, self.yz, self.zz,
        )
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.to_matrix()[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy + self.zz
    }

    /// `v · T · v`.
    pub fn quadratic_form(&self, v: &Vec3) -> f64 {
        v.x * v.x * self.xx
            + v.y * v.y * self.yy
            + v.z * v.z * self.zz
            + 2.0 * (v.x * v.y * self.xy + v.x * v.z * self.xz + v.y * v.z * self.yz)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.to_matrix().norm()
    }

    /// `‖self − other‖_F / max(‖self‖_F, ‖other‖_F)`, zero when both vanish.
    pub fn rel_diff(&self, other: &Self) -> f64 {
        let scale = self.frobenius_norm().max(other.frobenius_norm());
        if scale == 0.0 {
            0.0
        } else {
            (*self - *other).frobenius_norm() / scale
        }
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 3] {
        let e = self.to_matrix().symmetric_eigenvalues();
        let mut v = [e[0], e[1], e[2]];
        v.sort_by(f64::total_cmp);
        v
    }

    /// Eigenvalues ascending with unit eigenvectors as matching columns.
    pub fn eigen(&self) -> ([f64; 3], Mat3) {
        let eig = self.to_matrix().symmetric_eigen();
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let axes = Mat3::from_columns(&order.map(|i| eig.eigenvectors.column(i).into_owned()));
        (order.map(|i| eig.eigenvalues[i]), axes)
    }

    /// All eigenvalues ≥ −[`PSD_TOLERANCE`]·|trace|.
    pub fn is_psd(&self) -> bool {
        let floor = -PSD_TOLERANCE * self.trace().abs();
        self.eigenvalues()[0] >= floor
    }

    /// Clamps eigenvalues within the PSD tolerance of zero up to zero.
    /// Larger negative eigenvalues are left alone.
    pub fn clamp_psd(&self) -> Self {
        let (vals, axes) = self.eigen();
        let floor = -PSD_TOLERANCE * self.trace().abs();
        if vals[0] >= 0.0 || vals[0] < floor {
            return *self;
        }
        let clamped = vals.map(|v| if v < 0.0 && v >= floor { 0.0 } else { v });
        Self::from_matrix(&(axes * Mat3::from_diagonal(&Vec3::from(clamped)) * axes.transpose()))
    }

    /// `R T Rᵀ`.
    pub fn rotated(&self, rotation: &Rotation3<f64>) -> Self {
        let r = rotation.matrix();
        Self::from_matrix(&(r * self.to_matrix() * r.transpose()))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        *self * factor
    }
}

impl Add for SymTensor3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            xx: self.xx + o.xx,
            yy: self.yy + o.yy,
            zz: self.zz + o.zz,
            xy: self.xy + o.xy,
            xz: self.xz + o.xz,
            yz: self.yz + o.yz,
        }
    }
}

impl AddAssign for SymTensor3 {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for SymTensor3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + o * -1.0
    }
}

impl Mul<f64> for SymTensor3 {
    type Output = Self;
    fn mul(self, f: f64) -> Self {
        Self {
            xx: self.xx * f,
            yy: self.yy * f,
            zz: self.zz * f,
            xy: self.xy * f,
            xz: self.xz * f,
            yz: self.yz * f,
        }
    }
}

impl std::iter::Sum for SymTensor3 {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), Add::add)
    }
}

impl Serialize for SymTensor3 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows = [
            [self.xx, self.xy, self.xz],
            [self.xy, self.yy, self.yz],
            [self.xz, self.yz, self.zz],
        ];
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymTensor3 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = <[[f64; 3]; 3]>::deserialize(d)?;
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            if rows[i][j] != rows[j][i] {
                return Err(serde::de::Error::custom(format!(
                    "tensor is not symmetric at ({i}, {j})"
                )));
            }
        }
        Ok(Self {
            xx: rows[0][0],
            yy: rows[1][1],
            zz: rows[2][2],
            xy: rows[0][1],
            xz: rows[0][2],
            yz: rows[1][2],
        })
    }
}

fn reduce<T, F>(patches: &[Patch], zero: T, f: F) -> T
where
    T: Send + Sync + Copy + Add<Output = T>,
    F: Fn(&Patch) -> T + Sync,
{
    let partial: Vec<T> = patches
        .par_chunks(CHUNK)
        .map(|c| c.iter().fold(zero, |acc, p| acc + f(p)))
        .collect();
    partial.into_iter().fold(zero, Add::add)
}

/// `S = ∮ n∘n dS`, m².
pub fn surface_tensor(patches: &SurfacePatches) -> SymTensor3 {
    reduce(&patches.patches, SymTensor3::zero(), |p| SymTensor3::outer(&p.normal, p.weight))
}

/// `S_rot = ∮ (r×n)∘(r×n) dS` with `r` measured from `origin`, m⁴.
pub fn rotational_surface_tensor(patches: &SurfacePatches, origin: &Vec3) -> SymTensor3 {
    reduce(&patches.patches, SymTensor3::zero(), |p| {
        SymTensor3::outer(&(p.point - origin).cross(&p.normal), p.weight)
    })
}

/// `∮ [r, n, a]² dS` for a unit axis `a`, accumulated directly from the
/// triple product rather than through [`rotational_surface_tensor`].
pub fn axial_rotational_strength(
    patches: &SurfacePatches,
    origin: &Vec3,
    axis: &Vec3,
) -> Result<f64, TensorError> {
    let norm = axis.norm();
    if !((norm - 1.0).abs() <= 1e-12) {
        return Err(TensorError::NonUnitAxis(norm));
    }
    Ok(reduce(&patches.patches, 0.0, |p| {
        let t = (p.point - origin).dot(&p.normal.cross(axis));
        t * t * p.weight
    }))
}
