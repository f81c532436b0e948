use std::io::{BufRead, BufReader, Read, Write};

use super::OracleError;
use crate::Vec3;

const MAGIC: &str = "csl-voxel-grid 1";

/// Scalar field sampled at the nodes `origin + h·(i, j, k)`, x fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    pub origin: Vec3,
    pub spacing: f64,
    pub dims: [usize; 3],
    /// Distance from the body's bounding box to the grid edge on every side.
    pub padding: f64,
    pub values: Vec<f64>,
}

impl VoxelGrid {
    pub fn zeros(origin: Vec3, spacing: f64, dims: [usize; 3], padding: f64) -> Self {
        Self {
            origin,
            spacing,
            dims,
            padding,
            values: vec![0.0; dims[0] * dims[1] * dims[2]],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.index(i, j, k)]
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.origin + Vec3::new(i as f64, j as f64, k as f64) * self.spacing
    }

    /// `Σ v·h³`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spacing.powi(3)
    }

    /// Largest absolute value on the six outer faces.
    pub fn max_boundary_value(&self) -> f64 {
        let [nx, ny, nz] = self.dims;
        let mut m: f64 = 0.0;
        for k in 0..nz {
            for j in 0..ny {
                let row = &self.values[self.index(0, j, k)..self.index(0, j, k) + nx];
                if j == 0 || k == 0 || j + 1 == ny || k + 1 == nz {
                    m = row.iter().fold(m, |a, v| a.max(v.abs()));
                } else {
                    m = m.max(row[0].abs()).max(row[nx - 1].abs());
                }
            }
        }
        m
    }

    /// Text header followed by the values as little-endian `f64`.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let [nx, ny, nz] = self.dims;
        let o = self.origin;
        writeln!(w, "{MAGIC}")?;
        writeln!(w, "dims {nx} {ny} {nz}")?;
        writeln!(w, "spacing {}", self.spacing)?;
        writeln!(w, "origin {} {} {}", o.x, o.y, o.z)?;
        writeln!(w, "padding {}", self.padding)?;
        writeln!(w, "data f64le")?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self, OracleError> {
        let mut r = BufReader::new(r);
        let mut line = String::new();
        let mut next = |r: &mut BufReader<R>| -> Result<Vec<String>, OracleError> {
            line.clear();
            r.read_line(&mut line)?;
            Ok(line.split_whitespace().map(str::to_string).collect())
        };
        let bad = |m: &str| OracleError::Parse(format!("voxel grid header: {m}"));
        if next(&mut r)?.join(" ") != MAGIC {
            return Err(bad("missing magic line"));
        }
        let nums = |t: &[String], key: &str, n: usize| -> Result<Vec<f64>, OracleError> {
            if t.first().map(String::as_str) != Some(key) || t.len() != n + 1 {
                return Err(bad(&format!("expected '{key}' with {n} values")));
            }
            t[1..]
                .iter()
                .map(|s| s.parse::<f64>().map_err(|_| bad(&format!("bad number '{s}'"))))
                .collect()
        };
        let d = nums(&next(&mut r)?, "dims", 3)?;
        let spacing = nums(&next(&mut r)?, "spacing", 1)?[0];
        let o = nums(&next(&mut r)?, "origin", 3)?;
        let padding = nums(&next(&mut r)?, "padding", 1)?[0];
        if next(&mut r)? != ["data", "f64le"] {
            return Err(bad("expected 'data f64le'"));
        }
        let dims = [d[0] as usize, d[1] as usize, d[2] as usize];
        let n = dims[0] * dims[1] * dims[2];
        let mut bytes = Vec::with_capacity(8 * n);
        r.read_to_end(&mut bytes)?;
        if bytes.len() != 8 * n {
            return Err(OracleError::Parse(format!(
                "voxel grid has {} data bytes, expected {}",
                bytes.len(),
                8 * n
            )));
        }
        let values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self {
            origin: Vec3::new(o[0], o[1], o[2]),
            spacing,
            dims,
            padding,
            values,
        })
    }
}
