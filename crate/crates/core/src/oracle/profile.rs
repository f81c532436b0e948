use serde::{Deserialize, Serialize};

use super::OracleError;
use crate::gauss::integrate_adaptive;
use crate::special::{normal_cdf, normal_cdf_integral, normal_pdf};

/// Density profile `H(h)` across a boundary, `h` the height above the
/// surface along the outward normal. `H` falls from 1 inside to 0 outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EdgeProfile {
    /// Sharp edge at `h = 0`.
    Step,
    /// Linear descent from 1 at `-width/2` to 0 at `width/2`.
    Ramp { width: f64 },
    /// Piecewise-linear through `(h, H)` knots; repeated `h` values encode
    /// jumps.
    Tabulated { points: Vec<(f64, f64)> },
}

impl EdgeProfile {
    pub fn linear_ramp(width: f64) -> Self {
        Self::Ramp { width }
    }

    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self, OracleError> {
        let p = Self::Tabulated { points };
        p.validate()?;
        Ok(p)
    }

    pub fn is_step(&self) -> bool {
        self.knots().windows(2).all(|w| w[0].0 == w[1].0)
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        let bad = |m: String| Err(OracleError::InvalidProfile(m));
        match self {
            Self::Step => Ok(()),
            Self::Ramp { width } => {
                if width.is_finite() && *width >= 0.0 {
                    Ok(())
                } else {
                    bad(format!("ramp width must be finite and ≥ 0, got {width}"))
                }
            }
            Self::Tabulated { points } => {
                if points.len() < 2 {
                    return bad("need at least two knots".into());
                }
                if points.iter().any(|(h, v)| !h.is_finite() || !v.is_finite()) {
                    return bad("knots must be finite".into());
                }
                if points[0].1 != 1.0 || points[points.len() - 1].1 != 0.0 {
                    return bad("profile must start at 1 and end at 0".into());
                }
                for w in points.windows(2) {
                    if w[1].0 < w[0].0 {
                        return bad("heights must be non-decreasing".into());
                    }
                    if w[1].1 > w[0].1 {
                        return bad("profile must be non-increasing".into());
                    }
                }
                Ok(())
            }
        }
    }

    /// Knot list with jumps as repeated heights.
    fn knots(&self) -> Vec<(f64, f64)> {
        match self {
            Self::Step => vec![(0.0, 1.0), (0.0, 0.0)],
            Self::Ramp { width } => vec![(-0.5 * width, 1.0), (0.5 * width, 0.0)],
            Self::Tabulated { points } => points.clone(),
        }
    }

    /// Outermost knots.
    pub fn support(&self) -> (f64, f64) {
        let k = self.knots();
        (k[0].0, k[k.len() - 1].0)
    }

    /// `H(h)`.
    pub fn value(&self, h: f64) -> f64 {
        let k = self.knots();
        if h < k[0].0 {
            return 1.0;
        }
        for w in k.windows(2) {
            let ((a, ha), (b, hb)) = (w[0], w[1]);
            if h < b {
                return ha + (hb - ha) * (h - a) / (b - a);
            }
        }
        0.0
    }

    /// `(H ⊛ g_σ)(d)`: the smoothed density fraction at height `d`.
    pub fn smoothed(&self, d: f64, sigma: f64) -> f64 {
        let mut p = 1.0;
        for w in self.knots().windows(2) {
            let ((a, ha), (b, hb)) = (w[0], w[1]);
            if ha == hb {
                continue;
            }
            if a == b {
                p -= (ha - hb) * normal_cdf((d - a) / sigma);
            } else {
                let s = (ha - hb) / (b - a);
                p -= s
                    * sigma
                    * (normal_cdf_integral((d - a) / sigma) - normal_cdf_integral((d - b) / sigma));
            }
        }
        p
    }

    /// `p(h) = ∫ g_σ(h − h′) (−dH(h′))`, the normal density gradient per ρ.
    pub fn layer_density(&self, h: f64, sigma: f64) -> f64 {
        let mut p = 0.0;
        for w in self.knots().windows(2) {
            let ((a, ha), (b, hb)) = (w[0], w[1]);
            if ha == hb {
                continue;
            }
            if a == b {
                p += (ha - hb) * normal_pdf((h - a) / sigma) / sigma;
            } else {
                let s = (ha - hb) / (b - a);
                p += s * (normal_cdf((h - a) / sigma) - normal_cdf((h - b) / sigma));
            }
        }
        p
    }
}

/// `∫ p(h)² dh` (1/m); for the step this is `∫ g_σ² = 1/(2√π σ)`.
pub fn edge_layer_factor(profile: &EdgeProfile, sigma: f64) -> Result<f64, OracleError> {
    profile.validate()?;
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(OracleError::InvalidInput(format!("σ must be positive, got {sigma}")));
    }
    let (lo, hi) = profile.support();
    let (a, b) = (lo - 12.0 * sigma, hi + 12.0 * sigma);
    let panels = ((b - a) / (0.5 * sigma)).ceil() as usize;
    Ok(integrate_adaptive(
        |h| profile.layer_density(h, sigma).powi(2),
        a,
        b,
        1e-13,
        panels,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::GaussLegendre;
    use crate::rel_diff;
    use std::f64::consts::PI;

    #[test]
    fn step_factor() {
        let s = 1e-7;
        let f = edge_layer_factor(&EdgeProfile::Step, s).unwrap();
        assert!(rel_diff(f, 1.0 / (2.0 * PI.sqrt() * s)) < 1e-10);
        assert!((f - 2.8209e6).abs() < 1e2);
    }

    #[test]
    fn ramp_below_step_and_converging() {
        let s = 1.0;
        let step = edge_layer_factor(&EdgeProfile::Step, s).unwrap();
        let ramp = edge_layer_factor(&EdgeProfile::linear_ramp(s), s).unwrap();
        assert!(ramp < step);
        let thin = edge_layer_factor(&EdgeProfile::linear_ramp(s / 100.0), s).unwrap();
        assert!(rel_diff(thin, step) < 1e-3);
    }

    #[test]
    fn smoothed_against_numeric_convolution() {
        let s = 1.0;
        let prof = EdgeProfile::tabulated(vec![(-0.7, 1.0), (-0.2, 0.6), (-0.2, 0.4), (0.9, 0.0)]).unwrap();
        let rule = GaussLegendre::new(32);
        for &d in &[-3.0, -0.5, 0.0, 0.3, 2.0] {
            // ∫ H(d − u) g(u) du, split at the kinks
            let kinks = [-0.7f64, -0.2, 0.9].map(|k| d - k);
            let mut edges = vec![-12.0, 12.0];
            edges.extend(kinks.iter().copied().filter(|x| x.abs() < 12.0));
            edges.sort_by(f64::total_cmp);
            let num: f64 = edges
                .windows(2)
                .map(|w| rule.composite(|u| prof.value(d - u) * normal_pdf(u / s) / s, w[0], w[1], 16))
                .sum();
            assert!((prof.smoothed(d, s) - num).abs() < 1e-12, "d={d}");
        }
        assert!((EdgeProfile::linear_ramp(s).smoothed(0.0, s) - 0.5).abs() < 1e-15);
        assert!((EdgeProfile::Step.smoothed(0.0, s) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn invalid_tables() {
        assert!(EdgeProfile::tabulated(vec![(0.0, 1.0)]).is_err());
        assert!(EdgeProfile::tabulated(vec![(0.0, 1.0), (1.0, 0.5)]).is_err());
        assert!(EdgeProfile::tabulated(vec![(0.0, 1.0), (1.0, 1.2), (2.0, 0.0)]).is_err());
        assert!(EdgeProfile::tabulated(vec![(1.0, 1.0), (0.0, 0.0)]).is_err());
        assert!(EdgeProfile::linear_ramp(0.0).is_step());
    }
}
