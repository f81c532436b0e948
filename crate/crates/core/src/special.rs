//! Special functions used by the smoothed-density and form-factor oracles.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Antiderivative of the normal CDF: `∫ Φ(x) dx = x Φ(x) + φ(x)`.
pub fn normal_cdf_integral(x: f64) -> f64 {
    x * normal_cdf(x) + normal_pdf(x)
}

/// Bessel function of the first kind, order one.
pub fn bessel_j1(x: f64) -> f64 {
    libm::j1(x)
}

/// Exponentially scaled modified Bessel function `e^{-|x|} I₀(x)`.
///
/// Power series up to `|x| = 20`, Hankel asymptotic series beyond; relative
/// error near 1e-14 throughout.
pub fn bessel_i0e(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= 20.0 {
        let q = 0.25 * ax * ax;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            term *= q / (k * k) as f64;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        sum * (-ax).exp()
    } else {
        // terms a_k = a_{k-1}·(2k-1)²/(8k·x); stop at the smallest
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            let next = term * ((2 * k - 1) as f64).powi(2) / (8.0 * k as f64 * ax);
            if next >= term || next < 1e-17 * sum {
                break;
            }
            term = next;
            sum += term;
        }
        sum / (2.0 * PI * ax).sqrt()
    }
}

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `2 J₁(x)/x`, the normalised disk form factor.
pub fn jinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 8.0
    } else {
        2.0 * bessel_j1(x) / x
    }
}

/// Perimeter of an ellipse with semi-axes `a`, `b` via the arithmetic–geometric
/// mean evaluation of the complete elliptic integral of the second kind.
pub fn ellipse_perimeter(a: f64, b: f64) -> f64 {
    let (a, b) = if a >= b { (a, b) } else { (b, a) };
    let mut an = a;
    let mut bn = b;
    let mut cn = (a * a - b * b).sqrt();
    let mut sum = 0.5 * cn * cn;
    let mut pow = 0.5;
    for _ in 0..64 {
        if cn <= 1e-17 * a {
            break;
        }
        let a1 = 0.5 * (an + bn);
        let b1 = (an * bn).sqrt();
        cn = 0.5 * (an - bn);
        pow *= 2.0;
        sum += pow * cn * cn;
        an = a1;
        bn = b1;
    }
    2.0 * PI * (a * a - sum) / an
}
