//! Gauss–Legendre rules and composite/adaptive 1-D integration.

use std::f64::consts::PI;

use thiserror::Error;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule; exact for polynomials of degree `2n - 1`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        self.on_interval(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Composite rule over `panels` equal sub-intervals.
    pub fn composite<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let lo = a + p as f64 * h;
                self.integrate(&f, lo, lo + h)
            })
            .sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Debug, Error, PartialEq)]
#[error("integral did not reach relative tolerance {tolerance:e} (last change {last_change:e})")]
pub struct NotConverged {
    pub tolerance: f64,
    pub last_change: f64,
}

/// Composite 16-point Gauss–Legendre with panel doubling until two
/// successive estimates agree to `tol` relative.
///
/// `min_panels` should resolve the integrand's shortest feature; the
/// doubling only certifies convergence.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    min_panels: usize,
) -> Result<f64, NotConverged> {
    let rule = GaussLegendre::new(16);
    let mut panels = min_panels.max(1);
    let mut prev = rule.composite(&f, a, b, panels);
    let mut last_change = f64::INFINITY;
    for _ in 0..12 {
        panels *= 2;
        let next = rule.composite(&f, a, b, panels);
        let scale = next.abs().max(prev.abs());
        last_change = if scale == 0.0 {
            0.0
        } else {
            (next - prev).abs() / scale
        };
        if last_change <= tol {
            return Ok(next);
        }
        prev = next;
    }
    Err(NotConverged {
        tolerance: tol,
        last_change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two_and_exactness() {
        for n in [1, 2, 3, 7, 16, 33] {
            let r = GaussLegendre::new(n);
            let s: f64 = r.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n} sum={s}");
            // x^(2n-2) integrates to 2/(2n-1)
            let deg = 2 * n - 2;
            let got = r.integrate(|x| x.powi(deg as i32), -1.0, 1.0);
            let want = 2.0 / (deg as f64 + 1.0);
            assert!((got - want).abs() < 1e-13, "n={n} got={got} want={want}");
        }
    }

    #[test]
    fn nodes_are_sorted_and_symmetric() {
        let r = GaussLegendre::new(9);
        for w in r.nodes.windows(2) {
            assert!(w[0] < w[1]);
        }
        for i in 0..9 {
            assert!((r.nodes[i] + r.nodes[8 - i]).abs() < 1e-15);
        }
    }

    #[test]
    fn adaptive_gaussian() {
        let v = integrate_adaptive(|x| (-x * x).exp(), -10.0, 10.0, 1e-12, 4).unwrap();
        assert!((v - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn adaptive_reports_failure() {
        // 1/sqrt(x) near 0 with a relative tolerance it cannot reach in budget
        let r = integrate_adaptive(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-15, 1);
        assert!(r.is_err());
    }
}
