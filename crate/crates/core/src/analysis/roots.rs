//! Roots of the characteristic equation
//!
//! `(n − λ)(n − 1 − λ)⋯(n − k + 1 − λ) / (n(n − 1)⋯(n − k + 1)) = e^{iθ}`,
//! `θ = t√n log(1 − k/n)`.
//!
//! The equation is solved in the normalized form
//! `h(λ) − 1 = e^{iθ} − 1`, `h(λ) = Π_j (1 − λ/(n − j))`, with both sides
//! evaluated without cancellation so that the root near the origin is
//! resolved to full relative precision even when `n` is large. Aberth
//! iteration is warm-started from the large-`n` limits: `it√n + t²/2` for the
//! first root and `n(1 − e^{2πi(l−1)/k})` for the others.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::{Error, Result};

pub const ROOT_RESIDUAL_TOL: f64 = 1e-10;
pub const MAX_SOLVER_ITERATIONS: usize = 200;

/// `θ_l = t√n log(1 − l/n)`.
pub fn phase(n: usize, l: usize, t: f64) -> f64 {
    t * (n as f64).sqrt() * (-(l as f64) / n as f64).ln_1p()
}

/// `e^{iθ} − 1` without cancellation for small `θ`.
pub fn expm1_i(theta: f64) -> Complex64 {
    let half = (0.5 * theta).sin();
    Complex64::new(-2.0 * half * half, theta.sin())
}

/// `h(λ) − 1` and `h'(λ)`.
fn normalized_product(n: usize, k: usize, lambda: Complex64) -> (Complex64, Complex64) {
    let mut h_minus_one = Complex64::new(0.0, 0.0);
    let mut derivative = Complex64::new(0.0, 0.0);
    for j in 0..k {
        let d = (n - j) as f64;
        let step = -lambda / d;
        // h' ← h'·(1 + step) + h·(−1/d), with h = 1 + h_minus_one.
        derivative = derivative * (1.0 + step) - (1.0 + h_minus_one) / d;
        h_minus_one = h_minus_one + step + h_minus_one * step;
    }
    (h_minus_one, derivative)
}

/// `|h(λ) − e^{iθ}|` for the characteristic equation at `(n, k, t)`.
pub fn characteristic_residual(n: usize, k: usize, t: f64, lambda: Complex64) -> f64 {
    let target = expm1_i(phase(n, k, t));
    (normalized_product(n, k, lambda).0 - target).norm()
}

/// Large-`n` limit of root `l` (1-based): `it√n + t²/2` for `l = 1`,
/// `n(1 − e^{2πi(l−1)/k})` otherwise.
pub fn limit_root(n: usize, k: usize, t: f64, l: usize) -> Complex64 {
    if l == 1 {
        Complex64::new(0.5 * t * t, t * (n as f64).sqrt())
    } else {
        n as f64 * limit_root_scaled(k, l)
    }
}

/// `1 − e^{2πi(l−1)/k}`.
pub fn limit_root_scaled(k: usize, l: usize) -> Complex64 {
    let angle = 2.0 * PI * (l - 1) as f64 / k as f64;
    Complex64::new(1.0 - angle.cos(), -angle.sin())
}

/// All `k` roots, labelled so that `roots[0]` is the one of smallest modulus
/// (`λ¹`) and `roots[l−1]` is the root nearest `n(1 − e^{2πi(l−1)/k})`.
pub fn characteristic_roots(n: usize, k: usize, t: f64) -> Result<Vec<Complex64>> {
    if k == 0 || n < 3 || k + 2 > n {
        return Err(Error::Range(format!(
            "characteristic roots need n >= 3 and 1 <= k <= n - 2, got n = {n}, k = {k}"
        )));
    }
    if !t.is_finite() {
        return Err(Error::Domain(format!("t must be finite, got {t}")));
    }
    let target = expm1_i(phase(n, k, t));
    let mut z: Vec<Complex64> = (1..=k).map(|l| limit_root(n, k, t, l)).collect();
    let newton = |lambda: Complex64| -> (Complex64, f64) {
        let (hm1, dh) = normalized_product(n, k, lambda);
        let g = hm1 - target;
        (g / dh, g.norm())
    };

    let mut iterations = 0;
    while iterations < MAX_SOLVER_ITERATIONS {
        iterations += 1;
        let mut largest_step: f64 = 0.0;
        for l in 0..k {
            let (ratio, _) = newton(z[l]);
            let repulsion: Complex64 = (0..k)
                .filter(|&m| m != l)
                .map(|m| 1.0 / (z[l] - z[m]))
                .sum();
            let step = ratio / (1.0 - ratio * repulsion);
            if step.is_finite() {
                z[l] -= step;
                largest_step = largest_step.max(step.norm() / z[l].norm().max(1.0));
            }
        }
        if largest_step < 1e-14 {
            break;
        }
    }

    // Newton polish, then verify the residual.
    for root in z.iter_mut() {
        for _ in 0..3 {
            let (ratio, _) = newton(*root);
            if ratio.is_finite() {
                *root -= ratio;
            }
        }
    }
    let worst = z
        .iter()
        .map(|root| newton(*root).1)
        .fold(0.0, f64::max);
    if !(worst <= ROOT_RESIDUAL_TOL) {
        return Err(Error::ConvergenceFailure {
            iterations,
            residual: worst,
        });
    }
    Ok(label_roots(n, k, z))
}

fn label_roots(n: usize, k: usize, mut z: Vec<Complex64>) -> Vec<Complex64> {
    let first = (0..z.len())
        .min_by(|&a, &b| z[a].norm().total_cmp(&z[b].norm()))
        .expect("at least one root");
    let mut labelled = vec![z.swap_remove(first)];
    for l in 2..=k {
        let target = limit_root(n, k, 0.0, l);
        let idx = (0..z.len())
            .min_by(|&a, &b| (z[a] - target).norm().total_cmp(&(z[b] - target).norm()))
            .expect("roots remain");
        labelled.push(z.swap_remove(idx));
    }
    labelled
}

/// Errors of the roots against their large-`n` limits, per `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootAsymptotics {
    pub k: usize,
    pub t: f64,
    pub n_grid: Vec<usize>,
    /// `|λ¹ − it√n − t²/2|`.
    pub first_root_error: Vec<f64>,
    /// `max_{l ≥ 2} |λ^l/n − (1 − e^{2πi(l−1)/k})|`, zero when `k = 1`.
    pub scaled_root_error: Vec<f64>,
}

impl RootAsymptotics {
    /// Both error sequences decrease along the grid (values below the solver
    /// tolerance count as converged) and the last entries are under
    /// `10/√n_last`.
    pub fn passed(&self) -> bool {
        let bound = 10.0 / (*self.n_grid.last().unwrap_or(&1) as f64).sqrt();
        let decreasing = |v: &[f64]| {
            v.windows(2)
                .all(|w| w[1] < w[0] || (w[0] <= 1e-9 && w[1] <= 1e-9))
        };
        decreasing(&self.first_root_error)
            && decreasing(&self.scaled_root_error)
            && self.first_root_error.last().is_some_and(|e| *e <= bound)
            && self.scaled_root_error.last().is_some_and(|e| *e <= bound)
    }
}

pub fn asymptotic_root_check(k: usize, t: f64, n_grid: &[usize]) -> Result<RootAsymptotics> {
    if n_grid.windows(2).any(|w| w[1] <= w[0]) || n_grid.iter().any(|&n| n < k + 2) {
        return Err(Error::InvalidParams(
            "n grid must be increasing with every n >= k + 2".into(),
        ));
    }
    let mut first_root_error = Vec::with_capacity(n_grid.len());
    let mut scaled_root_error = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let roots = characteristic_roots(n, k, t)?;
        first_root_error.push((roots[0] - limit_root(n, k, t, 1)).norm());
        let worst = (2..=k)
            .map(|l| (roots[l - 1] / n as f64 - limit_root_scaled(k, l)).norm())
            .fold(0.0, f64::max);
        scaled_root_error.push(worst);
    }
    Ok(RootAsymptotics {
        k,
        t,
        n_grid: n_grid.to_vec(),
        first_root_error,
        scaled_root_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residuals_on_grid() {
        for n in [3, 5, 10, 50, 200, 10_000] {
            for k in 1..=6.min(n - 2) {
                for t in [-2.0, -0.3, 0.0, 0.7, 1.0, 3.0] {
                    let roots = characteristic_roots(n, k, t).unwrap();
                    assert_eq!(roots.len(), k);
                    for r in &roots {
                        assert!(characteristic_residual(n, k, t, *r) <= ROOT_RESIDUAL_TOL);
                    }
                }
            }
        }
    }

    #[test]
    fn t_zero_has_root_at_origin() {
        for (n, k) in [(10, 1), (10, 2), (40, 5), (100, 7)] {
            let roots = characteristic_roots(n, k, 0.0).unwrap();
            assert!(roots[0].norm() < 1e-12, "{:?}", roots[0]);
        }
        // k = 2: λ² − (2n − 1)λ = 0 exactly.
        let roots = characteristic_roots(10, 2, 0.0).unwrap();
        assert!((roots[1] - Complex64::new(19.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn degree_one_closed_form() {
        for n in [5, 100, 1_000_000] {
            for t in [0.0, 0.5, 1.0, -2.0] {
                let root = characteristic_roots(n, 1, t).unwrap()[0];
                let closed = -(n as f64) * expm1_i(phase(n, 1, t));
                assert!((root - closed).norm() <= 1e-12 * closed.norm().max(1.0));
            }
        }
    }

    #[test]
    fn first_root_near_asymptote_at_large_n() {
        let roots = characteristic_roots(1_000_000, 3, 1.0).unwrap();
        let expected = Complex64::new(0.5, 1000.0);
        assert!((roots[0] - expected).norm() < 0.05, "{:?}", roots[0]);
    }

    #[test]
    fn roots_pairwise_distinct() {
        for k in 2..=6 {
            let n = 8 * k * k;
            for t in [0.0, 1.0, 2.5] {
                let roots = characteristic_roots(n, k, t).unwrap();
                for i in 0..k {
                    for j in i + 1..k {
                        assert!((roots[i] - roots[j]).norm() > 1e-8);
                    }
                }
            }
        }
    }

    #[test]
    fn asymptotic_errors_decrease() {
        let report = asymptotic_root_check(2, 1.0, &[100, 10_000, 1_000_000]).unwrap();
        assert!(report.passed(), "{report:?}");
        let zero = asymptotic_root_check(3, 0.0, &[50, 500]).unwrap();
        assert!(zero.first_root_error.iter().all(|e| *e < 1e-9));
    }

    #[test]
    fn asymptotic_degree_one_matches_closed_form() {
        let grid = [100, 10_000];
        let report = asymptotic_root_check(1, 1.0, &grid).unwrap();
        for (i, &n) in grid.iter().enumerate() {
            let closed = -(n as f64) * expm1_i(phase(n, 1, 1.0));
            let err = (closed - limit_root(n, 1, 1.0, 1)).norm();
            assert!((report.first_root_error[i] - err).abs() < 1e-12);
        }
    }

    #[test]
    fn range_errors() {
        assert!(characteristic_roots(4, 3, 1.0).is_err());
        assert!(characteristic_roots(2, 1, 1.0).is_err());
        assert!(asymptotic_root_check(2, 1.0, &[100, 50]).is_err());
    }
}
