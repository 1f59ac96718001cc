//! Coefficients of the order-`k` linear ODE satisfied by `x ↦ χ_{n,k}(t, x)`:
//!
//! `χ^{(k)} = e^{iθ_k} μ χ + Σ_{m<k} r_m χ^{(m)}`, with `θ_k = t√n log(1 − k/n)`.
//!
//! `μ` and `r` are computed twice: once through the double recursion that
//! arises from differentiating the functional equation, once by expanding
//! `(λ − n)(λ − n + 1)⋯(λ − n + k − 1)` directly.

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct OdeCoefficients {
    pub n: usize,
    pub k: usize,
    pub mu: f64,
    /// `r_0, …, r_{k−1}`.
    pub r: Vec<f64>,
}

impl OdeCoefficients {
    /// Evaluates `λ^k − Σ r_m λ^m`.
    pub fn characteristic_polynomial(&self, lambda: f64) -> f64 {
        let mut acc = 1.0;
        for m in (0..self.k).rev() {
            acc = acc * lambda - self.r[m];
        }
        acc
    }
}

fn check_range(n: usize, k: usize) -> Result<()> {
    if k == 0 || k + 2 > n {
        return Err(Error::Range(format!(
            "ODE coefficients need 1 <= k <= n - 2, got n = {n}, k = {k}"
        )));
    }
    Ok(())
}

/// Recursion route: `μ_0 = 1`, `μ_{l+1} = −c_l μ_l` and
/// `r_{m,l+1} = r_{m−1,l} − c_l r_{m,l}` with `c_l = n − k + l + 1`,
/// `r_{l,l} = −1` and `r_{−1,l} = 0`.
pub fn ode_coefficients(n: usize, k: usize) -> Result<OdeCoefficients> {
    check_range(n, k)?;
    let mut mu = 1.0;
    // r[m] holds r_{m,l}; r[l] = −1 is the leading entry at stage l.
    let mut r = vec![-1.0];
    for l in 0..k {
        let c = (n - k + l + 1) as f64;
        mu *= -c;
        let mut next = vec![0.0; l + 2];
        for m in 0..=l {
            let lower = if m == 0 { 0.0 } else { r[m - 1] };
            next[m] = lower - c * r[m];
        }
        next[l + 1] = -1.0;
        r = next;
    }
    r.truncate(k);
    Ok(OdeCoefficients { n, k, mu, r })
}

/// Expansion route: multiplies out `Π_{j<k} (λ − (n − j))`.
pub fn ode_coefficients_by_expansion(n: usize, k: usize) -> Result<OdeCoefficients> {
    check_range(n, k)?;
    // poly[m] is the coefficient of λ^m.
    let mut poly = vec![1.0];
    let mut falling = 1.0;
    for j in 0..k {
        let root = (n - j) as f64;
        falling *= root;
        let mut next = vec![0.0; poly.len() + 1];
        for (m, c) in poly.iter().enumerate() {
            next[m + 1] += c;
            next[m] -= root * c;
        }
        poly = next;
    }
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    Ok(OdeCoefficients {
        n,
        k,
        mu: sign * falling,
        r: poly[..k].iter().map(|c| -c).collect(),
    })
}

/// Largest relative coefficient mismatch between two coefficient sets.
pub fn duality_residual(a: &OdeCoefficients, b: &OdeCoefficients) -> f64 {
    if a.k != b.k || a.r.len() != b.r.len() {
        return f64::INFINITY;
    }
    let rel = |x: f64, y: f64| {
        let scale = x.abs().max(y.abs());
        if scale == 0.0 {
            0.0
        } else {
            (x - y).abs() / scale
        }
    };
    a.r.iter()
        .zip(&b.r)
        .map(|(x, y)| rel(*x, *y))
        .fold(rel(a.mu, b.mu), f64::max)
}
