//! The first-step term `Θ_{n,k}(t, x)` of the functional equation for `χ`.
//!
//! `Θ(t, x) = Σ_{l<k} e^{iθ_l} P(exactly l of n replicas started at x end
//! below a)`, `θ_l = t√n log(1 − l/n)`. With `u = e^{−(a−x)}` each
//! probability is `C(n, l)(1 − u)^l u^{n−l}`. `Θ` is kept in the basis
//! `B_q = u^{n−q}(1 − u)^q`, on which `d/dx = u d/du` acts without leaving
//! the basis: `B_q' = (n − q) B_q − q B_{q−1}`. All basis functions but `B_0`
//! vanish at `x = a`, so derivatives there are read off the first coefficient.

use num_complex::Complex64;

use super::roots::phase;
use crate::sampling::order_statistic_cdf;
use crate::{Error, Result};

/// Binomial coefficients stop being comfortably representable past this.
pub const MAX_EXACT_N: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaFunction {
    pub n: usize,
    pub k: usize,
    pub t: f64,
    pub a: f64,
    /// `coeffs[q]` multiplies `u^{n−q}(1 − u)^q`, `q = 0..=n`.
    coeffs: Vec<Complex64>,
}

fn binomial(n: usize, j: usize) -> f64 {
    let j = j.min(n - j);
    let mut c = 1.0;
    for i in 0..j {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c.round()
}

pub fn theta_function(n: usize, k: usize, t: f64, a: f64) -> Result<ThetaFunction> {
    if n > MAX_EXACT_N {
        return Err(Error::Range(format!(
            "exact Θ limited to n <= {MAX_EXACT_N}, got {n}"
        )));
    }
    if n < 2 || k == 0 || k >= n {
        return Err(Error::Range(format!("need 1 <= k <= n - 1, got n = {n}, k = {k}")));
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
    for (l, c) in coeffs.iter_mut().enumerate().take(k) {
        *c = Complex64::from_polar(binomial(n, l), phase(n, l, t));
    }
    Ok(ThetaFunction { n, k, t, a, coeffs })
}

impl ThetaFunction {
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.derivative(0, x)
    }

    /// `d^m Θ / dx^m` at `x`.
    pub fn derivative(&self, m: u32, x: f64) -> Complex64 {
        let n = self.n;
        let mut c = self.coeffs.clone();
        for _ in 0..m {
            for q in 0..=n {
                let next = if q < n { c[q + 1] } else { Complex64::new(0.0, 0.0) };
                c[q] = c[q] * (n - q) as f64 - next * (q + 1) as f64;
            }
        }
        let u = (x - self.a).exp();
        let v = -(x - self.a).exp_m1();
        c.iter()
            .enumerate()
            .filter(|(_, c)| c.norm() != 0.0)
            .map(|(q, c)| c * (u.powi((n - q) as i32) * v.powi(q as i32)))
            .sum()
    }

    /// `Σ_{l<k} e^{iθ_l} [F_{n,l}(a; x) − F_{n,l+1}(a; x)]` via order-statistic
    /// CDFs, independent of the basis coefficients.
    pub fn direct_sum(&self, x: f64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for l in 0..self.k {
            let mass = order_statistic_cdf(self.n, l, self.a, x)?
                - order_statistic_cdf(self.n, l + 1, self.a, x)?;
            acc += Complex64::from_polar(mass, phase(self.n, l, self.t));
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unity_at_threshold() {
        for (n, k, t) in [(10, 3, 1.0), (64, 5, -2.0), (5, 4, 0.3)] {
            let th = theta_function(n, k, t, 1.5).unwrap();
            assert!((th.eval(1.5) - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_frequency_is_order_statistic_survival() {
        let th = theta_function(12, 4, 0.0, 2.0).unwrap();
        for x in [0.0, 0.5, 1.9] {
            let expected = 1.0 - order_statistic_cdf(12, 4, 2.0, x).unwrap();
            assert!((th.eval(x) - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn polynomial_matches_direct_sum() {
        let th = theta_function(10, 3, 1.0, 1.0).unwrap();
        let direct = th.direct_sum(0.5).unwrap();
        assert!((th.eval(0.5) - direct).norm() < 1e-10);
        let th = theta_function(64, 6, 2.0, 2.0).unwrap();
        for x in [0.0, 1.0, 1.99] {
            assert!((th.eval(x) - th.direct_sum(x).unwrap()).norm() < 1e-10);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let th = theta_function(16, 3, 1.0, 2.0).unwrap();
        let x = 1.3;
        let h = 1e-5;
        let fd = (th.eval(x + h) - th.eval(x - h)) / (2.0 * h);
        let exact = th.derivative(1, x);
        assert!((fd - exact).norm() < 1e-6 * exact.norm().max(1.0));
        let fd2 = (th.derivative(1, x + h) - th.derivative(1, x - h)) / (2.0 * h);
        let exact2 = th.derivative(2, x);
        assert!((fd2 - exact2).norm() < 1e-6 * exact2.norm().max(1.0));
    }

    #[test]
    fn low_order_derivatives_of_survival_vanish_at_threshold() {
        // At t = 0, Θ = 1 − F_{n,k}(a; x) and its derivatives of order 1..k−1 are 0 at x = a.
        let th = theta_function(20, 4, 0.0, 1.0).unwrap();
        for m in 1..4 {
            let d = th.derivative(m, 1.0).norm();
            assert!(d < 1e-9 * 20f64.powi(m as i32), "m = {m}: {d}");
        }
    }

    #[test]
    fn range_guard() {
        assert!(matches!(theta_function(65, 2, 1.0, 1.0), Err(Error::Range(_))));
        assert!(theta_function(10, 10, 1.0, 1.0).is_err());
        assert!(theta_function(10, 9, 1.0, 1.0).is_ok());
    }
}
