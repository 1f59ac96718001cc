//! Exact reconstruction of `χ_{n,k}(t, x) = E[exp(it√n log p̂^{n,k}(x))]`.
//!
//! For fixed `t`, `x ↦ χ(t, x)` solves a constant-coefficient ODE of order
//! `k` whose characteristic roots are returned by
//! [`characteristic_roots`](super::roots::characteristic_roots). Its first
//! `k − 1` derivatives at `x = a` coincide with those of `Θ`, and
//! `χ(t, a) = 1`. Writing `χ = Σ_l η_l e^{λ_l (x − a)}`, the `η_l` solve the
//! Vandermonde system `Σ_l η_l (λ_l/n)^m = χ^{(m)}(a)/n^m`, `m < k`.

use num_complex::Complex64;

use super::roots::characteristic_roots;
use super::theta::{theta_function, MAX_EXACT_N};
use crate::ams::{run_ams, AmsParams};
use crate::sampling::DistributionModel;
use crate::stats::empirical_char_function;
use crate::{Error, Result, RngStream};

/// Roots closer than this make the exponential basis degenerate.
pub const ROOT_SEPARATION: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicSolution {
    pub n: usize,
    pub k: usize,
    pub t: f64,
    pub a: f64,
    /// `λ^1, …, λ^k`, `λ^1` the root of smallest modulus.
    pub roots: Vec<Complex64>,
    /// `η^1, …, η^k`.
    pub coeffs: Vec<Complex64>,
    /// `χ^{(m)}(t, a)` for `m = 0..k`.
    pub boundary: Vec<Complex64>,
}

impl CharacteristicSolution {
    pub fn chi(&self, x: f64) -> Complex64 {
        self.chi_derivative(0, x)
    }

    /// `d^m χ / dx^m` at `x`.
    pub fn chi_derivative(&self, m: u32, x: f64) -> Complex64 {
        self.roots
            .iter()
            .zip(&self.coeffs)
            .map(|(lambda, eta)| eta * lambda.powu(m) * (lambda * (x - self.a)).exp())
            .sum()
    }

    pub fn phi(&self, x: f64) -> Complex64 {
        evaluate_phi(self, x)
    }

    pub fn coefficient_sum(&self) -> Complex64 {
        self.coeffs.iter().sum()
    }
}

pub fn solve_chi(n: usize, k: usize, t: f64, a: f64) -> Result<CharacteristicSolution> {
    if !(3..=MAX_EXACT_N).contains(&n) || k == 0 || k + 2 > n {
        return Err(Error::Range(format!(
            "χ reconstruction needs 3 <= n <= {MAX_EXACT_N} and 1 <= k <= n - 2, got n = {n}, k = {k}"
        )));
    }
    let roots = characteristic_roots(n, k, t)?;
    for i in 0..k {
        for j in i + 1..k {
            let gap = (roots[i] - roots[j]).norm();
            if gap < ROOT_SEPARATION {
                return Err(Error::SingularSystem(format!(
                    "roots {} and {} coincide within {gap:e}",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    let theta = theta_function(n, k, t, a)?;
    let mut boundary = vec![Complex64::new(1.0, 0.0)];
    boundary.extend((1..k as u32).map(|m| theta.derivative(m, a)));

    let scale = n as f64;
    let matrix: Vec<Vec<Complex64>> = (0..k)
        .map(|m| roots.iter().map(|r| (r / scale).powu(m as u32)).collect())
        .collect();
    let rhs: Vec<Complex64> = boundary
        .iter()
        .enumerate()
        .map(|(m, d)| d / scale.powi(m as i32))
        .collect();
    let coeffs = solve_linear(matrix, rhs)?;
    Ok(CharacteristicSolution {
        n,
        k,
        t,
        a,
        roots,
        coeffs,
        boundary,
    })
}

/// `φ(t, x) = e^{−it√n (x − a)} χ(t, x)`.
pub fn evaluate_phi(sol: &CharacteristicSolution, x: f64) -> Complex64 {
    let phase = -sol.t * (sol.n as f64).sqrt() * (x - sol.a);
    Complex64::from_polar(1.0, phase) * sol.chi(x)
}

/// Gaussian elimination with partial pivoting on a dense complex system.
pub fn solve_linear(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Result<Vec<Complex64>> {
    let size = b.len();
    for col in 0..size {
        let pivot = (col..size)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .expect("non-empty column");
        if a[pivot][col].norm() == 0.0 || !a[pivot][col].is_finite() {
            return Err(Error::SingularSystem(format!("zero pivot in column {col}")));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..size {
            let factor = a[row][col] / a[col][col];
            if factor.norm() == 0.0 {
                continue;
            }
            for c in col..size {
                let delta = factor * a[col][c];
                a[row][c] -= delta;
            }
            let delta = factor * b[col];
            b[row] -= delta;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); size];
    for row in (0..size).rev() {
        let tail: Complex64 = (row + 1..size).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Ok(x)
}

/// Monte Carlo estimate of `χ(t, x)` from `runs` independent AMS runs on
/// `Exp(1)`, run `i` using stream `i` of `master_seed`.
pub fn monte_carlo_chi(
    n: usize,
    k: usize,
    t: f64,
    a: f64,
    x: f64,
    runs: u64,
    master_seed: u64,
) -> Result<Complex64> {
    let dist = DistributionModel::Exponential { rate: 1.0 };
    let scale = t * (n as f64).sqrt();
    let mut logs = Vec::with_capacity(runs as usize);
    for i in 0..runs {
        let params = AmsParams::new(n, k, a)
            .with_x(x)
            .with_seed(RngStream::new(master_seed, i));
        logs.push(run_ams(&params, &dist)?.estimate.ln());
    }
    Ok(empirical_char_function(&logs, scale))
}
