//! The analytic verification suite run by `ams verify`.
//!
//! `Quick` covers the cheap algebraic checks; `Full` adds the Monte Carlo
//! comparison for `χ`, the functional-equation quadrature, root asymptotics
//! and the trend of `φ` towards its Gaussian limit.

use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::analysis::{
    asymptotic_root_check, characteristic_roots, derivative_identity_check, duality_residual,
    functional_equation_residual, k1_characteristic, k1_exact_law, monte_carlo_chi,
    ode_coefficients, ode_coefficients_by_expansion, roots, solve_chi, theta_function,
    OdeCoefficients,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            other => Err(Error::InvalidParams(format!("unknown verification level {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Worst observed error (or the quantity compared against `tolerance`).
    pub actual: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn within(name: &str, actual: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed: actual <= tolerance,
            actual,
            tolerance,
            detail: detail.into(),
        }
    }

    fn failed(name: &str, err: &Error) -> Self {
        Self {
            name: name.to_string(),
            passed: false,
            actual: f64::NAN,
            tolerance: f64::NAN,
            detail: err.to_string(),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: actual {:.3e}, tolerance {:.3e} ({})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.actual,
            self.tolerance,
            self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub level: Level,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn guarded(name: &str, f: impl FnOnce() -> Result<Check>) -> Check {
    f().unwrap_or_else(|e| Check::failed(name, &e))
}

pub fn run(level: Level) -> VerificationReport {
    let mut checks = vec![
        check_ode_duality_with(ode_coefficients_by_expansion),
        check_root_residuals(),
        check_k1_closed_forms(),
        check_derivative_identities(),
        check_theta_dual(),
        check_boundary_and_bound(),
        check_initial_condition_decay(),
    ];
    if level == Level::Full {
        checks.push(check_chi_against_monte_carlo(1_000_000));
        checks.push(check_functional_equation());
        checks.push(check_root_asymptotics());
        checks.push(check_first_root_at_large_n());
        checks.push(check_phi_trend());
    }
    VerificationReport { level, checks }
}

pub const ODE_DUALITY_TOL: f64 = 1e-12;

/// Recursion against `expand` for every `n ≤ 100`, `k ≤ min(20, n − 2)`.
pub fn check_ode_duality_with(
    expand: impl Fn(usize, usize) -> Result<OdeCoefficients>,
) -> Check {
    let name = "ode_coefficient_duality";
    guarded(name, || {
        let mut worst: f64 = 0.0;
        let mut at = (0, 0);
        for n in 3..=100 {
            for k in 1..=20.min(n - 2) {
                let r = duality_residual(&ode_coefficients(n, k)?, &expand(n, k)?);
                if r > worst || r.is_nan() {
                    worst = if r.is_nan() { f64::INFINITY } else { r };
                    at = (n, k);
                }
            }
        }
        Ok(Check::within(
            name,
            worst,
            ODE_DUALITY_TOL,
            format!("worst relative mismatch at (n, k) = {at:?}"),
        ))
    })
}

fn check_root_residuals() -> Check {
    let name = "root_residuals";
    guarded(name, || {
        let mut worst: f64 = 0.0;
        let mut min_gap = f64::INFINITY;
        for n in [8, 16, 32, 64, 100, 1_000, 1_000_000] {
            for k in [1, 2, 3, 5] {
                if k + 2 > n {
                    continue;
                }
                for t in [-1.0, 0.5, 1.0, 2.0] {
                    let roots = characteristic_roots(n, k, t)?;
                    for r in &roots {
                        worst = worst.max(roots::characteristic_residual(n, k, t, *r));
                    }
                    if n >= 8 * k * k {
                        for i in 0..k {
                            for j in i + 1..k {
                                min_gap = min_gap.min((roots[i] - roots[j]).norm());
                            }
                        }
                    }
                }
            }
        }
        let mut check = Check::within(
            name,
            worst,
            roots::ROOT_RESIDUAL_TOL,
            format!("minimum pairwise root gap for n >= 8k^2: {min_gap:.3e}"),
        );
        check.passed &= min_gap > 1e-8;
        Ok(check)
    })
}

fn check_k1_closed_forms() -> Check {
    let name = "k1_closed_forms";
    guarded(name, || {
        let mut worst: f64 = 0.0;
        for n in [5, 20, 64, 10_000, 1_000_000] {
            for t in [0.0, 0.5, 1.0, -2.0] {
                let root = characteristic_roots(n, 1, t)?[0];
                let closed = -(n as f64) * roots::expm1_i(roots::phase(n, 1, t));
                worst = worst.max((root - closed).norm() / closed.norm().max(1.0));
            }
        }
        for n in [5, 20, 64] {
            let sol = solve_chi(n, 1, 1.0, 2.0)?;
            for x in [0.0, 1.0, 1.5] {
                worst = worst.max((sol.chi(x) - k1_characteristic(n, 1.0, 2.0 - x)?).norm());
            }
        }
        for n in [10, 100, 10_000] {
            let law = k1_exact_law(n, 6.0)?;
            worst = worst.max((law.mean_phat - (-6.0f64).exp()).abs() / (-6.0f64).exp());
        }
        Ok(Check::within(
            name,
            worst,
            1e-12,
            "k = 1 root, χ and mean against closed forms",
        ))
    })
}

fn check_derivative_identities() -> Check {
    let name = "order_statistic_derivative_identities";
    guarded(name, || {
        let mut worst: f64 = 0.0;
        for (n, k) in [(5, 1), (10, 4), (10, 2), (30, 1), (30, 12), (100, 99)] {
            for (y, x) in [(1.0, 0.2), (2.0, 0.0), (0.4, 0.3), (3.0, 1.0)] {
                worst = worst.max(derivative_identity_check(n, k, y, x)?.relative_error);
            }
        }
        Ok(Check::within(
            name,
            worst,
            crate::analysis::DERIVATIVE_REL_TOL,
            "central differences against the closed-form x-derivatives",
        ))
    })
}

fn check_theta_dual() -> Check {
    let name = "theta_polynomial_vs_order_statistics";
    guarded(name, || {
        let mut worst: f64 = 0.0;
        for (n, k, t, a, x) in [
            (10, 3, 1.0, 1.0, 0.5),
            (16, 2, 1.0, 2.0, 0.0),
            (64, 6, -1.5, 2.0, 1.2),
        ] {
            let th = theta_function(n, k, t, a)?;
            worst = worst.max((th.eval(x) - th.direct_sum(x)?).norm());
        }
        Ok(Check::within(name, worst, 1e-10, "basis expansion against binomial tails"))
    })
}

fn check_boundary_and_bound() -> Check {
    let name = "chi_boundary_and_modulus";
    guarded(name, || {
        let mut boundary: f64 = 0.0;
        let mut excess: f64 = 0.0;
        for (n, k) in [(8, 2), (16, 2), (20, 3), (32, 4), (64, 5)] {
            for t in [-1.0, 0.5, 1.0, 2.0] {
                let sol = solve_chi(n, k, t, 2.0)?;
                boundary = boundary
                    .max((sol.coefficient_sum() - 1.0).norm())
                    .max((sol.chi(2.0) - 1.0).norm());
                for i in 0..=20 {
                    let x = 0.1 * i as f64;
                    excess = excess.max(sol.chi(x).norm() - 1.0);
                }
            }
        }
        let mut check = Check::within(
            name,
            boundary,
            1e-10,
            format!("Σ η = χ(t, a) = 1; max |χ| − 1 on grid = {excess:.3e}"),
        );
        check.passed &= excess <= 1e-9;
        Ok(check)
    })
}

/// `|χ^{(m)}(a)| / n^m ≤ c |t| / √n` on `n ∈ {16, 32, 64}`, with `c` set
/// from `n = 16`. Reports the largest ratio against that bound.
fn check_initial_condition_decay() -> Check {
    let name = "initial_condition_decay";
    guarded(name, || {
        let (k, t, a) = (3, 1.0, 2.0);
        let grid = [16usize, 32, 64];
        let mut worst: f64 = 0.0;
        for m in 1..k as u32 {
            let scaled = |n: usize| -> Result<f64> {
                let d = theta_function(n, k, t, a)?.derivative(m, a).norm();
                Ok(d / (n as f64).powi(m as i32) * (n as f64).sqrt() / t.abs())
            };
            let c = scaled(grid[0])?;
            for &n in &grid[1..] {
                worst = worst.max(scaled(n)? / c);
            }
        }
        Ok(Check::within(
            name,
            worst,
            1.0,
            "ratio of scaled boundary derivatives to their n = 16 value",
        ))
    })
}

pub fn check_chi_against_monte_carlo(runs: u64) -> Check {
    let name = "chi_vs_monte_carlo";
    guarded(name, || {
        let (n, k, t, a) = (20, 3, 1.0, 2.0);
        let exact = solve_chi(n, k, t, a)?.chi(0.0);
        let mc = monte_carlo_chi(n, k, t, a, 0.0, runs, 0x5eed_c41)?;
        Ok(Check::within(
            name,
            (exact - mc).norm(),
            5.0 / (runs as f64).sqrt(),
            format!("χ(1, 0) = {exact:.6}, Monte Carlo {mc:.6} over {runs} runs"),
        ))
    })
}

fn check_functional_equation() -> Check {
    let name = "functional_equation_residual";
    guarded(name, || {
        let (n, k, t, a) = (16, 2, 1.0, 2.0);
        let sol = solve_chi(n, k, t, a)?;
        let theta = theta_function(n, k, t, a)?;
        let mut worst: f64 = 0.0;
        for x in [0.0, 0.25 * a, 0.5 * a, 0.75 * a] {
            worst = worst.max(functional_equation_residual(&sol, &theta, x)?);
        }
        Ok(Check::within(name, worst, 1e-6, "(n, k) = (16, 2), t = 1, a = 2"))
    })
}

fn check_root_asymptotics() -> Check {
    let name = "root_asymptotics";
    guarded(name, || {
        let report = asymptotic_root_check(2, 1.0, &[100, 10_000, 1_000_000])?;
        let bound = 10.0 / 1000.0;
        let last = report.first_root_error[2].max(report.scaled_root_error[2]);
        let mut check = Check::within(
            name,
            last,
            bound,
            format!(
                "k = 2, t = 1: |λ¹ − it√n − t²/2| = {:?}, scaled errors = {:?}",
                report.first_root_error, report.scaled_root_error
            ),
        );
        check.passed &= report.passed();
        Ok(check)
    })
}

fn check_first_root_at_large_n() -> Check {
    let name = "first_root_asymptote_n1e6";
    guarded(name, || {
        let root = characteristic_roots(1_000_000, 3, 1.0)?[0];
        let err = (root - Complex64::new(0.5, 1000.0)).norm();
        Ok(Check::within(name, err, 0.05, format!("k = 3, t = 1: λ¹ = {root:.6}")))
    })
}

/// Gaps `|φ_n(1, 0) − e^{−1}|` at `n = 16, 32, 64` (k = 2, a = 2).
pub fn phi_limit_gaps() -> Result<Vec<f64>> {
    let limit = 1.0 / E;
    [16, 32, 64]
        .into_iter()
        .map(|n| Ok((solve_chi(n, 2, 1.0, 2.0)?.phi(0.0) - limit).norm()))
        .collect()
}

fn check_phi_trend() -> Check {
    let name = "phi_limit_trend";
    guarded(name, || {
        let gaps = phi_limit_gaps()?;
        let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
        Ok(Check {
            name: name.into(),
            passed: decreasing,
            actual: gaps[2],
            tolerance: gaps[1],
            detail: format!("gaps at n = 16, 32, 64: {gaps:?}"),
        })
    })
}
