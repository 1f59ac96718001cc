//! Closed-form consequences of the central limit theorem and the
//! characteristic-function verifier.
//!
//! The limit law of `√n (p̂ − p)` is `N(0, −p² log p)` for every fixed `k`.
//! The verifier works in the exponential case: it rebuilds
//! `χ_{n,k}(t, x) = E[exp(it√n log p̂(x))]` exactly from the ODE (see
//! [`chi`]) so the analytic statements can be checked numerically.

pub mod chi;
pub mod ode;
pub mod quadrature;
pub mod roots;
pub mod theta;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use chi::{evaluate_phi, monte_carlo_chi, solve_chi, CharacteristicSolution};
pub use ode::{duality_residual, ode_coefficients, ode_coefficients_by_expansion, OdeCoefficients};
pub use roots::{asymptotic_root_check, characteristic_roots, RootAsymptotics};
pub use theta::{theta_function, ThetaFunction};

use crate::sampling::order_statistic_density;
use crate::stats::normal_quantile;
use crate::{Error, Result};

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("probability must lie in (0, 1), got {p}")))
    }
}

/// Two-sided standard normal quantile `r_α` with `P(|Z| ≤ r_α) = 1 − α`.
/// `α = 1` gives 0.
pub fn two_sided_quantile(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    normal_quantile(1.0 - 0.5 * alpha)
}

/// `−p² log p`.
pub fn asymptotic_variance(p: f64) -> Result<f64> {
    check_probability(p)?;
    Ok(-p * p * p.ln())
}

/// Plug-in asymptotic interval `p̂ ± r_α √(−p̂² log p̂) / √n`.
pub fn confidence_interval(p_hat: f64, n: usize, alpha: f64) -> Result<(f64, f64)> {
    confidence_interval_with_known_p(p_hat, p_hat, n, alpha)
}

/// Interval around `p̂` whose width uses a known `p`, equivalent to asking
/// whether `p̂` falls in `p ± r_α √(−p² log p) / √n`.
pub fn confidence_interval_with_known_p(
    p_hat: f64,
    p: f64,
    n: usize,
    alpha: f64,
) -> Result<(f64, f64)> {
    check_probability(p_hat)?;
    check_probability(p)?;
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    let half = two_sided_quantile(alpha)? * asymptotic_variance(p)?.sqrt() / (n as f64).sqrt();
    Ok((p_hat - half, p_hat + half))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostComparison {
    /// Replicas for one AMS run to reach accuracy `ε` at level `1 − α`.
    pub n_ams: f64,
    /// Independent samples for crude Monte Carlo at the same accuracy.
    pub n_mc: f64,
}

pub fn cost_comparison(p: f64, epsilon: f64, alpha: f64) -> Result<CostComparison> {
    check_probability(p)?;
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    let r = two_sided_quantile(alpha)?;
    let factor = r * r / (epsilon * epsilon);
    Ok(CostComparison {
        n_ams: asymptotic_variance(p)? * factor,
        n_mc: p * (1.0 - p) * factor,
    })
}

/// Exact law of the `k = 1` estimator in the exponential case, where
/// `p̂ = (1 − 1/n)^J` and `J ~ Poisson(n a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct K1ExactLaw {
    pub n: usize,
    pub a: f64,
    pub mean_phat: f64,
    pub var_phat: f64,
    /// Mean (and variance) of the Poisson iteration count.
    pub poisson_mean: f64,
}

pub fn k1_exact_law(n: usize, a: f64) -> Result<K1ExactLaw> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("threshold must be positive, got {a}")));
    }
    if n < 2 {
        return Err(Error::Domain(format!("n must be at least 2, got {n}")));
    }
    let nf = n as f64;
    let poisson_mean = nf * a;
    // E[s^J] = exp(na(s − 1)) at s = 1 − 1/n and s = (1 − 1/n)².
    let mean_phat = (-poisson_mean / nf).exp();
    let var_phat = (-2.0 * a).exp() * (a / nf).exp_m1();
    Ok(K1ExactLaw {
        n,
        a,
        mean_phat,
        var_phat,
        poisson_mean,
    })
}

/// `χ_{n,1}(t, x)` with `span = a − x`: `exp(n span (e^{iθ_1} − 1))`.
pub fn k1_characteristic(n: usize, t: f64, span: f64) -> Result<Complex64> {
    if span < 0.0 {
        return Err(Error::Domain(format!("span must be non-negative, got {span}")));
    }
    let theta = roots::phase(n, 1, t);
    Ok((n as f64 * span * roots::expm1_i(theta)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeCheck {
    pub n: usize,
    pub k: usize,
    pub y: f64,
    pub x: f64,
    /// Central finite difference of `f_{n,k}(y; x)` in `x`.
    pub finite_difference: f64,
    /// `n f_{n,1}` or `(n − k + 1)(f_{n,k} − f_{n,k−1})`.
    pub identity: f64,
    pub relative_error: f64,
    pub passed: bool,
}

pub const DERIVATIVE_REL_TOL: f64 = 1e-5;

/// Checks `∂_x f_{n,1}(y; x) = n f_{n,1}(y; x)` and, for `k ≥ 2`,
/// `∂_x f_{n,k}(y; x) = (n − k + 1)(f_{n,k}(y; x) − f_{n,k−1}(y; x))`.
///
/// The error is relative to the larger of the two sides and the scale
/// `(n − k + 1)(f_{n,k} + f_{n,k−1})`, which keeps points where the right
/// side crosses zero meaningful.
pub fn derivative_identity_check(n: usize, k: usize, y: f64, x: f64) -> Result<DerivativeCheck> {
    if k == 0 || k >= n.max(2) {
        return Err(Error::Range(format!("need 1 <= k <= n - 1, got n = {n}, k = {k}")));
    }
    let density = |order: usize, at: f64| order_statistic_density(n, order, y, at);
    let (finite_difference, identity, scale) = if y <= x {
        (0.0, 0.0, 0.0)
    } else {
        let h = 1e-6 * x.abs().max(1.0);
        let fd = (density(k, x + h)? - density(k, x - h)?) / (2.0 * h);
        let fk = density(k, x)?;
        if k == 1 {
            (fd, n as f64 * fk, n as f64 * fk)
        } else {
            let prev = density(k - 1, x)?;
            let c = (n - k + 1) as f64;
            (fd, c * (fk - prev), c * (fk + prev))
        }
    };
    let denom = finite_difference.abs().max(identity.abs()).max(scale);
    let relative_error = if denom == 0.0 {
        0.0
    } else {
        (finite_difference - identity).abs() / denom
    };
    Ok(DerivativeCheck {
        n,
        k,
        y,
        x,
        finite_difference,
        identity,
        relative_error,
        passed: relative_error <= DERIVATIVE_REL_TOL,
    })
}

/// `|χ(x) − e^{iθ_k} ∫_x^a χ(y) f_{n,k}(y; x) dy − Θ(x)|`, the residual of
/// the first-step functional equation at `x`.
pub fn functional_equation_residual(
    sol: &CharacteristicSolution,
    theta: &ThetaFunction,
    x: f64,
) -> Result<f64> {
    let (n, k, a) = (sol.n, sol.k, sol.a);
    // Integrand is a product of smooth exponentials; evaluation cannot fail
    // for y > x, so density errors map to zero contributions.
    let integral = quadrature::integrate(
        |y| sol.chi(y) * order_statistic_density(n, k, y, x).unwrap_or(0.0),
        x,
        a,
        1e-9,
    );
    let weight = Complex64::from_polar(1.0, roots::phase(n, k, sol.t));
    let rhs = weight * integral + theta.eval(x);
    Ok((sol.chi(x) - rhs).norm())
}
