//! Distribution models and the reduction to the exponential case.
//!
//! Every continuous law maps to `Exp(1)` through the cumulative hazard
//! `Λ(x) = −log(1 − F(x))`. Conditional draws above a level use inversion of
//! the survival function for generic models and the memoryless shift
//! `level + Exp(1)/rate` for the exponential family.
//!
//! The order-statistic functions at the bottom are written for the
//! exponential case with the replicas started at `x`, i.e. for iid
//! `x + Exp(1)` draws.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Exp1, Open01};
use serde::{Deserialize, Serialize};

use crate::stats::{normal_cdf, normal_quantile};
use crate::{Error, Result};

/// Survival probabilities at or below this are treated as beyond the tail.
pub const MIN_SURVIVAL: f64 = 1e-300;

/// Redraws allowed when rounding lands a conditional draw on the level.
const MAX_REDRAWS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum DistributionModel {
    Exponential { rate: f64 },
    Uniform { low: f64, high: f64 },
    Normal { mean: f64, std_dev: f64 },
}

impl Default for DistributionModel {
    fn default() -> Self {
        DistributionModel::Exponential { rate: 1.0 }
    }
}

impl DistributionModel {
    pub fn exponential(rate: f64) -> Result<Self> {
        Self::Exponential { rate }.validated()
    }

    pub fn uniform(low: f64, high: f64) -> Result<Self> {
        Self::Uniform { low, high }.validated()
    }

    pub fn normal(mean: f64, std_dev: f64) -> Result<Self> {
        Self::Normal { mean, std_dev }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let ok = match self {
            Self::Exponential { rate } => rate.is_finite() && rate > 0.0,
            Self::Uniform { low, high } => low.is_finite() && high.is_finite() && low < high,
            Self::Normal { mean, std_dev } => {
                mean.is_finite() && std_dev.is_finite() && std_dev > 0.0
            }
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::InvalidParams(format!("invalid distribution {self}")))
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Exponential { .. } => "exponential",
            Self::Uniform { .. } => "uniform",
            Self::Normal { .. } => "normal",
        }
    }

    pub fn cdf(&self, z: f64) -> f64 {
        match *self {
            Self::Exponential { rate } => {
                if z > 0.0 {
                    -(-rate * z).exp_m1()
                } else {
                    0.0
                }
            }
            Self::Uniform { low, high } => ((z - low) / (high - low)).clamp(0.0, 1.0),
            Self::Normal { mean, std_dev } => normal_cdf((z - mean) / std_dev),
        }
    }

    /// `1 − F(z)`, computed without cancellation in the upper tail.
    pub fn survival(&self, z: f64) -> f64 {
        match *self {
            Self::Exponential { rate } => (-rate * z.max(0.0)).exp(),
            Self::Uniform { low, high } => ((high - z) / (high - low)).clamp(0.0, 1.0),
            Self::Normal { mean, std_dev } => normal_cdf(-(z - mean) / std_dev),
        }
    }

    pub fn inverse_cdf(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("inverse CDF needs u in (0, 1), got {u}")));
        }
        Ok(match *self {
            Self::Exponential { rate } => -(-u).ln_1p() / rate,
            Self::Uniform { low, high } => low + u * (high - low),
            Self::Normal { mean, std_dev } => mean + std_dev * normal_quantile(u)?,
        })
    }

    /// Inverse of [`survival`](Self::survival): the `z` with `1 − F(z) = s`.
    pub fn inverse_survival(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Domain(format!("inverse survival needs s in (0, 1), got {s}")));
        }
        Ok(match *self {
            Self::Exponential { rate } => -s.ln() / rate,
            Self::Uniform { low, high } => high - s * (high - low),
            Self::Normal { mean, std_dev } => mean - std_dev * normal_quantile(s)?,
        })
    }

    /// Draws from `L(X | X > level)`.
    pub fn sample_conditional<R: Rng + ?Sized>(&self, level: f64, rng: &mut R) -> Result<f64> {
        let tail = self.survival(level);
        if tail <= MIN_SURVIVAL {
            return Err(Error::Domain(format!(
                "cannot condition on X > {level}: tail probability {tail:e} is not representable"
            )));
        }
        for _ in 0..MAX_REDRAWS {
            let draw = match *self {
                Self::Exponential { rate } => {
                    level.max(0.0) + rng.sample::<f64, _>(Exp1) / rate
                }
                _ => {
                    let v: f64 = rng.sample(Open01);
                    self.inverse_survival(tail * v)?
                }
            };
            if draw > level {
                return Ok(draw);
            }
        }
        Err(Error::Domain(format!(
            "conditional draws above {level} keep rounding onto the level"
        )))
    }
}

impl fmt::Display for DistributionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exponential { rate } => write!(f, "exponential:{rate}"),
            Self::Uniform { low, high } => write!(f, "uniform:{low}:{high}"),
            Self::Normal { mean, std_dev } => write!(f, "normal:{mean}:{std_dev}"),
        }
    }
}

impl FromStr for DistributionModel {
    type Err = Error;

    /// Parses `exponential[:rate]`, `uniform[:low:high]` or
    /// `normal[:mean:std_dev]`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let family = parts.next().unwrap_or_default().to_ascii_lowercase();
        let params: Vec<f64> = parts
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidParams(format!("bad distribution parameter {p:?}")))
            })
            .collect::<Result<_>>()?;
        let model = match (family.as_str(), params.as_slice()) {
            ("exponential" | "exp", []) => Self::Exponential { rate: 1.0 },
            ("exponential" | "exp", [rate]) => Self::Exponential { rate: *rate },
            ("uniform", []) => Self::Uniform { low: 0.0, high: 1.0 },
            ("uniform", [low, high]) => Self::Uniform { low: *low, high: *high },
            ("normal" | "gaussian", []) => Self::Normal { mean: 0.0, std_dev: 1.0 },
            ("normal" | "gaussian", [mean, std_dev]) => Self::Normal {
                mean: *mean,
                std_dev: *std_dev,
            },
            _ => {
                return Err(Error::InvalidParams(format!(
                    "unknown distribution specification {s:?}"
                )))
            }
        };
        model.validated()
    }
}

/// `Λ(x) = −log(1 − F(x))`, the cumulative hazard.
pub fn lambda_transform(dist: &DistributionModel, x: f64) -> Result<f64> {
    if let DistributionModel::Exponential { rate } = *dist {
        return Ok(rate * x.max(0.0));
    }
    let tail = dist.survival(x);
    if tail <= MIN_SURVIVAL {
        return Err(Error::Domain(format!(
            "Λ({x}) undefined: tail probability {tail:e} is not representable"
        )));
    }
    Ok(-tail.ln())
}

/// Free-function form of [`DistributionModel::sample_conditional`].
pub fn sample_conditional<R: Rng + ?Sized>(
    dist: &DistributionModel,
    level: f64,
    rng: &mut R,
) -> Result<f64> {
    dist.sample_conditional(level, rng)
}

/// `log F(z)` and `log(1 − F(z))` for the `Exp(1)` law at `z > 0`.
fn exp_log_cdf_survival(z: f64) -> (f64, f64) {
    ((-(-z).exp_m1()).ln(), -z)
}

/// `F_{n,l}(y; x)`: probability that at least `l` of `n` iid `x + Exp(1)`
/// draws fall at or below `y`, i.e. the CDF of the `l`-th order statistic.
/// `l = 0` gives 1.
pub fn order_statistic_cdf(n: usize, l: usize, y: f64, x: f64) -> Result<f64> {
    if l > n {
        return Err(Error::Range(format!("order {l} exceeds sample size {n}")));
    }
    if l == 0 {
        return Ok(1.0);
    }
    if y <= x {
        return Ok(0.0);
    }
    let (log_f, log_s) = exp_log_cdf_survival(y - x);
    // Binomial tail Σ_{j ≥ l} C(n, j) F^j (1 − F)^{n−j}, terms in log space.
    let mut log_binom = ln_binomial(n, l);
    let mut total = 0.0;
    for j in l..=n {
        total += (log_binom + j as f64 * log_f + (n - j) as f64 * log_s).exp();
        if j < n {
            log_binom += ((n - j) as f64).ln() - ((j + 1) as f64).ln();
        }
    }
    Ok(total.min(1.0))
}

/// `f_{n,l}(y; x) = l C(n, l) F^{l−1} f (1 − F)^{n−l}` at `z = y − x`, the
/// density of the `l`-th order statistic of `n` iid `x + Exp(1)` draws.
pub fn order_statistic_density(n: usize, l: usize, y: f64, x: f64) -> Result<f64> {
    if l == 0 || l > n {
        return Err(Error::Range(format!("order {l} not in 1..={n}")));
    }
    let z = y - x;
    if z <= 0.0 {
        return Ok(0.0);
    }
    let (log_f, log_s) = exp_log_cdf_survival(z);
    // f(z) = e^{−z} = 1 − F(z), so the survival exponent picks up one more power.
    let log_density = (l as f64).ln()
        + ln_binomial(n, l)
        + (l - 1) as f64 * log_f
        + (n - l + 1) as f64 * log_s;
    Ok(log_density.exp())
}

pub(crate) fn ln_binomial(n: usize, j: usize) -> f64 {
    let j = j.min(n - j);
    (0..j)
        .map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln())
        .sum()
}
