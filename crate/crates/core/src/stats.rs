//! Empirical statistics for checking normality of Monte Carlo batches.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Standard normal CDF, accurate to well below `1e-12` absolute.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Standard normal quantile `Φ⁻¹(q)`.
///
/// Acklam's rational approximation followed by one Newton step on
/// [`normal_cdf`]. The computation is done in the lower tail and mirrored,
/// so `1 - q` never loses precision.
pub fn normal_quantile(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!(
            "normal quantile requires q in (0, 1), got {q}"
        )));
    }
    if q > 0.5 {
        return Ok(-lower_quantile(1.0 - q));
    }
    Ok(lower_quantile(q))
}

fn lower_quantile(q: f64) -> f64 {
    if q == 0.5 {
        return 0.0;
    }
    let x = acklam(q);
    x - (normal_cdf(x) - q) / normal_pdf(x)
}

fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Pairwise summation; the association order depends only on the length.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 32 {
        return values.iter().sum();
    }
    let (lo, hi) = values.split_at(values.len() / 2);
    pairwise_sum(lo) + pairwise_sum(hi)
}

fn pairwise_sum_complex(values: &[Complex64]) -> Complex64 {
    if values.len() <= 32 {
        return values.iter().sum();
    }
    let (lo, hi) = values.split_at(values.len() / 2);
    pairwise_sum_complex(lo) + pairwise_sum_complex(hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    /// Unbiased (`M - 1`) sample variance.
    pub variance: f64,
    /// Moment skewness `m3 / m2^{3/2}`.
    pub skewness: f64,
}

pub fn moments(values: &[f64]) -> Moments {
    let m = values.len() as f64;
    let mean = pairwise_sum(values) / m;
    let centered: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let sq: Vec<f64> = centered.iter().map(|c| c * c).collect();
    let cube: Vec<f64> = centered.iter().map(|c| c * c * c).collect();
    let m2 = pairwise_sum(&sq) / m;
    let m3 = pairwise_sum(&cube) / m;
    let variance = if values.len() > 1 {
        pairwise_sum(&sq) / (m - 1.0)
    } else {
        0.0
    };
    let skewness = if m2 > 0.0 { m3 / m2.powf(1.5) } else { 0.0 };
    Moments {
        mean,
        variance,
        skewness,
    }
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Type-7 (linear interpolation) quantile of an ascending slice.
pub fn quantile_sorted(sorted: &[f64], prob: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let h = (sorted.len() - 1) as f64 * prob.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// The sample `√n (p̂_m − p) / √(−p² log p)`, which is asymptotically `N(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSample {
    values: Vec<f64>,
    pub n: usize,
    pub k: usize,
    pub a: f64,
    pub p: f64,
}

impl NormalizedSample {
    pub fn new(estimates: &[f64], n: usize, k: usize, a: f64, p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("reference probability {p} not in (0, 1)")));
        }
        if estimates.len() < 2 {
            return Err(Error::InvalidParams(format!(
                "normalized sample needs at least 2 values, got {}",
                estimates.len()
            )));
        }
        let scale = (n as f64).sqrt() / (-p * p * p.ln()).sqrt();
        let values: Vec<f64> = estimates.iter().map(|e| (e - p) * scale).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("normalized sample has non-finite values".into()));
        }
        Ok(Self { values, n, k, a, p })
    }

    /// Wraps values that are already normalized.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(
                "normalized sample needs at least 2 finite values".into(),
            ));
        }
        Ok(Self {
            values,
            n: 0,
            k: 0,
            a: f64::NAN,
            p: f64::NAN,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// One-sample KS distance `sup |F_M − cdf|`.
pub fn ks_statistic_against(values: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let s = sorted(values);
    let m = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &v) in s.iter().enumerate() {
        let f = cdf(v);
        let below = i as f64 / m;
        let above = (i + 1) as f64 / m;
        d = d.max((f - below).abs()).max((above - f).abs());
    }
    d
}

/// KS distance between the normalized sample and `N(0, 1)`.
pub fn ks_statistic(sample: &NormalizedSample) -> f64 {
    ks_statistic_against(sample.values(), normal_cdf)
}

/// Asymptotic Kolmogorov survival function `P(K > λ)`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-17 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// p-value of a one-sample KS statistic `d` over `m` points, using the
/// small-sample correction `(√m + 0.12 + 0.11/√m) d`.
pub fn ks_p_value(d: f64, m: usize) -> f64 {
    let en = (m as f64).sqrt();
    kolmogorov_survival((en + 0.12 + 0.11 / en) * d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSampleKs {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sample KS test. Ties across the samples are handled by stepping over
/// whole runs of equal values before measuring the gap.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> TwoSampleKs {
    let sa = sorted(a);
    let sb = sorted(b);
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < sa.len() && j < sb.len() {
        let v = sa[i].min(sb[j]);
        while i < sa.len() && sa[i] <= v {
            i += 1;
        }
        while j < sb.len() && sb[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let effective = (na * nb / (na + nb)).round() as usize;
    TwoSampleKs {
        statistic: d,
        p_value: ks_p_value(d, effective.max(1)),
    }
}

/// Q-Q pairs `(Φ⁻¹((i − 0.5)/points), empirical quantile)`, `i = 1..=points`.
pub fn qq_data(sample: &NormalizedSample, points: usize) -> Result<Vec<(f64, f64)>> {
    qq_pairs(sample.values(), points)
}

pub fn qq_pairs(values: &[f64], points: usize) -> Result<Vec<(f64, f64)>> {
    if points == 0 || points > values.len() {
        return Err(Error::InvalidParams(format!(
            "Q-Q points must be in 1..={}, got {points}",
            values.len()
        )));
    }
    let s = sorted(values);
    (1..=points)
        .map(|i| {
            let prob = (i as f64 - 0.5) / points as f64;
            Ok((normal_quantile(prob)?, quantile_sorted(&s, prob)))
        })
        .collect()
}

/// `(1/M) Σ exp(i t v_m)`.
pub fn empirical_char_function(values: &[f64], t: f64) -> Complex64 {
    let terms: Vec<Complex64> = values
        .iter()
        .map(|v| {
            let (s, c) = (t * v).sin_cos();
            Complex64::new(c, s)
        })
        .collect();
    pairwise_sum_complex(&terms) / values.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `counts.len() + 1` ascending edges.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Binning {
    /// Bin width `2 IQR / M^{1/3}`.
    #[default]
    FreedmanDiaconis,
    Fixed(usize),
}

const MAX_BINS: usize = 10_000;

pub fn histogram(values: &[f64], binning: Binning) -> Histogram {
    let s = sorted(values);
    let (lo, hi) = (s[0], s[s.len() - 1]);
    let bins = match binning {
        Binning::Fixed(b) => b.max(1),
        Binning::FreedmanDiaconis => {
            let iqr = quantile_sorted(&s, 0.75) - quantile_sorted(&s, 0.25);
            let width = 2.0 * iqr / (s.len() as f64).cbrt();
            if width > 0.0 && hi > lo {
                (((hi - lo) / width).ceil() as usize).clamp(1, MAX_BINS)
            } else {
                1
            }
        }
    };
    let span = if hi > lo { hi - lo } else { 1.0 };
    let edges: Vec<f64> = (0..=bins)
        .map(|i| lo + span * i as f64 / bins as f64)
        .collect();
    let mut counts = vec![0u64; bins];
    for v in &s {
        let idx = (((v - lo) / span) * bins as f64).floor() as usize;
        counts[idx.min(bins - 1)] += 1;
    }
    Histogram { edges, counts }
}

/// One run as seen by the report builder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub estimate: f64,
    pub iterations: u64,
}

/// Aggregate over `M` independent AMS runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub runs: usize,
    pub n: usize,
    pub k: usize,
    pub a: f64,
    pub x: f64,
    /// Probability used for normalization: the true value when supplied,
    /// the plug-in mean otherwise.
    pub reference_p: f64,
    pub reference_is_true_p: bool,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub standard_error: f64,
    /// `n · Var(p̂)`, to compare against `−p² log p`.
    pub scaled_variance: f64,
    pub asymptotic_variance: Option<f64>,
    pub ks_statistic: Option<f64>,
    pub histogram: Histogram,
    pub qq: Vec<(f64, f64)>,
    /// Fraction of 95% plug-in intervals containing the true `p`.
    pub ci_coverage: Option<f64>,
    pub mean_iterations: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    pub binning: Binning,
    pub qq_points: usize,
    pub alpha: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            binning: Binning::default(),
            qq_points: 100,
            alpha: 0.05,
        }
    }
}

impl ExperimentReport {
    #[allow(clippy::too_many_arguments)]
    pub fn from_runs(
        runs: &[RunSummary],
        failures: usize,
        n: usize,
        k: usize,
        a: f64,
        x: f64,
        true_p: Option<f64>,
        options: &ReportOptions,
    ) -> Result<Self> {
        if runs.is_empty() {
            return Err(Error::InvalidParams("no successful runs to report on".into()));
        }
        let estimates: Vec<f64> = runs.iter().map(|r| r.estimate).collect();
        let iterations: Vec<f64> = runs.iter().map(|r| r.iterations as f64).collect();
        let mom = moments(&estimates);
        let reference_p = true_p.unwrap_or(mom.mean);
        let normalized = NormalizedSample::new(&estimates, n, k, a, reference_p).ok();
        let normal_values: Vec<f64> = match &normalized {
            Some(s) => s.values().to_vec(),
            None => estimates.clone(),
        };
        let qq_points = options.qq_points.min(runs.len());
        let ci_coverage = match true_p {
            Some(p) => {
                let mut hits = 0usize;
                for e in &estimates {
                    if let Ok((lo, hi)) =
                        crate::analysis::confidence_interval(*e, n, options.alpha)
                    {
                        if lo <= p && p <= hi {
                            hits += 1;
                        }
                    }
                }
                Some(hits as f64 / runs.len() as f64)
            }
            None => None,
        };
        Ok(Self {
            runs: runs.len(),
            n,
            k,
            a,
            x,
            reference_p,
            reference_is_true_p: true_p.is_some(),
            mean: mom.mean,
            variance: mom.variance,
            skewness: mom.skewness,
            standard_error: (mom.variance / runs.len() as f64).sqrt(),
            scaled_variance: n as f64 * mom.variance,
            asymptotic_variance: crate::analysis::asymptotic_variance(reference_p).ok(),
            ks_statistic: normalized.as_ref().map(ks_statistic),
            histogram: histogram(&normal_values, options.binning),
            qq: qq_pairs(&normal_values, qq_points.max(1))?,
            ci_coverage,
            mean_iterations: pairwise_sum(&iterations) / runs.len() as f64,
            failures,
        })
    }
}
