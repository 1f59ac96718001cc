//! The adaptive multilevel splitting iteration in the idealized setting.
//!
//! `n` replicas are drawn from `L(X | X > x)`. At each step the `k`-th
//! smallest replica defines the level `Z`; if `Z ≥ a` the run stops,
//! otherwise the `k` smallest replicas are killed and redrawn from
//! `L(X | X > Z)`. With `J` completed steps and `C` the fraction of replicas
//! at or above `a` at the end, the estimator of `P(X > a | X > x)` is
//! `p̂ = C (1 − k/n)^J`, which is unbiased for every `n` and `k`.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::sampling::{lambda_transform, DistributionModel};
use crate::{Error, Result, RngStream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmsParams {
    /// Number of replicas, at least 2.
    pub n: usize,
    /// Replicas killed per iteration, in `1..n`.
    pub k: usize,
    /// Target threshold.
    pub a: f64,
    /// Initial level.
    pub x: f64,
    /// Safety cap on iterations; `None` selects [`AmsParams::default_cap`].
    pub max_iterations: Option<u64>,
    pub seed: RngStream,
    /// Keep the full level sequence in the result.
    pub record_levels: bool,
}

impl AmsParams {
    pub fn new(n: usize, k: usize, a: f64) -> Self {
        Self {
            n,
            k,
            a,
            x: 0.0,
            max_iterations: None,
            seed: RngStream::new(0, 0),
            record_levels: false,
        }
    }

    pub fn with_x(mut self, x: f64) -> Self {
        self.x = x;
        self
    }

    pub fn with_seed(mut self, seed: RngStream) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_iterations(mut self, cap: u64) -> Self {
        self.max_iterations = Some(cap);
        self
    }

    pub fn recording_levels(mut self) -> Self {
        self.record_levels = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParams(format!("n must be at least 2, got {}", self.n)));
        }
        if self.k == 0 || self.k >= self.n {
            return Err(Error::InvalidParams(format!(
                "k must lie in 1..={}, got {}",
                self.n - 1,
                self.k
            )));
        }
        if !self.a.is_finite() || !self.x.is_finite() {
            return Err(Error::InvalidParams("a and x must be finite".into()));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::InvalidParams("max_iterations must be positive".into()));
        }
        Ok(())
    }

    /// `ceil(20 n span / k) + 100`, with `span = max(a − x, Λ(a) − Λ(x), 1)`,
    /// about twenty times the mean iteration count.
    pub fn default_cap(&self, dist: &DistributionModel) -> u64 {
        let mut span = (self.a - self.x).max(1.0);
        if let (Ok(hi), Ok(lo)) = (lambda_transform(dist, self.a), lambda_transform(dist, self.x)) {
            span = span.max(hi - lo);
        }
        (20.0 * self.n as f64 * span / self.k as f64).ceil() as u64 + 100
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmsResult {
    /// Number of completed resampling iterations `J`.
    pub iterations: u64,
    /// Number of replicas at or above `a` at termination.
    pub survivors: usize,
    /// `C = survivors / n`.
    pub corrector: f64,
    /// `p̂ = C (1 − k/n)^J`.
    pub estimate: f64,
    /// Levels `Z¹, …, Z^{J+1}` when requested.
    pub levels: Option<Vec<f64>>,
    pub seed: RngStream,
}

/// `C (1 − k/n)^J`, the single place the estimator is assembled.
pub fn estimator(corrector: f64, n: usize, k: usize, iterations: u64) -> f64 {
    let ratio = 1.0 - k as f64 / n as f64;
    let mut pow = 1.0;
    let mut remaining = iterations;
    // powi takes i32; split very long runs.
    while remaining > i32::MAX as u64 {
        pow *= ratio.powi(i32::MAX);
        remaining -= i32::MAX as u64;
    }
    corrector * (pow * ratio.powi(remaining as i32))
}

#[derive(Debug, Clone, Copy)]
struct Replica {
    value: f64,
    id: u64,
}

impl PartialEq for Replica {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Replica {}

impl PartialOrd for Replica {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Replica {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then(self.id.cmp(&other.id))
    }
}

/// The `n` replica values, ordered by `(value, insertion id)`.
///
/// Stored as a min-heap: each iteration only needs the `k` smallest entries
/// and `k` insertions, so a step costs `O(k log n)`.
#[derive(Debug, Clone)]
pub struct ReplicaEnsemble {
    heap: BinaryHeap<Reverse<Replica>>,
    next_id: u64,
}

impl ReplicaEnsemble {
    pub fn new(values: impl IntoIterator<Item = f64>) -> Self {
        let mut ensemble = Self {
            heap: BinaryHeap::new(),
            next_id: 0,
        };
        ensemble.heap = values
            .into_iter()
            .enumerate()
            .map(|(i, value)| Reverse(Replica { value, id: i as u64 }))
            .collect();
        ensemble.next_id = ensemble.heap.len() as u64;
        ensemble
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn minimum(&self) -> Option<f64> {
        self.heap.peek().map(|r| r.0.value)
    }

    /// Values in ascending `(value, id)` order.
    pub fn sorted_values(&self) -> Vec<f64> {
        let mut v: Vec<Replica> = self.heap.iter().map(|r| r.0).collect();
        v.sort();
        v.into_iter().map(|r| r.value).collect()
    }

    pub fn count_at_least(&self, a: f64) -> usize {
        self.heap.iter().filter(|r| r.0.value >= a).count()
    }

    pub fn insert(&mut self, value: f64) {
        let id = self.next_id;
        self.next_id += 1;
        self.heap.push(Reverse(Replica { value, id }));
    }

    /// Removes the `k − 1` smallest replicas into `killed` (ascending) and
    /// returns the `k`-th order statistic, which stays in the ensemble.
    fn pop_below_kth(&mut self, k: usize, killed: &mut Vec<f64>) -> f64 {
        killed.clear();
        for _ in 1..k {
            let r = self.heap.pop().expect("ensemble holds more than k replicas");
            killed.push(r.0.value);
        }
        self.heap.peek().expect("ensemble holds more than k replicas").0.value
    }

    /// Replaces the current minimum with `value`.
    fn replace_min(&mut self, value: f64) {
        let id = self.next_id;
        self.next_id += 1;
        let mut top = self.heap.peek_mut().expect("ensemble is not empty");
        *top = Reverse(Replica { value, id });
    }
}

/// Runs the algorithm from `params.x` to `params.a`.
pub fn run_ams(params: &AmsParams, dist: &DistributionModel) -> Result<AmsResult> {
    params.validate()?;
    let mut rng = params.seed.rng();
    if params.x >= params.a {
        return Ok(trivial_result(params));
    }
    let mut initial = Vec::with_capacity(params.n);
    for _ in 0..params.n {
        initial.push(dist.sample_conditional(params.x, &mut rng)?);
    }
    iterate(params, dist, ReplicaEnsemble::new(initial), &mut rng)
}

/// Runs the algorithm from a given initial sample (which must hold `n`
/// values above `params.x`); subsequent draws come from `rng`.
pub fn run_ams_from_sample<R: Rng + ?Sized>(
    params: &AmsParams,
    dist: &DistributionModel,
    initial: &[f64],
    rng: &mut R,
) -> Result<AmsResult> {
    params.validate()?;
    if initial.len() != params.n {
        return Err(Error::InvalidParams(format!(
            "initial sample has {} values, expected {}",
            initial.len(),
            params.n
        )));
    }
    if params.x >= params.a {
        return Ok(trivial_result(params));
    }
    iterate(params, dist, ReplicaEnsemble::new(initial.iter().copied()), rng)
}

fn trivial_result(params: &AmsParams) -> AmsResult {
    AmsResult {
        iterations: 0,
        survivors: params.n,
        corrector: 1.0,
        estimate: 1.0,
        levels: params.record_levels.then(Vec::new),
        seed: params.seed,
    }
}

fn iterate<R: Rng + ?Sized>(
    params: &AmsParams,
    dist: &DistributionModel,
    mut ensemble: ReplicaEnsemble,
    rng: &mut R,
) -> Result<AmsResult> {
    let (n, k, a) = (params.n, params.k, params.a);
    let cap = params.max_iterations.unwrap_or_else(|| params.default_cap(dist));
    let mut levels = params.record_levels.then(Vec::new);
    let mut killed = Vec::with_capacity(k);
    let mut previous = params.x;
    let mut completed: u64 = 0;

    loop {
        let level = ensemble.pop_below_kth(k, &mut killed);
        if let Some(trace) = levels.as_mut() {
            trace.push(level);
        }
        if !(level > previous) {
            return Err(Error::LevelStalled {
                iteration: completed,
                previous,
                current: level,
            });
        }
        if level >= a {
            // Everything still in the heap is at or above the level.
            let survivors = ensemble.len() + killed.iter().filter(|v| **v >= a).count();
            let corrector = survivors as f64 / n as f64;
            return Ok(AmsResult {
                iterations: completed,
                survivors,
                corrector,
                estimate: estimator(corrector, n, k, completed),
                levels,
                seed: params.seed,
            });
        }
        if completed >= cap {
            return Err(Error::IterationCapExceeded { cap, level });
        }
        ensemble.replace_min(dist.sample_conditional(level, rng)?);
        for _ in 1..k {
            ensemble.insert(dist.sample_conditional(level, rng)?);
        }
        previous = level;
        completed += 1;
    }
}

/// Large-`n` order of the mean iteration count, `−n log(p) / k`.
pub fn expected_iterations(n: usize, k: usize, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("p must lie in (0, 1), got {p}")));
    }
    if k == 0 {
        return Err(Error::InvalidParams("k must be positive".into()));
    }
    Ok(-(n as f64) * p.ln() / k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{ks_two_sample, moments};

    const EXP1: DistributionModel = DistributionModel::Exponential { rate: 1.0 };

    fn batch(n: usize, k: usize, a: f64, m: u64, master: u64) -> Vec<AmsResult> {
        (0..m)
            .map(|i| {
                let p = AmsParams::new(n, k, a).with_seed(RngStream::new(master, i));
                run_ams(&p, &EXP1).unwrap()
            })
            .collect()
    }

    #[test]
    fn trivial_when_start_above_threshold() {
        let p = AmsParams::new(10, 3, 1.0).with_x(1.0);
        let r = run_ams(&p, &EXP1).unwrap();
        assert_eq!((r.iterations, r.corrector, r.estimate), (0, 1.0, 1.0));
        let r = run_ams(&AmsParams::new(10, 3, 1.0).with_x(2.5), &EXP1).unwrap();
        assert_eq!(r.estimate, 1.0);
    }

    #[test]
    fn rejects_bad_params() {
        for (n, k) in [(1, 1), (10, 0), (10, 10), (10, 11)] {
            let err = run_ams(&AmsParams::new(n, k, 1.0), &EXP1).unwrap_err();
            assert!(matches!(err, Error::InvalidParams(_)), "{n}, {k}");
        }
        let err = run_ams(&AmsParams::new(10, 1, f64::NAN), &EXP1).unwrap_err();
        assert!(matches!(err, Error::InvalidParams(_)));
    }

    #[test]
    fn cap_is_enforced() {
        let p = AmsParams::new(100, 1, 6.0).with_max_iterations(10);
        assert!(matches!(
            run_ams(&p, &EXP1),
            Err(Error::IterationCapExceeded { cap: 10, .. })
        ));
    }

    #[test]
    fn default_cap_formula() {
        let p = AmsParams::new(100, 10, 6.0);
        assert_eq!(p.default_cap(&EXP1), 1200 + 100);
        let u = DistributionModel::uniform(0.0, 1.0).unwrap();
        let pu = AmsParams::new(100, 10, 1.0 - (-6.0f64).exp());
        assert_eq!(pu.default_cap(&u), 1200 + 100);
    }

    #[test]
    fn result_invariants_hold() {
        for (n, k) in [(10, 1), (10, 9), (50, 7), (200, 20)] {
            for r in batch(n, k, 2.0, 200, 17) {
                assert!(r.estimate > 0.0 && r.estimate <= 1.0);
                assert_eq!(r.estimate, estimator(r.corrector, n, k, r.iterations));
                assert!(r.survivors >= n - k + 1);
                assert!(r.corrector >= (n - k + 1) as f64 / n as f64);
                if r.estimate == 1.0 {
                    assert_eq!(r.iterations, 0);
                    assert_eq!(r.survivors, n);
                }
            }
        }
    }

    #[test]
    fn levels_strictly_increase_and_cross_once() {
        let p = AmsParams::new(50, 5, 3.0)
            .with_seed(RngStream::new(3, 3))
            .recording_levels();
        let r = run_ams(&p, &EXP1).unwrap();
        let levels = r.levels.unwrap();
        assert_eq!(levels.len() as u64, r.iterations + 1);
        assert!(levels.windows(2).all(|w| w[0] < w[1]));
        assert!(levels[..levels.len() - 1].iter().all(|z| *z < 3.0));
        assert!(*levels.last().unwrap() >= 3.0);
    }

    #[test]
    fn same_seed_same_result() {
        let p = AmsParams::new(100, 10, 4.0).with_seed(RngStream::new(8, 21));
        assert_eq!(run_ams(&p, &EXP1).unwrap(), run_ams(&p, &EXP1).unwrap());
    }

    #[test]
    fn initial_order_is_irrelevant() {
        let params = AmsParams::new(40, 6, 3.0);
        let mut rng = RngStream::new(12, 0).rng();
        let mut initial: Vec<f64> = (0..40)
            .map(|_| EXP1.sample_conditional(0.0, &mut rng).unwrap())
            .collect();
        let reference = {
            let mut r = RngStream::new(12, 1).rng();
            run_ams_from_sample(&params, &EXP1, &initial, &mut r).unwrap()
        };
        for shift in [1, 7, 19] {
            initial.rotate_left(shift);
            initial.swap(0, 5);
            let mut r = RngStream::new(12, 1).rng();
            let got = run_ams_from_sample(&params, &EXP1, &initial, &mut r).unwrap();
            assert_eq!(
                (got.iterations, got.corrector, got.estimate),
                (reference.iterations, reference.corrector, reference.estimate)
            );
        }
    }

    #[test]
    fn ensemble_kills_k_smallest() {
        let mut e = ReplicaEnsemble::new([5.0, 1.0, 4.0, 2.0, 3.0]);
        let mut killed = Vec::new();
        let z = e.pop_below_kth(3, &mut killed);
        assert_eq!(z, 3.0);
        assert_eq!(killed, vec![1.0, 2.0]);
        e.replace_min(7.0);
        e.insert(3.5);
        e.insert(6.0);
        assert_eq!(e.sorted_values(), vec![3.5, 4.0, 5.0, 6.0, 7.0]);
        assert_eq!(e.count_at_least(5.0), 3);
    }

    #[test]
    fn ensemble_breaks_ties_by_insertion() {
        let mut e = ReplicaEnsemble::new([1.0, 1.0, 1.0, 2.0]);
        let mut killed = Vec::new();
        assert_eq!(e.pop_below_kth(2, &mut killed), 1.0);
        assert_eq!(killed, vec![1.0]);
        assert_eq!(e.len(), 3);
    }

    #[test]
    fn unbiased_on_small_grid() {
        let target = (-2.0f64).exp();
        for (i, (n, k)) in [(10, 1), (10, 3), (50, 10), (100, 25)].into_iter().enumerate() {
            let estimates: Vec<f64> = batch(n, k, 2.0, 200_000, 100 + i as u64)
                .iter()
                .map(|r| r.estimate)
                .collect();
            let m = moments(&estimates);
            let se = (m.variance / estimates.len() as f64).sqrt();
            assert!(
                (m.mean - target).abs() <= 4.0 * se,
                "(n, k) = ({n}, {k}): mean {} se {se}",
                m.mean
            );
        }
    }

    #[test]
    fn expected_iteration_formula() {
        let p = (-6.0f64).exp();
        assert!((expected_iterations(100, 10, p).unwrap() - 60.0).abs() < 1e-12);
        assert!((expected_iterations(100, 1, p).unwrap() - 600.0).abs() < 1e-12);
        assert!(expected_iterations(100, 1, 0.0).is_err());
        assert!(expected_iterations(100, 1, 1.0).is_err());
    }

    #[test]
    fn mean_iterations_near_asymptote() {
        let runs = batch(1000, 10, 6.0, 10_000, 5);
        let mean = runs.iter().map(|r| r.iterations as f64).sum::<f64>() / runs.len() as f64;
        assert!((mean - 600.0).abs() < 30.0, "mean J = {mean}");
    }

    #[test]
    fn uniform_and_exponential_laws_agree() {
        let u = DistributionModel::uniform(0.0, 1.0).unwrap();
        let a_u = 1.0 - (-3.0f64).exp();
        let m = 5_000;
        let from_u: Vec<f64> = (0..m)
            .map(|i| {
                let p = AmsParams::new(100, 10, a_u).with_seed(RngStream::new(61, i));
                run_ams(&p, &u).unwrap().estimate
            })
            .collect();
        let from_e: Vec<f64> = batch(100, 10, 3.0, m, 62).iter().map(|r| r.estimate).collect();
        let ks = ks_two_sample(&from_u, &from_e);
        assert!(ks.p_value > 1e-3, "{ks:?}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn estimate_in_unit_interval(
                n in 2usize..60,
                kfrac in 0.0f64..1.0,
                a in 0.0f64..4.0,
                seed in any::<u64>(),
            ) {
                let k = 1 + ((n - 1) as f64 * kfrac) as usize;
                let k = k.min(n - 1);
                let p = AmsParams::new(n, k, a).with_seed(RngStream::new(seed, 0));
                let r = run_ams(&p, &EXP1).unwrap();
                prop_assert!(r.estimate > 0.0 && r.estimate <= 1.0);
                prop_assert_eq!(r.estimate, estimator(r.corrector, n, k, r.iterations));
                prop_assert!(r.survivors > n - k);
            }
        }
    }
}
