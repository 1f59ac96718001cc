//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs at full scale (about ten minutes on one core).

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use ams_cli::experiment::{run_batch, RunRecord};
use ams_cli::ExperimentConfig;
use ams_core::analysis::{asymptotic_variance, confidence_interval, k1_exact_law};
use ams_core::stats::{ks_statistic, ks_two_sample, moments, NormalizedSample};
use ams_core::verify::phi_limit_gaps;
use ams_core::DistributionModel;

const A: f64 = 6.0;

fn p_true() -> f64 {
    (-A).exp()
}

struct Batch {
    n: usize,
    k: usize,
    estimates: Vec<f64>,
    iterations: Vec<f64>,
    elapsed: Duration,
}

fn batch(distribution: DistributionModel, a: f64, n: usize, k: usize, runs: u64, seed: u64) -> Batch {
    let config = ExperimentConfig {
        distribution,
        a,
        x: 0.0,
        n,
        k,
        runs,
        master_seed: seed,
        true_p: None,
        workers: std::thread::available_parallelism().map_or(1, |w| w.get()),
        ..ExperimentConfig::default()
    };
    let start = Instant::now();
    let outcome = run_batch(&config).expect("valid configuration");
    let elapsed = start.elapsed();
    assert!(
        outcome.failures.is_empty(),
        "{} failed runs at (n, k) = ({n}, {k}): {:?}",
        outcome.failures.len(),
        outcome.failures.first()
    );
    let records: &[RunRecord] = &outcome.records;
    Batch {
        n,
        k,
        estimates: records.iter().map(|r| r.p_hat).collect(),
        iterations: records.iter().map(|r| r.iterations as f64).collect(),
        elapsed,
    }
}

fn exp_batch(n: usize, k: usize, runs: u64, seed: u64) -> Batch {
    batch(DistributionModel::Exponential { rate: 1.0 }, A, n, k, runs, seed)
}

impl Batch {
    fn mean_and_se(&self) -> (f64, f64) {
        let m = moments(&self.estimates);
        (m.mean, (m.variance / self.estimates.len() as f64).sqrt())
    }

    /// Empirical variance of `√n (p̂ − p)`.
    fn scaled_variance(&self) -> f64 {
        self.n as f64 * moments(&self.estimates).variance
    }

    fn ks(&self) -> f64 {
        let sample = NormalizedSample::new(&self.estimates, self.n, self.k, A, p_true()).unwrap();
        ks_statistic(&sample)
    }
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn report(id: u32, title: &str, outcome: Outcome, failures: &mut u32) {
    let tag = if outcome.passed { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {id}: {title} — {}", outcome.detail);
    if !outcome.passed {
        *failures += 1;
    }
}

fn main() -> ExitCode {
    // `cargo test` passes harness flags such as `--list`; nothing to list here.
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let p = p_true();
    let mut failures = 0;

    let b100_1 = exp_batch(100, 1, 100_000, 101);
    let b100_10 = exp_batch(100, 10, 100_000, 102);
    let b1e4_10 = exp_batch(10_000, 10, 10_000, 103);

    // 1. Unbiasedness.
    {
        let mut passed = true;
        let mut parts = Vec::new();
        let mut total = Duration::ZERO;
        for b in [&b100_1, &b100_10, &b1e4_10] {
            let (mean, se) = b.mean_and_se();
            let z = (mean - p).abs() / se;
            passed &= z <= 4.0;
            total += b.elapsed;
            parts.push(format!("(n={}, k={}, M={}) |mean−p|/SE = {z:.2}", b.n, b.k, b.estimates.len()));
        }
        passed &= total <= Duration::from_secs(300);
        parts.push(format!("runtime {:.0}s (limit 300s)", total.as_secs_f64()));
        report(1, "unbiasedness", Outcome { passed, detail: parts.join("; ") }, &mut failures);
    }

    // 2. CLT variance.
    let sigma2 = asymptotic_variance(p).unwrap();
    {
        let v = b1e4_10.scaled_variance();
        let rel = (v / sigma2 - 1.0).abs();
        let passed = rel <= 0.10 && b1e4_10.elapsed <= Duration::from_secs(900);
        let detail = format!(
            "n Var(p̂) = {v:.4e}, −p² log p = {sigma2:.4e}, relative gap {:.2}% (limit 10%), runtime {:.0}s",
            100.0 * rel,
            b1e4_10.elapsed.as_secs_f64()
        );
        report(2, "CLT variance", Outcome { passed, detail }, &mut failures);
    }

    // 3. Normality, and 4. k-independence of the limiting variance.
    let b1e4_1 = exp_batch(10_000, 1, 10_000, 104);
    let b1e4_100 = exp_batch(10_000, 100, 10_000, 105);
    let large = [&b1e4_1, &b1e4_10, &b1e4_100];
    {
        // k = 100 is not admissible at n = 100, so its pre-asymptotic
        // comparison point is n = 1000.
        let small = [
            exp_batch(100, 1, 10_000, 106),
            exp_batch(100, 10, 10_000, 107),
            exp_batch(1_000, 100, 10_000, 108),
        ];
        let mut passed = true;
        let mut parts = Vec::new();
        for (big, pre) in large.iter().zip(&small) {
            let (d_big, d_pre) = (big.ks(), pre.ks());
            passed &= d_big < 0.02 && d_pre > d_big;
            parts.push(format!(
                "k={}: D(n=10⁴) = {d_big:.4}, D(n={}) = {d_pre:.4}",
                big.k, pre.n
            ));
        }
        report(3, "normality", Outcome { passed, detail: parts.join("; ") }, &mut failures);
    }
    {
        let v: Vec<f64> = large.iter().map(|b| b.scaled_variance()).collect();
        let mut worst: f64 = 0.0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                worst = worst.max(v[i].max(v[j]) / v[i].min(v[j]) - 1.0);
            }
        }
        let detail = format!(
            "n Var(p̂) for k = 1, 10, 100: {:.4e}, {:.4e}, {:.4e}; worst pairwise gap {:.2}% (limit 15%)",
            v[0],
            v[1],
            v[2],
            100.0 * worst
        );
        report(4, "k-independence of the limit", Outcome { passed: worst <= 0.15, detail }, &mut failures);
    }

    // 5. k = 1 exact law.
    {
        let b = exp_batch(100, 1, 1_000_000, 109);
        let j = moments(&b.iterations);
        let dispersion = j.variance / j.mean;
        let law = k1_exact_law(100, A).unwrap();
        let var = moments(&b.estimates).variance;
        let var_rel = (var / law.var_phat - 1.0).abs();
        let passed = (598.0..=602.0).contains(&j.mean)
            && (0.97..=1.03).contains(&dispersion)
            && var_rel <= 0.03;
        let detail = format!(
            "E[J] = {:.3} (want [598, 602]), Var[J]/E[J] = {dispersion:.4} (want [0.97, 1.03]), \
             Var[p̂] = {var:.4e} vs p²(e^(a/n) − 1) = {:.4e} ({:.2}%, limit 3%)",
            j.mean,
            law.var_phat,
            100.0 * var_rel
        );
        report(5, "k = 1 exact law", Outcome { passed, detail }, &mut failures);
    }

    // 6. Analytic verification through the CLI.
    {
        let out = Command::new(env!("CARGO_BIN_EXE_ams"))
            .args(["verify", "--level", "full"])
            .output()
            .expect("ams binary runs");
        let text = String::from_utf8_lossy(&out.stdout);
        let required = [
            "ode_coefficient_duality",
            "root_residuals",
            "first_root_asymptote_n1e6",
            "functional_equation_residual",
            "chi_vs_monte_carlo",
        ];
        let all_listed = required
            .iter()
            .all(|name| text.lines().any(|l| l.starts_with("[PASS]") && l.contains(name)));
        let failed: Vec<&str> = text.lines().filter(|l| l.starts_with("[FAIL]")).collect();
        let passed = out.status.success() && all_listed;
        let detail = if passed {
            format!("{} checks passed", text.lines().filter(|l| l.starts_with("[PASS]")).count())
        } else {
            format!("exit {:?}; failing: {failed:?}", out.status.code())
        };
        report(6, "analytic verification (verify --level full)", Outcome { passed, detail }, &mut failures);
    }

    // 7. φ-limit trend.
    {
        let outcome = match phi_limit_gaps() {
            Ok(g) => Outcome {
                passed: g.windows(2).all(|w| w[1] < w[0]),
                detail: format!("|φ_n(1, 0) − e^(−1)| at n = 16, 32, 64: {g:.5?}"),
            },
            Err(e) => Outcome {
                passed: false,
                detail: e.to_string(),
            },
        };
        report(7, "φ-limit trend", outcome, &mut failures);
    }

    // 8. Coverage of 95% plug-in intervals over the first 1000 runs.
    {
        let runs = &b1e4_10.estimates[..1000];
        let hits = runs
            .iter()
            .filter(|&&e| {
                let (lo, hi) = confidence_interval(e, 10_000, 0.05).unwrap();
                lo <= p && p <= hi
            })
            .count();
        let coverage = hits as f64 / runs.len() as f64;
        let passed = (0.92..=0.98).contains(&coverage);
        let detail = format!("coverage {:.1}% over 1000 runs (want 95 ± 3%)", 100.0 * coverage);
        report(8, "confidence-interval coverage", Outcome { passed, detail }, &mut failures);
    }

    // 9. Reduction fidelity: Uniform and Exponential give the same law.
    {
        let uniform = batch(
            DistributionModel::Uniform { low: 0.0, high: 1.0 },
            -(-A).exp_m1(),
            1_000,
            10,
            10_000,
            110,
        );
        let exponential = exp_batch(1_000, 10, 10_000, 111);
        let ks = ks_two_sample(&uniform.estimates, &exponential.estimates);
        let detail = format!("two-sample D = {:.4}, p-value = {:.4} (need ≥ 0.001)", ks.statistic, ks.p_value);
        report(9, "reduction fidelity", Outcome { passed: ks.p_value >= 1e-3, detail }, &mut failures);
    }

    println!("acceptance: {} of 9 criteria passed", 9 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
