//! Experiment harness behind the `ams` binary: configuration, seeded
//! parallel batches, CSV/JSON persistence and the verification entry point.

pub mod config;
pub mod experiment;

use ams_core::analysis::confidence_interval;
use ams_core::AmsResult;
use serde::Serialize;

pub use config::ExperimentConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

/// What `ams run` prints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecordOutput {
    pub distribution: String,
    pub n: usize,
    pub k: usize,
    pub a: f64,
    pub x: f64,
    pub master_seed: u64,
    pub stream_index: u64,
    pub p_hat: f64,
    pub iterations: u64,
    pub corrector: f64,
    pub survivors: usize,
    /// 95% plug-in interval; degenerate at `p̂ = 1`.
    pub ci_low: f64,
    pub ci_high: f64,
}

impl RunRecordOutput {
    pub fn new(config: &ExperimentConfig, result: &AmsResult) -> Result<Self, CliError> {
        let (ci_low, ci_high) = if result.estimate >= 1.0 {
            (1.0, 1.0)
        } else {
            confidence_interval(result.estimate, config.n, 0.05)
                .map_err(|e| CliError::Runtime(e.to_string()))?
        };
        Ok(Self {
            distribution: config.distribution.to_string(),
            n: config.n,
            k: config.k,
            a: config.a,
            x: config.x,
            master_seed: result.seed.master_seed,
            stream_index: result.seed.stream_index,
            p_hat: result.estimate,
            iterations: result.iterations,
            corrector: result.corrector,
            survivors: result.survivors,
            ci_low,
            ci_high,
        })
    }
}
