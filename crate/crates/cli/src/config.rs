//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Every key may appear
//! at most once; unknown keys are rejected so typos do not silently fall back
//! to defaults.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use ams_core::{AmsParams, DistributionModel, RngStream};

use crate::CliError;

pub const WORKERS_ENV: &str = "AMS_WORKERS";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub distribution: DistributionModel,
    pub a: f64,
    pub x: f64,
    pub n: usize,
    pub k: usize,
    /// Number of independent runs `M`.
    pub runs: u64,
    pub master_seed: u64,
    /// Normalizes reports when known; the plug-in mean is used otherwise.
    pub true_p: Option<f64>,
    /// Output prefix: `<output>.csv`, `<output>.report.json`, ...
    pub output: PathBuf,
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            distribution: DistributionModel::Exponential { rate: 1.0 },
            a: 6.0,
            x: 0.0,
            n: 1000,
            k: 10,
            runs: 1000,
            master_seed: 0,
            true_p: None,
            output: PathBuf::from("ams"),
            workers: default_workers(),
        }
    }
}

/// `AMS_WORKERS` if set to a positive integer, else the available parallelism.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::Usage(format!("invalid value {value:?} for {key}: {e}")))
}

impl ExperimentConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let value = value.trim();
        match key.trim() {
            "distribution" => self.distribution = parse_value(key, value)?,
            "a" => self.a = parse_value(key, value)?,
            "x" => self.x = parse_value(key, value)?,
            "n" => self.n = parse_value(key, value)?,
            "k" => self.k = parse_value(key, value)?,
            "runs" | "M" | "m" => self.runs = parse_value(key, value)?,
            "master_seed" | "seed" => self.master_seed = parse_value(key, value)?,
            "true_p" => {
                self.true_p = match value {
                    "" | "none" => None,
                    v => Some(parse_value(key, v)?),
                }
            }
            "output" | "output_path" => self.output = PathBuf::from(value),
            "workers" => self.workers = parse_value(key, value)?,
            other => return Err(CliError::Usage(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut config = Self::default();
        let mut seen = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("line {}: expected `key = value`, got {line:?}", lineno + 1))
            })?;
            let key = key.trim();
            let canonical = match key {
                "M" | "m" => "runs",
                "seed" => "master_seed",
                "output_path" => "output",
                k => k,
            };
            if seen.contains(&canonical) {
                return Err(CliError::Usage(format!("line {}: duplicate key {key:?}", lineno + 1)));
            }
            config.set(key, value)?;
            seen.push(canonical);
        }
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |msg: String| Err(CliError::Usage(msg));
        self.distribution
            .validated()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        if self.k == 0 || self.k >= self.n {
            return usage(format!("need 1 <= k <= n - 1, got n = {}, k = {}", self.n, self.k));
        }
        if self.runs == 0 {
            return usage("runs must be at least 1".into());
        }
        if self.workers == 0 {
            return usage("workers must be at least 1".into());
        }
        if let Some(p) = self.true_p {
            if !(p > 0.0 && p <= 1.0) {
                return usage(format!("true_p must lie in (0, 1], got {p}"));
            }
        }
        self.params(0)
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))
    }

    /// Parameters of run `stream_index`.
    pub fn params(&self, stream_index: u64) -> AmsParams {
        AmsParams::new(self.n, self.k, self.a)
            .with_x(self.x)
            .with_seed(RngStream::new(self.master_seed, stream_index))
    }

    pub fn csv_path(&self) -> PathBuf {
        self.with_suffix("csv")
    }

    pub fn report_path(&self) -> PathBuf {
        self.with_suffix("report.json")
    }

    pub fn histogram_path(&self) -> PathBuf {
        self.with_suffix("hist.dat")
    }

    pub fn qq_path(&self) -> PathBuf {
        self.with_suffix("qq.dat")
    }

    pub fn failures_path(&self) -> PathBuf {
        self.with_suffix("failures.csv")
    }

    fn with_suffix(&self, suffix: &str) -> PathBuf {
        let mut s = self.output.clone().into_os_string();
        s.push(".");
        s.push(suffix);
        PathBuf::from(s)
    }
}

/// Serializes to the same format [`ExperimentConfig::parse`] reads. Floats use
/// the shortest representation that round-trips.
impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "distribution = {}", self.distribution)?;
        writeln!(f, "a = {:?}", self.a)?;
        writeln!(f, "x = {:?}", self.x)?;
        writeln!(f, "n = {}", self.n)?;
        writeln!(f, "k = {}", self.k)?;
        writeln!(f, "runs = {}", self.runs)?;
        writeln!(f, "master_seed = {}", self.master_seed)?;
        match self.true_p {
            Some(p) => writeln!(f, "true_p = {p:?}")?,
            None => writeln!(f, "true_p = none")?,
        }
        writeln!(f, "output = {}", self.output.display())?;
        writeln!(f, "workers = {}", self.workers)
    }
}
