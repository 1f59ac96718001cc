//! Seeded batch execution and result persistence.
//!
//! Run `m` always uses stream `m` of the master seed, and results are
//! collected by index, so the CSV bytes depend only on the configuration and
//! never on the worker count or scheduling.

use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;

use ams_core::stats::{ExperimentReport, ReportOptions, RunSummary};
use ams_core::{run_ams, AmsResult, Error};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::CliError;

pub const CSV_HEADER: [&str; 5] = ["run_index", "seed_index", "p_hat", "iterations", "corrector"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_index: u64,
    pub seed_index: u64,
    pub p_hat: f64,
    pub iterations: u64,
    pub corrector: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub run_index: u64,
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BatchOutcome {
    pub records: Vec<RunRecord>,
    pub failures: Vec<RunFailure>,
}

pub fn single_run(config: &ExperimentConfig, stream_index: u64) -> Result<AmsResult, Error> {
    run_ams(&config.params(stream_index), &config.distribution)
}

pub fn run_batch(config: &ExperimentConfig) -> Result<BatchOutcome, CliError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| CliError::Runtime(format!("cannot start worker pool: {e}")))?;
    let results: Vec<(u64, Result<AmsResult, Error>)> = pool.install(|| {
        (0..config.runs)
            .into_par_iter()
            .map(|m| (m, single_run(config, m)))
            .collect()
    });
    let mut outcome = BatchOutcome::default();
    for (run_index, result) in results {
        match result {
            Ok(r) => outcome.records.push(RunRecord {
                run_index,
                seed_index: r.seed.stream_index,
                p_hat: r.estimate,
                iterations: r.iterations,
                corrector: r.corrector,
            }),
            Err(e) => outcome.failures.push(RunFailure {
                run_index,
                kind: e.kind().to_string(),
                message: e.to_string(),
            }),
        }
    }
    Ok(outcome)
}

fn io_error(context: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{context}: {e}"))
}

/// Floats carry 17 significant digits so they parse back bit-for-bit.
pub fn write_csv<W: Write>(records: &[RunRecord], out: W) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_writer(out);
    let err = |e| io_error("writing CSV", e);
    writer.write_record(CSV_HEADER).map_err(err)?;
    for r in records {
        writer
            .write_record([
                r.run_index.to_string(),
                r.seed_index.to_string(),
                format!("{:.16e}", r.p_hat),
                r.iterations.to_string(),
                format!("{:.16e}", r.corrector),
            ])
            .map_err(err)?;
    }
    writer.flush().map_err(|e| io_error("writing CSV", e))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<RunRecord>, CliError> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers().map_err(|e| io_error("reading CSV", e))?;
    if headers.iter().ne(CSV_HEADER) {
        return Err(CliError::Runtime(format!(
            "unexpected CSV header {:?}, want {CSV_HEADER:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }
    reader
        .deserialize()
        .map(|row| row.map_err(|e| io_error("reading CSV", e)))
        .collect()
}

pub fn write_failures<W: Write>(failures: &[RunFailure], out: W) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_writer(out);
    for f in failures {
        writer.serialize(f).map_err(|e| io_error("writing failures", e))?;
    }
    if failures.is_empty() {
        writer
            .write_record(["run_index", "kind", "message"])
            .map_err(|e| io_error("writing failures", e))?;
    }
    writer.flush().map_err(|e| io_error("writing failures", e))
}

pub fn build_report(
    config: &ExperimentConfig,
    records: &[RunRecord],
    failures: usize,
) -> Result<ExperimentReport, CliError> {
    let runs: Vec<RunSummary> = records
        .iter()
        .map(|r| RunSummary {
            estimate: r.p_hat,
            iterations: r.iterations,
        })
        .collect();
    ExperimentReport::from_runs(
        &runs,
        failures,
        config.n,
        config.k,
        config.a,
        config.x,
        config.true_p,
        &ReportOptions::default(),
    )
    .map_err(|e| CliError::Runtime(format!("building report: {e}")))
}

/// Writes the report as JSON plus gnuplot-ready histogram and Q-Q files.
pub fn write_report(config: &ExperimentConfig, report: &ExperimentReport) -> Result<Vec<PathBuf>, CliError> {
    let json = serde_json::to_string_pretty(report).map_err(|e| io_error("encoding report", e))?;
    let mut hist = String::from("# bin_center count\n");
    for (i, count) in report.histogram.counts.iter().enumerate() {
        let center = 0.5 * (report.histogram.edges[i] + report.histogram.edges[i + 1]);
        hist.push_str(&format!("{center:.16e} {count}\n"));
    }
    let mut qq = String::from("# normal_quantile sample_quantile\n");
    for (theory, sample) in &report.qq {
        qq.push_str(&format!("{theory:.16e} {sample:.16e}\n"));
    }
    let files = [
        (config.report_path(), json + "\n"),
        (config.histogram_path(), hist),
        (config.qq_path(), qq),
    ];
    let mut written = Vec::new();
    for (path, body) in files {
        fs::write(&path, body).map_err(|e| io_error(&format!("writing {}", path.display()), e))?;
        written.push(path);
    }
    Ok(written)
}

fn create(path: &PathBuf) -> Result<fs::File, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_error(&format!("creating {}", dir.display()), e))?;
    }
    fs::File::create(path).map_err(|e| io_error(&format!("creating {}", path.display()), e))
}

/// Runs the batch and writes every artifact. Fails only on I/O or when no
/// run succeeded; individual run failures are recorded, not fatal.
pub fn run_experiment(config: &ExperimentConfig) -> Result<(BatchOutcome, ExperimentReport), CliError> {
    let outcome = run_batch(config)?;
    write_csv(&outcome.records, std::io::BufWriter::new(create(&config.csv_path())?))?;
    write_failures(&outcome.failures, create(&config.failures_path())?)?;
    let report = build_report(config, &outcome.records, outcome.failures.len())?;
    write_report(config, &report)?;
    Ok((outcome, report))
}
