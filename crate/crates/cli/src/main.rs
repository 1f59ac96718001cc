use std::path::PathBuf;
use std::process::ExitCode;

use ams_cli::config::{ExperimentConfig, WORKERS_ENV};
use ams_cli::experiment::{self, build_report, read_csv, run_experiment, single_run};
use ams_cli::{CliError, RunRecordOutput};
use ams_core::verify::{self, Level};
use clap::{Args, Parser, Subcommand};

/// Adaptive multilevel splitting for rare-event probabilities.
#[derive(Debug, Parser)]
#[command(name = "ams", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One seeded run, printed as a JSON record.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Stream index of the run to replay (run `m` of an experiment uses `m`).
        #[arg(long, default_value_t = 0)]
        stream_index: u64,
    },
    /// `M` independent runs; writes CSV, JSON report, histogram and Q-Q data.
    Experiment {
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Rebuild the report from an existing run CSV.
    Analyze {
        #[command(flatten)]
        config: ConfigArgs,
        /// CSV written by `ams experiment`.
        #[arg(long)]
        input: PathBuf,
        /// Failed runs to record in the report.
        #[arg(long, default_value_t = 0)]
        failures: usize,
    },
    /// Analytic verification suite.
    Verify {
        #[arg(long, default_value = "quick", value_parser = ["quick", "full"])]
        level: String,
    },
}

/// Flags override values read from `--config`.
#[derive(Debug, Args)]
struct ConfigArgs {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `exponential:RATE`, `uniform:LOW:HIGH` or `normal:MEAN:SD`.
    #[arg(long)]
    distribution: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Number of independent runs `M`.
    #[arg(long, short = 'M')]
    runs: Option<u64>,
    #[arg(long)]
    master_seed: Option<u64>,
    #[arg(long)]
    true_p: Option<f64>,
    /// Output prefix.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(d) = &self.distribution {
            cfg.set("distribution", d)?;
        }
        cfg.a = self.a.unwrap_or(cfg.a);
        cfg.x = self.x.unwrap_or(cfg.x);
        cfg.n = self.n.unwrap_or(cfg.n);
        cfg.k = self.k.unwrap_or(cfg.k);
        cfg.runs = self.runs.unwrap_or(cfg.runs);
        cfg.master_seed = self.master_seed.unwrap_or(cfg.master_seed);
        cfg.true_p = self.true_p.or(cfg.true_p);
        if let Some(out) = &self.output {
            cfg.output = out.clone();
        }
        cfg.workers = self.workers.unwrap_or(cfg.workers);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run {
            config,
            stream_index,
        } => {
            let cfg = config.resolve()?;
            let result = single_run(&cfg, stream_index).map_err(|e| match e {
                ams_core::Error::InvalidParams(_) => CliError::Usage(e.to_string()),
                _ => CliError::Runtime(format!("{}: {e}", e.kind())),
            })?;
            println!("{}", json(&RunRecordOutput::new(&cfg, &result)?)?);
        }
        Command::Experiment { config } => {
            let cfg = config.resolve()?;
            let (outcome, report) = run_experiment(&cfg)?;
            println!("{}", json(&report)?);
            for f in &outcome.failures {
                eprintln!("run {} failed ({}): {}", f.run_index, f.kind, f.message);
            }
            eprintln!(
                "{} runs, {} failed; wrote {}",
                cfg.runs,
                outcome.failures.len(),
                cfg.csv_path().display()
            );
        }
        Command::Analyze {
            config,
            input,
            failures,
        } => {
            let cfg = config.resolve()?;
            let file = std::fs::File::open(&input)
                .map_err(|e| CliError::Runtime(format!("cannot open {}: {e}", input.display())))?;
            let records = read_csv(std::io::BufReader::new(file))?;
            let report = build_report(&cfg, &records, failures)?;
            if config.output.is_some() {
                experiment::write_report(&cfg, &report)?;
            }
            println!("{}", json(&report)?);
        }
        Command::Verify { level } => {
            let level: Level = level.parse().map_err(|e: ams_core::Error| CliError::Usage(e.to_string()))?;
            let report = verify::run(level);
            for check in &report.checks {
                println!("{check}");
            }
            let failed = report.checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                return Err(CliError::Runtime(format!(
                    "{failed} of {} checks failed",
                    report.checks.len()
                )));
            }
            println!("all {} checks passed", report.checks.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
