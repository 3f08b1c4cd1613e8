use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qsqlab_cli::config::{apply_file_values, parse_config_text, ExperimentConfig};
use qsqlab_cli::{experiment_names, report_exit_code, run, CliError};

/// Runs one named experiment and writes a JSON report (plus CSV tables with --out).
///
/// Exit codes: 0 all checks pass, 1 some check failed, 2 usage or precondition error.
#[derive(Parser, Debug)]
#[command(name = "qsqlab", version, after_help = experiments_help())]
struct Args {
    /// Experiment name; may instead come from the config file.
    experiment: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    /// Required, here or in the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Ensemble for qac: coset or shadow.
    #[arg(long)]
    ensemble: Option<String>,
    /// Variant inside an experiment (variance-scan: scan or paulis).
    #[arg(long)]
    method: Option<String>,
    /// Output directory for report.json and tables/; without it the report goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat `key = value` file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn experiments_help() -> String {
    let names: Vec<&str> = experiment_names().collect();
    format!("Experiments: {}\nQSQLAB_THREADS caps the worker threads.", names.join(", "))
}

fn build_config(args: Args) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig {
        experiment: args.experiment.unwrap_or_default(),
        n: args.n,
        k: args.k,
        tau: args.tau,
        eps: args.eps,
        eta: args.eta,
        trials: args.trials,
        seed: args.seed.unwrap_or(0),
        samples: args.samples,
        ensemble: args.ensemble,
        method: args.method,
        out: args.out,
    };
    let mut seed_set = args.seed.is_some();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let values = parse_config_text(&text)?;
        apply_file_values(&mut cfg, &values, seed_set)?;
        seed_set |= values.contains_key("seed");
    }
    if cfg.experiment.is_empty() {
        return Err(CliError::Usage("no experiment given".into()));
    }
    if !seed_set {
        return Err(CliError::Usage("--seed is required".into()));
    }
    Ok(cfg)
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("QSQLAB_THREADS") {
        let threads: usize = v
            .parse()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| CliError::Usage(format!("QSQLAB_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = configure_threads().and_then(|_| build_config(args)).and_then(|cfg| {
        let report = run(&cfg)?;
        match &cfg.out {
            Some(dir) => report.write_to(dir)?,
            None => println!("{}", report.to_json()),
        }
        Ok(report)
    });
    match result {
        Ok(report) => {
            for c in report.failed_checks() {
                eprintln!(
                    "FAILED: {} (value {}, expected {} {} with tolerance {})",
                    c.claim,
                    c.value,
                    c.comparison.symbol(),
                    c.expected,
                    c.tolerance
                );
            }
            ExitCode::from(report_exit_code(&report) as u8)
        }
        Err(e) => {
            eprintln!("qsqlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
