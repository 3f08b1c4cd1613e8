//! Experiment parameters from command-line flags and flat `key = value` files.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::CliError;

/// Keys accepted in a config file. `ensemble` and `method` select variants
/// inside some experiments.
pub const CONFIG_KEYS: &[&str] =
    &["experiment", "n", "k", "tau", "eps", "eta", "trials", "seed", "samples", "out", "ensemble", "method"];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub tau: Option<f64>,
    pub eps: Option<f64>,
    pub eta: Option<f64>,
    pub trials: Option<usize>,
    pub seed: u64,
    pub samples: Option<usize>,
    pub ensemble: Option<String>,
    pub method: Option<String>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(experiment: &str, seed: u64) -> Self {
        ExperimentConfig { experiment: experiment.to_string(), seed, ..Default::default() }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = Some(tau);
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = Some(eps);
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = Some(eta);
        self
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = Some(trials);
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = Some(samples);
        self
    }

    pub fn with_ensemble(mut self, ensemble: &str) -> Self {
        self.ensemble = Some(ensemble.to_string());
        self
    }
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", lineno + 1)))?;
        let key = key.trim();
        if !CONFIG_KEYS.contains(&key) {
            return Err(CliError::Usage(format!("config line {}: unknown key {key:?}", lineno + 1)));
        }
        if out.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(CliError::Usage(format!("config line {}: duplicate key {key:?}", lineno + 1)));
        }
    }
    Ok(out)
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| CliError::Usage(format!("invalid value {value:?} for {key}")))
}

/// Fills every field of `cfg` still unset from the file values.
pub fn apply_file_values(cfg: &mut ExperimentConfig, values: &BTreeMap<String, String>, seed_set: bool) -> Result<(), CliError> {
    for (key, v) in values {
        match key.as_str() {
            "experiment" if cfg.experiment.is_empty() => cfg.experiment = v.clone(),
            "n" if cfg.n.is_none() => cfg.n = Some(parse(key, v)?),
            "k" if cfg.k.is_none() => cfg.k = Some(parse(key, v)?),
            "tau" if cfg.tau.is_none() => cfg.tau = Some(parse(key, v)?),
            "eps" if cfg.eps.is_none() => cfg.eps = Some(parse(key, v)?),
            "eta" if cfg.eta.is_none() => cfg.eta = Some(parse(key, v)?),
            "trials" if cfg.trials.is_none() => cfg.trials = Some(parse(key, v)?),
            "samples" if cfg.samples.is_none() => cfg.samples = Some(parse(key, v)?),
            "seed" if !seed_set => cfg.seed = parse(key, v)?,
            "ensemble" if cfg.ensemble.is_none() => cfg.ensemble = Some(v.clone()),
            "method" if cfg.method.is_none() => cfg.method = Some(v.clone()),
            "out" if cfg.out.is_none() => cfg.out = Some(PathBuf::from(v)),
            _ => {}
        }
    }
    Ok(())
}
