//! Run configuration: command-line flags layered over an optional JSON file.

use std::path::{Path, PathBuf};

use cfmoll::{DistributionSpec, Grid, MollificationParams};
use clap::Args;
use serde::Deserialize;

use crate::CliError;

/// Flags shared by every subcommand. Each one overrides the matching key of `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON config file; keys mirror the long flag names with underscores.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Distribution spec file (a single spec or an array); repeatable.
    #[arg(long, global = true, value_name = "FILE")]
    pub spec: Vec<PathBuf>,
    /// Target distribution spec file (converge).
    #[arg(long, global = true, value_name = "FILE")]
    pub target: Option<PathBuf>,
    /// Lattice as "min:max:count[,min:max:count...]".
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Mollifier scale (mollify).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub sigma: Option<f64>,
    /// Comma-separated increasing k values; σ_k = 1/k.
    #[arg(long, global = true, value_name = "K,K,...")]
    pub k_schedule: Option<String>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Output prefix; writes <prefix>.csv and <prefix>.json. Stdout if absent.
    #[arg(long, global = true, value_name = "PREFIX")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Caps the worker pool.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub tail_tol: Option<f64>,
    /// Allow direct inversion of a CF whose integrability is unknown.
    #[arg(long, global = true)]
    pub allow_unknown_integrability: bool,
    /// Monte Carlo cross-check sample count (mollify).
    #[arg(long, global = true)]
    pub mc_samples: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    spec: Vec<PathBuf>,
    target: Option<PathBuf>,
    grid: Option<String>,
    sigma: Option<f64>,
    k_schedule: Option<Vec<u64>>,
    epsilon: Option<f64>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    threads: Option<usize>,
    tail_tol: Option<f64>,
    allow_unknown_integrability: Option<bool>,
    mc_samples: Option<usize>,
    params: Option<MollificationParams>,
}

/// Fully merged configuration.
#[derive(Debug)]
pub struct RunConfig {
    pub spec: Vec<PathBuf>,
    pub target: Option<PathBuf>,
    pub grid: Option<String>,
    pub sigma: Option<f64>,
    pub k_schedule: Option<Vec<u64>>,
    pub epsilon: Option<f64>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub threads: Option<usize>,
    pub mc_samples: Option<usize>,
    pub params: MollificationParams,
}

fn rebase(base: &Path, p: PathBuf) -> PathBuf {
    if p.is_relative() {
        base.join(p)
    } else {
        p
    }
}

pub fn parse_k_schedule(text: &str) -> Result<Vec<u64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| CliError::usage(format!("bad k value {s:?} in --k-schedule")))
        })
        .collect()
}

impl RunConfig {
    /// Paths inside a config file are relative to the file's directory.
    pub fn resolve(flags: Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
                let mut cfg: FileConfig = serde_json::from_str(&text)
                    .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))?;
                let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
                cfg.spec = cfg.spec.into_iter().map(|p| rebase(&base, p)).collect();
                cfg.target = cfg.target.map(|p| rebase(&base, p));
                cfg.out = cfg.out.map(|p| rebase(&base, p));
                cfg
            }
            None => FileConfig::default(),
        };

        let mut params = file.params.unwrap_or_default();
        if let Some(t) = flags.tail_tol.or(file.tail_tol) {
            params.tail_tol = t;
        }
        if flags.allow_unknown_integrability || file.allow_unknown_integrability == Some(true) {
            params.allow_unknown_integrability = true;
        }
        params.validate()?;

        let k_schedule = match flags.k_schedule {
            Some(text) => Some(parse_k_schedule(&text)?),
            None => file.k_schedule,
        };
        Ok(RunConfig {
            spec: if flags.spec.is_empty() { file.spec } else { flags.spec },
            target: flags.target.or(file.target),
            grid: flags.grid.or(file.grid),
            sigma: flags.sigma.or(file.sigma),
            k_schedule,
            epsilon: flags.epsilon.or(file.epsilon),
            out: flags.out.or(file.out),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            threads: flags.threads.or(file.threads),
            mc_samples: flags.mc_samples.or(file.mc_samples),
            params,
        })
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        let text = self.grid.as_deref().ok_or_else(|| CliError::usage("--grid is required"))?;
        Ok(Grid::parse(text)?)
    }

    /// Every spec from every `--spec` file, in order.
    pub fn specs(&self) -> Result<Vec<DistributionSpec>, CliError> {
        if self.spec.is_empty() {
            return Err(CliError::usage("at least one --spec is required"));
        }
        let mut out = Vec::new();
        for path in &self.spec {
            out.extend(DistributionSpec::load_many(path)?);
        }
        Ok(out)
    }

    pub fn single_spec(&self) -> Result<DistributionSpec, CliError> {
        let mut specs = self.specs()?;
        if specs.len() != 1 {
            return Err(CliError::usage(format!("expected exactly one spec, got {}", specs.len())));
        }
        Ok(specs.remove(0))
    }

    pub fn target_spec(&self) -> Result<DistributionSpec, CliError> {
        let path = self.target.as_ref().ok_or_else(|| CliError::usage("--target is required"))?;
        let mut specs = DistributionSpec::load_many(path)?;
        if specs.len() != 1 {
            return Err(CliError::usage(format!("--target must hold one spec, got {}", specs.len())));
        }
        Ok(specs.remove(0))
    }
}
