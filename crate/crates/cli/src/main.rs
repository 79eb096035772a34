//! `cfmoll`: batch front end for inversion, mollification and convergence reports.
//!
//! Exit status: 0 success, 2 invalid input or configuration, 3 numeric failure.

mod config;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cfmoll::converge::convergence_certificate;
use cfmoll::{
    invert_density_grid, l1_distance, make_cf, mollified_density_grid, mollified_histogram, selfcheck, CharFn,
    DensityField, DistributionSpec, Grid,
};
use clap::{Parser, Subcommand};
use serde_json::json;

use config::{Flags, RunConfig};

const CLT_NS: [u64; 3] = [4, 16, 64];
const CLT_GRID: &str = "-10:10:2001";
const CLT_K: u64 = 2;
const DEFAULT_EPSILON: f64 = 0.1;
const DEFAULT_K_SCHEDULE: [u64; 4] = [1, 2, 4, 8];

#[derive(Debug, Parser)]
#[command(name = "cfmoll", version, about = "Characteristic-function inversion and mollified convergence diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Density of an integrable CF by direct Fourier inversion.
    Invert,
    /// Density of the law convolved with N(0, σ²I).
    Mollify,
    /// Convergence report for a sequence of specs against --target.
    Converge,
    /// Built-in CLT example: standardized Rademacher sums against N(0,1).
    CltDemo,
    /// Closed-form invariant suite.
    Selfcheck,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(cfmoll::Error),
    Io(PathBuf, std::io::Error),
    Failed(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(cfmoll::Error::Numeric(_)) | CliError::Failed(_) => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "validation error: {m}"),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(p, e) => write!(f, "cannot write {}: {e}", p.display()),
            CliError::Failed(m) => write!(f, "{m}"),
        }
    }
}

impl From<cfmoll::Error> for CliError {
    fn from(e: cfmoll::Error) -> Self {
        CliError::Lib(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command, cli.flags) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cfmoll: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command, flags: Flags) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(flags)?;
    if let Some(n) = cfg.threads {
        if n == 0 {
            return Err(CliError::usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Failed(format!("cannot start worker pool: {e}")))?;
    }
    match command {
        Command::Invert => invert(&cfg),
        Command::Mollify => mollify(&cfg),
        Command::Converge => converge(&cfg),
        Command::CltDemo => clt_demo(&cfg),
        Command::Selfcheck => run_selfcheck(),
    }
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn to_stdout(text: &str) -> Result<(), CliError> {
    std::io::stdout()
        .lock()
        .write_all(text.as_bytes())
        .map_err(|e| CliError::Io(PathBuf::from("<stdout>"), e))
}

fn emit(cfg: &RunConfig, csv: &str, sidecar: &serde_json::Value) -> Result<(), CliError> {
    match &cfg.out {
        Some(prefix) => {
            write_file(&with_ext(prefix, "csv"), csv)?;
            let mut json = serde_json::to_string_pretty(sidecar).expect("sidecar serializes");
            json.push('\n');
            write_file(&with_ext(prefix, "json"), &json)
        }
        None => to_stdout(csv),
    }
}

/// Re-checks the field invariants before anything is written.
fn checked(field: DensityField, cfg: &RunConfig) -> Result<DensityField, CliError> {
    field.validate(cfg.params.negativity_tol)?;
    Ok(field)
}

fn invert(cfg: &RunConfig) -> Result<(), CliError> {
    let spec = cfg.single_spec()?;
    let grid = cfg.grid()?;
    let cf = make_cf(&spec)?;
    let field = checked(invert_density_grid(&cf, &grid, &cfg.params)?, cfg)?;
    if !field.normalized {
        eprintln!(
            "cfmoll: note: Riemann sum {:.6} is outside 1 ± 1e-3; the grid does not cover the mass",
            field.riemann_sum()
        );
    }
    let sidecar = field.sidecar(json!({
        "command": "invert",
        "spec": spec,
        "mollification": cfg.params,
    }));
    emit(cfg, &field.to_csv_string(), &sidecar)
}

fn mollify(cfg: &RunConfig) -> Result<(), CliError> {
    let spec = cfg.single_spec()?;
    let grid = cfg.grid()?;
    let sigma = cfg.sigma.ok_or_else(|| CliError::usage("--sigma is required"))?;
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(CliError::usage(format!("--sigma must be positive, got {sigma}")));
    }
    let cf = make_cf(&spec)?;
    let field = checked(mollified_density_grid(&cf, sigma, &grid, &cfg.params)?, cfg)?;
    let mut extra = json!({
        "command": "mollify",
        "spec": spec,
        "sigma": sigma,
        "mollification": cfg.params,
    });
    if let Some(n) = cfg.mc_samples {
        let hist = mollified_histogram(&spec, sigma, &grid, n, cfg.seed)?;
        extra["monte_carlo"] = json!({
            "samples": n,
            "seed": cfg.seed,
            "l1_vs_quadrature": l1_distance(&hist, &field)?,
        });
        if let Some(prefix) = &cfg.out {
            write_file(&with_ext(prefix, "mc.csv"), &hist.to_csv_string())?;
        }
    }
    emit(cfg, &field.to_csv_string(), &field.sidecar(extra))
}

fn certificate_output(cfg: &RunConfig, report: &cfmoll::ConvergenceReport) -> Result<(), CliError> {
    let mut json = report.to_json_string();
    json.push('\n');
    match &cfg.out {
        Some(prefix) => {
            write_file(&with_ext(prefix, "json"), &json)?;
            write_file(&with_ext(prefix, "csv"), &report.to_csv_string())
        }
        None => to_stdout(&json),
    }
}

fn cfs(specs: &[DistributionSpec]) -> Result<Vec<CharFn>, CliError> {
    Ok(specs.iter().map(make_cf).collect::<cfmoll::Result<Vec<_>>>()?)
}

fn converge(cfg: &RunConfig) -> Result<(), CliError> {
    let seq = cfs(&cfg.specs()?)?;
    let target = make_cf(&cfg.target_spec()?)?;
    let grid = cfg.grid()?;
    let ks = cfg.k_schedule.clone().unwrap_or_else(|| DEFAULT_K_SCHEDULE.to_vec());
    let eps = cfg.epsilon.unwrap_or(DEFAULT_EPSILON);
    let report = convergence_certificate(&seq, &target, &ks, &grid, eps, &cfg.params)?;
    certificate_output(cfg, &report)
}

fn clt_demo(cfg: &RunConfig) -> Result<(), CliError> {
    let seq: Vec<DistributionSpec> = CLT_NS
        .iter()
        .map(|&n| DistributionSpec::StandardizedIIDSum {
            base: Box::new(DistributionSpec::rademacher()),
            n,
        })
        .collect();
    let seq = cfs(&seq)?;
    let target = make_cf(&DistributionSpec::standard_normal(1))?;
    let grid = match &cfg.grid {
        Some(_) => cfg.grid()?,
        None => Grid::parse(CLT_GRID)?,
    };
    let ks = cfg.k_schedule.clone().unwrap_or_else(|| vec![CLT_K]);
    let eps = cfg.epsilon.unwrap_or(DEFAULT_EPSILON);
    let report = convergence_certificate(&seq, &target, &ks, &grid, eps, &cfg.params)?.with_labels(&CLT_NS)?;
    for (i, n) in report.n.iter().enumerate() {
        let l1: Vec<String> = report.l1_mollified[i].iter().map(|v| format!("{v:.6e}")).collect();
        eprintln!(
            "n={n:<3} cf_sup_error={:.6e} l1_mollified=[{}]",
            report.cf_sup_error[i],
            l1.join(", ")
        );
    }
    certificate_output(cfg, &report)
}

fn run_selfcheck() -> Result<(), CliError> {
    let outcomes = selfcheck::run();
    let mut text = String::new();
    for c in &outcomes {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        text.push_str(&format!("{tag} {}: {}\n", c.name, c.detail));
    }
    to_stdout(&text)?;
    let failed = outcomes.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::Failed(format!("{failed} of {} checks failed", outcomes.len())));
    }
    Ok(())
}
