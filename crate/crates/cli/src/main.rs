//! `dln`: sweeps, oracles and checks for deep linear network posteriors.

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use commands::ConfigError;
use output::{Manifest, Table};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_VALIDATION: u8 = 4;

#[derive(Parser)]
#[command(name = "dln", version, about = "Bayesian interpolation with deep linear networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration file for the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for the CSV table and manifest.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Base seed; overrides any seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Exact and asymptotic log evidence over a σ² grid.
    EvidenceSweep,
    /// Exact variance factor against its regime limit over a width grid.
    PosteriorVariance,
    /// Monte Carlo generalization error across α0.
    DoubleDescent,
    /// Quick invariant suite; exits 4 when a check fails.
    Validate,
    /// Exact product-of-Gammas density against the Monte Carlo oracle.
    OracleDensity,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::EvidenceSweep => "evidence-sweep",
            Command::PosteriorVariance => "posterior-variance",
            Command::DoubleDescent => "double-descent",
            Command::Validate => "validate",
            Command::OracleDensity => "oracle-density",
        }
    }
}

enum Failure {
    Config(String),
    Numeric(String),
    Validation(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

fn read_config<C: DeserializeOwned>(path: Option<&Path>) -> Result<Option<C>, Failure> {
    let Some(p) = path else { return Ok(None) };
    let text = std::fs::read_to_string(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
    serde_json::from_str(&text).map(Some).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))
}

fn require<C: DeserializeOwned>(path: Option<&Path>) -> Result<C, Failure> {
    read_config(path)?.ok_or_else(|| Failure::Config("--config is required for this subcommand".into()))
}

fn to_value<C: Serialize>(c: &C) -> serde_json::Value {
    serde_json::to_value(c).unwrap_or(serde_json::Value::Null)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(e.to_string()))?;
    }
    let start = Instant::now();
    let cfg_path = cli.config.as_deref();
    let (table, config, seed, passed): (Table, serde_json::Value, u64, bool) = match cli.command {
        Command::EvidenceSweep => {
            let c: config::EvidenceSweep = require(cfg_path)?;
            (commands::evidence_sweep(&c)?, to_value(&c), cli.seed.unwrap_or(0), true)
        }
        Command::PosteriorVariance => {
            let c: config::PosteriorVariance = require(cfg_path)?;
            (commands::posterior_variance(&c)?, to_value(&c), cli.seed.unwrap_or(0), true)
        }
        Command::DoubleDescent => {
            let c: config::DoubleDescent = require(cfg_path)?;
            let seed = cli.seed.or(c.seed).unwrap_or(0);
            (commands::double_descent(&c, seed)?, to_value(&c), seed, true)
        }
        Command::OracleDensity => {
            let c: config::OracleDensity = require(cfg_path)?;
            let seed = cli.seed.or(c.seed).unwrap_or(0);
            (commands::oracle_density(&c, seed)?, to_value(&c), seed, true)
        }
        Command::Validate => {
            let c: config::Validate = read_config(cfg_path)?.unwrap_or_default();
            let seed = cli.seed.or(c.seed).unwrap_or(0);
            let (t, ok) = commands::validate(&c, seed)?;
            (t, to_value(&c), seed, ok)
        }
    };
    let mut manifest = Manifest {
        command: cli.command.name(),
        version: env!("CARGO_PKG_VERSION"),
        seed,
        threads: rayon::current_num_threads(),
        config,
        csv: String::new(),
        rows: 0,
        failed_rows: 0,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    let path = output::emit(&cli.out, &table, &mut manifest).map_err(|e| Failure::Config(format!("writing output: {e}")))?;
    eprintln!("wrote {} ({} rows)", path.display(), table.rows.len());
    if matches!(cli.command, Command::Validate) {
        if !passed {
            return Err(Failure::Validation(format!("{} check(s) failed", manifest.failed_rows)));
        }
    } else if manifest.failed_rows > 0 {
        return Err(Failure::Numeric(format!("{} row(s) failed", manifest.failed_rows)));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Numeric(m)) => {
            eprintln!("numeric failure: {m}");
            ExitCode::from(EXIT_NUMERIC)
        }
        Err(Failure::Validation(m)) => {
            eprintln!("validation failure: {m}");
            ExitCode::from(EXIT_VALIDATION)
        }
    }
}
