//! Command-line front end for the oscillator-bath laboratory.
//!
//! Every run reads one JSON config, writes `<command>.csv` plus a
//! `manifest.json` recording the resolved config, output checksums, and any
//! regime warnings. Exit codes: 0 success, 2 config error, 3 numerical
//! failure, 4 warnings under --strict, 1 I/O trouble.

mod commands;
mod config;
mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::Config;
use output::{sha256_hex, OutputRecord, RunManifest};

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Compute(qbm::Error),
    Io(std::io::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(msg) => write!(f, "configuration: {msg}"),
            RunError::Compute(e) => write!(f, "{e}"),
            RunError::Io(e) => write!(f, "io: {e}"),
        }
    }
}

impl From<qbm::Error> for RunError {
    fn from(e: qbm::Error) -> Self {
        RunError::Compute(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

fn exit_code(e: &RunError) -> i32 {
    match e {
        RunError::Config(_) => 2,
        RunError::Compute(
            qbm::Error::Config(_) | qbm::Error::Domain(_) | qbm::Error::Capability(_),
        ) => 2,
        RunError::Compute(_) => 3,
        RunError::Io(_) => 1,
    }
}

#[derive(Parser)]
#[command(name = "qbm", version, about = "Oscillator-bath numerical laboratory")]
struct Cli {
    /// JSON config file.
    #[arg(long, global = true, default_value = "qbm.json")]
    config: PathBuf,

    /// Output directory for the CSV and manifest.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Treat regime warnings as errors (exit 4).
    #[arg(long, global = true)]
    strict: bool,

    /// Worker threads; 0 or absent defers to QBM_THREADS, then to one per
    /// core. The output bytes do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Dressed frequencies and their spectral weights.
    Spectrum,
    /// Survival amplitude: exact, golden-rule, and continuum columns.
    Decay,
    /// Time-local frequency and damping coefficients.
    Langevin,
    /// Stochastic-acceleration autocorrelation kernel.
    Noise,
    /// Mean occupation relaxing toward equilibrium.
    Population,
    /// Equilibrium occupation against the shifted Bose reference.
    Asymptote,
    /// Long-time power-law tail of the survival probability.
    Khalfin,
    /// Low-temperature scan: occupation scaling exponent and tsallis q.
    Tscan,
    /// Invariant suite; FAIL rows exit nonzero.
    Validate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Decay => "decay",
            Command::Langevin => "langevin",
            Command::Noise => "noise",
            Command::Population => "population",
            Command::Asymptote => "asymptote",
            Command::Khalfin => "khalfin",
            Command::Tscan => "tscan",
            Command::Validate => "validate",
        }
    }
}

fn resolve_threads(flag: Option<usize>) -> Result<usize, RunError> {
    if let Some(k) = flag {
        return Ok(k);
    }
    match std::env::var("QBM_THREADS") {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| {
            RunError::Config(format!("QBM_THREADS must be a non-negative integer, got {v:?}"))
        }),
        Err(_) => Ok(0),
    }
}

fn run(cli: &Cli) -> Result<i32, RunError> {
    let cfg = Config::load(&cli.config)?;
    let threads = resolve_threads(cli.threads)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| RunError::Config(format!("thread pool: {e}")))?;

    let run = commands::execute(cli.command, &cfg, &pool)?;

    std::fs::create_dir_all(&cli.out)?;
    let csv_name = format!("{}.csv", cli.command.name());
    let bytes = run.table.render();
    std::fs::write(cli.out.join(&csv_name), &bytes)?;
    let outputs = vec![OutputRecord {
        file: csv_name,
        sha256: sha256_hex(bytes.as_bytes()),
        rows: run.table.lines.len(),
    }];

    for w in &run.warnings {
        eprintln!("qbm: warning: {w}");
    }

    let manifest = RunManifest {
        command: cli.command.name(),
        version: env!("CARGO_PKG_VERSION"),
        timestamp: output::timestamp(),
        config: &run.config,
        outputs,
        warnings: &run.warnings,
        results: &run.results,
    };
    let mut manifest_json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| RunError::Io(std::io::Error::other(e)))?;
    manifest_json.push('\n');
    std::fs::write(cli.out.join("manifest.json"), manifest_json)?;

    if run.failed_checks > 0 {
        eprintln!("qbm: {} invariant check(s) failed", run.failed_checks);
        return Ok(3);
    }
    if cli.strict && !run.warnings.is_empty() {
        eprintln!("qbm: strict: {} warning(s) treated as errors", run.warnings.len());
        return Ok(4);
    }
    Ok(0)
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("qbm: error: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}
