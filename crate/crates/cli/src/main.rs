mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lampwalk_core::{Error, Exec};

use crate::config::{Command, Format, RunConfig};

const FORMATS: &str = "\
Text forms:
  groups     Z3 (integer lattice), Z/4 (cyclic), F2 (free), S2,3 (free solvable)
  Z^d        comma-separated integers, e.g. 1,0,-2
  Z/m        an integer, reduced mod m
  F_d, S_d,k words over a,b,c,...; uppercase letters are inverses, 1 is the empty word
  wreath     delta(site)=value; delta(site)=value @ base

Exit status: 0 ok, 1 I/O failure, 2 invalid input or config, 3 resource budget
exceeded, 4 reconstruction mismatch.";

#[derive(Parser, Debug)]
#[command(name = "lampwalk", version, about = "Random walks on wreath products and free solvable groups", after_help = FORMATS)]
struct Cli {
    /// TOML run configuration; every key has a default.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for CSV/JSON artifacts and the normalized config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially. Results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Simulate an ensemble of walks and report per-path statistics.
    Simulate,
    /// Entropy sequence H(μ^{*n}) by exact convolution, then sampling.
    Entropy,
    /// Coarse-trajectory diagnostics with reconstruction self-checks.
    Diagnostics,
    /// Read lines of one or two words and decide identity or equality.
    Wordproblem,
    /// Read words and print their Magnus images.
    Embed,
    /// Summarize the numeric columns of CSV files.
    Report {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {source}", path = .0.display(), source = .1)]
    Io(PathBuf, #[source] std::io::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::Resource(_)) => 3,
            CliError::Core(Error::Integrity(_)) => 4,
            CliError::Io(..) => 1,
            _ => 2,
        }
    }
}

fn executor(threads: Option<usize>) -> Result<Exec, CliError> {
    match threads {
        None => Ok(Exec::available()),
        Some(0) => Err(Error::validation("threads", "must be at least 1").into()),
        Some(1) => Ok(Exec::Sequential),
        #[cfg(feature = "parallel")]
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Error::Usage(format!("thread pool: {e}")))?;
            Ok(Exec::Parallel)
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => Ok(Exec::Sequential),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.output.dir = Some(out);
    }
    if let Some(format) = cli.format {
        cfg.output.format = format;
    }
    let exec = executor(cli.threads)?;
    let command = match &cli.command {
        Sub::Simulate => Command::Simulate,
        Sub::Entropy => Command::Entropy,
        Sub::Diagnostics => Command::Diagnostics,
        Sub::Wordproblem => Command::Wordproblem,
        Sub::Embed => Command::Embed,
        Sub::Report { .. } => Command::Report,
    };
    let cfg = cfg.normalized(command)?;
    match cli.command {
        Sub::Simulate => commands::simulate(&cfg, exec),
        Sub::Entropy => commands::entropy(&cfg, exec),
        Sub::Diagnostics => commands::diagnostics(&cfg, exec),
        Sub::Wordproblem => commands::wordproblem(&cfg),
        Sub::Embed => commands::embed(&cfg),
        Sub::Report { files } => report::run(&cfg, &files),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lampwalk: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
