//! `currentkit` command-line tool.

mod algebra;
mod flatnorm;
mod stokes;
mod svg;
mod train2d;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  parse error or invalid input (bad flags, unreadable file, malformed JSON)
  3  capability error (exact mode unsupported for this grade or dimension)
  4  solver failure
  5  training divergence";

#[derive(Parser)]
#[command(name = "currentkit", version, about = "Multivectors, currents and flat norms", after_help = EXIT_CODES)]
struct Cli {
    /// Worker threads for parallel metric evaluation.
    #[arg(long, global = true, env = "CURRENTKIT_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Norms and products of k-vectors given as JSON.
    #[command(after_help = EXIT_CODES)]
    Algebra(algebra::Args),
    /// Flat norm of a discrete current or a simplicial 1-chain.
    #[command(after_help = EXIT_CODES)]
    Flatnorm(flatnorm::Args),
    /// Trains the planar circle GAN and writes a run directory.
    #[command(after_help = EXIT_CODES)]
    Train2d(train2d::Args),
    /// Compares the integral of dω over a chain with the integral of ω over its boundary.
    #[command(after_help = EXIT_CODES)]
    StokesCheck(stokes::Args),
}

/// A failure carrying its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

pub const PARSE: u8 = 2;
pub const CAPABILITY: u8 = 3;
pub const SOLVER: u8 = 4;
pub const DIVERGENCE: u8 = 5;

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Failure::new(PARSE, message)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<currentkit::Error> for Failure {
    fn from(e: currentkit::Error) -> Self {
        use currentkit::Error as E;
        let code = match &e {
            E::UnsupportedExact { .. } | E::Capability(_) => CAPABILITY,
            E::Solver(_) | E::NonFinite(_) => SOLVER,
            E::Divergence { .. } => DIVERGENCE,
            _ => PARSE,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::parse(e.to_string())
    }
}

pub type CliResult<T> = Result<T, Failure>;

pub fn read_input(path: &PathBuf) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}

pub fn write_output(path: &PathBuf, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::parse("thread count must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::parse(e.to_string()))?;
    }
    match cli.command {
        Command::Algebra(a) => algebra::run(a),
        Command::Flatnorm(a) => flatnorm::run(a),
        Command::Train2d(a) => train2d::run(a),
        Command::StokesCheck(a) => stokes::run(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
