//! `denjoy`: ranks, cross-checks, samples and reports from scheme files.
//!
//! Data goes to stdout and diagnostics to stderr. Exit codes: 0 success,
//! 1 parse or usage error, 2 ill-founded scheme, 3 capacity or undecided,
//! 4 a cross-check reported FAIL.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use denjoy_core::denjoy::{Variant, DEFAULT_MAX_BREAKPOINTS, DEFAULT_MAX_STAGES};
use denjoy_core::rational::parse_q;
use denjoy_core::{Error, Q};

#[derive(Parser, Debug)]
#[command(name = "denjoy", version, about = "Limsup ranks, Cantor-Bendixson ranks and wiggle constructions")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Output format; each command supports a subset.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Breakpoint limit for piecewise linear functions.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_BREAKPOINTS, value_parser = positive_usize)]
    pub max_breakpoints: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Ls,
    Wf,
    Cb,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print a rank of the scheme's tree.
    Rank {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "ls")]
        which: Which,
    },
    /// Compare ls-rank, CB rank of the coded set and derivation ranks for
    /// every `.scheme` file in a directory.
    Crosscheck {
        dir: PathBuf,
        /// Code the trees without doubling the children.
        #[arg(long)]
        undoubled: bool,
    },
    /// Sample the truncated wiggle function on a grid.
    Sample {
        file: PathBuf,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value_t = 3, value_parser = positive_u64)]
        width: u64,
        #[arg(long, default_value = "1/10", value_parser = positive_q)]
        grid: Q,
        /// Render values as decimals with this many places.
        #[arg(long)]
        decimal: Option<usize>,
    },
    /// Print the derivation trace.
    Derive {
        file: PathBuf,
        #[arg(long, default_value = "vb", value_parser = parse_variant)]
        variant: Variant,
        #[arg(long, default_value_t = DEFAULT_MAX_STAGES, value_parser = positive_u64)]
        stages: u64,
        /// Nesting depth shown for each stage.
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Variation of the truncated function over the grid points of a window.
    Probe {
        file: PathBuf,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value_t = 3, value_parser = positive_u64)]
        width: u64,
        #[arg(long, default_value = "1/100", value_parser = positive_q)]
        grid: Q,
        #[arg(long, default_value = "vb", value_parser = parse_variant)]
        variant: Variant,
        /// Window `a,b` inside [0,1].
        #[arg(long, default_value = "0,1")]
        window: String,
    },
    /// Build the staircase functions of a schedule.
    Staircase {
        file: PathBuf,
        #[arg(long, value_parser = positive_u64)]
        stages: Option<u64>,
    },
    /// Distance in measure between the derivatives of consecutive G approximants.
    MiDist {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        depth: usize,
        /// Use the closed form instead of building the functions.
        #[arg(long)]
        symbolic: bool,
        #[arg(long)]
        decimal: Option<usize>,
    },
}

fn positive_u64(s: &str) -> Result<u64, String> {
    match s.parse::<u64>() {
        Ok(0) => Err("must be positive".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn positive_usize(s: &str) -> Result<usize, String> {
    positive_u64(s).map(|v| v as usize)
}

fn positive_q(s: &str) -> Result<Q, String> {
    let v = parse_q(s).map_err(|e| e.to_string())?;
    if v <= Q::from_integer(0.into()) {
        return Err("must be positive".into());
    }
    Ok(v)
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse::<Variant>().map_err(|e| e.to_string())
}

pub enum Failure {
    Core(Error),
    Io(String),
    Crosscheck,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Invalid(_) => 1,
        Error::IllFounded(_) => 2,
        Error::Capacity(_) | Error::Undecided(_) | Error::Tail(_) => 3,
        Error::Mismatch(_) => 4,
    }
}

fn main() -> ExitCode {
    let cfg = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    let mut out = std::io::stdout().lock();
    match commands::run(&cfg, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Core(e)) => {
            eprintln!("denjoy: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Io(msg)) => {
            eprintln!("denjoy: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Crosscheck) => {
            eprintln!("denjoy: cross-check failed");
            ExitCode::from(4)
        }
    }
}
