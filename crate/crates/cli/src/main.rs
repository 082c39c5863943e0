use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use car_extend::oracle::OracleParams;
use car_extend::states::StateKind;
use car_extend_cli::commands::{self, DecideMode, Output, EXIT_ERROR};
use car_extend_cli::demo;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "car-extend", version, about = "Extensions of fermionic states on disjoint mode sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Pure,
    Mixed,
    EvenPure,
    EvenMixed,
    FullRank,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Product,
    JointPure,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random state file.
    Gen {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Smallest eigenvalue for `full-rank`.
        #[arg(long, default_value_t = 0.05)]
        floor: f64,
        /// Comma-separated mode labels, e.g. `1,2`.
        #[arg(long, value_delimiter = ',', required = true)]
        modes: Vec<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print summary quantities of a state file.
    Inspect { path: PathBuf },
    /// Decide whether an extension of two states exists.
    Decide {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value = "product")]
        mode: Mode,
    },
    /// Construct an extension and write it to a file.
    Extend {
        a: PathBuf,
        b: PathBuf,
        /// Decomposition state selecting a member of the `p = 0` family.
        #[arg(long)]
        family_tilde: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Search numerically for an extension.
    Oracle {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        max_iterations: Option<usize>,
        #[arg(long)]
        tol_feas: Option<f64>,
        #[arg(long)]
        gap_threshold: Option<f64>,
        /// `product` or `seed:N`.
        #[arg(long, default_value = "product")]
        start: String,
        /// Where to write the witness, if one is found.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also look for free directions around the witness.
        #[arg(long)]
        probe: bool,
    },
    /// Check a candidate extension against two marginals.
    Verify { candidate: PathBuf, a: PathBuf, b: PathBuf },
    /// Run one of the worked examples (1 to 4).
    Demo {
        example: u8,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
}

fn state_kind(kind: Kind, floor: f64) -> StateKind {
    match kind {
        Kind::Pure => StateKind::Pure,
        Kind::Mixed => StateKind::Mixed,
        Kind::EvenPure => StateKind::EvenPure,
        Kind::EvenMixed => StateKind::EvenMixed,
        Kind::FullRank => StateKind::FullRank { floor },
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let tol = commands::tolerances_from_env()?;
    let out: Output = match cli.command {
        Command::Gen { kind, floor, modes, seed, out } => commands::gen(state_kind(kind, floor), &modes, seed, &out)?,
        Command::Inspect { path } => commands::inspect(&path, &tol)?,
        Command::Decide { a, b, mode } => {
            let mode = match mode {
                Mode::Product => DecideMode::Product,
                Mode::JointPure => DecideMode::JointPure,
            };
            commands::decide(&a, &b, mode, &tol)?
        }
        Command::Extend { a, b, family_tilde, out } => commands::extend(&a, &b, family_tilde.as_deref(), &out, &tol)?,
        Command::Oracle { a, b, max_iterations, tol_feas, gap_threshold, start, out, probe } => {
            let mut params = OracleParams::default().with_start(commands::parse_start(&start)?);
            params.tolerances = tol;
            if let Some(v) = max_iterations {
                params.max_iterations = v;
            }
            if let Some(v) = tol_feas {
                params.tol_feas = v;
            }
            if let Some(v) = gap_threshold {
                params.gap_threshold = v;
            }
            commands::oracle(&a, &b, &params, out.as_deref(), probe)?
        }
        Command::Verify { candidate, a, b } => commands::verify(&candidate, &a, &b, &tol)?,
        Command::Demo { example, seed, trials, m, n } => {
            let d = demo::run(example, seed, trials, m, n, &tol)?;
            emit(&d.text)?;
            return Ok(ExitCode::from(if d.ok { 0 } else { EXIT_ERROR }));
        }
    };
    emit(&format!("{}\n", serde_json::to_string_pretty(&out.json)?))?;
    Ok(ExitCode::from(out.code))
}

/// Writes to stdout; a reader that hung up early is not an error.
fn emit(text: &str) -> Result<()> {
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
