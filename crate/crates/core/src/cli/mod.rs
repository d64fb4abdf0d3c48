//! Command-line front end. Exit status: 0 when every check passes, 1 when a
//! check fails (the violation is printed), 2 on input or precondition
//! errors.

mod commands;
pub mod schema;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::Outcome;
use commands::{FamilyArg, IsoArg, KindArg};

/// Determinism knobs shared by every command.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub seed: u64,
    pub samples: usize,
    /// Most elements any single enumeration may touch.
    pub cap: u128,
    pub force: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0x5EED,
            samples: 10_000,
            cap: 100_000,
            force: false,
        }
    }
}

fn parse_seed(s: &str) -> std::result::Result<u64, String> {
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    }
    .map_err(|e| e.to_string())
}

#[derive(Parser, Debug)]
#[command(
    name = "braceforge",
    version,
    about = "Exact checks for finite F_p-braces and nilpotent pre-Lie algebras"
)]
struct Cli {
    /// Seed for every sampled check (decimal or 0x-prefixed hex).
    #[arg(long, global = true, default_value = "0x5EED", value_parser = parse_seed)]
    seed: u64,
    /// Sample count for sampled checks.
    #[arg(long, global = true, default_value_t = 10_000)]
    samples: usize,
    /// Largest element count enumerated exhaustively.
    #[arg(long, global = true, default_value_t = 100_000)]
    cap: u128,
    /// Convert even when the summation formula's hypotheses fail, and report what breaks.
    #[arg(long, global = true)]
    force: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the pre-Lie identity and print the power chain.
    CheckPrelie { file: PathBuf },
    /// Check the brace axioms and F_p-linearity, then print the chains.
    CheckBrace { file: PathBuf },
    /// Build the group of flows of a pre-Lie algebra.
    ToBrace {
        file: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Write a dense star table instead of the flows description.
        #[arg(long)]
        table: bool,
    },
    /// Recover a pre-Lie algebra from a brace by the summation formula.
    ToPrelie {
        file: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Convert there and back and compare exactly.
    Roundtrip { file: PathBuf },
    /// Print the left, right and strong chains of a brace.
    Chains {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        kind: KindArg,
    },
    /// Enumerate one-generated pre-Lie algebras of order p^4.
    ClassifyP4 {
        #[arg(long)]
        p: u64,
        #[arg(long, value_enum, default_value = "all")]
        family: FamilyArg,
        #[arg(long, value_enum, default_value = "exact")]
        iso: IsoArg,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Enumerate ideals and compute the left nilpotent radical.
    Radical {
        file: PathBuf,
        /// Also compute the Wedderburn radical.
        #[arg(long)]
        wedderburn: bool,
    },
    /// Print W and Ω on basis vectors and check that they are inverse.
    OmegaSeries { file: PathBuf },
}

fn configure_threads() {
    let Ok(v) = std::env::var("BRACEFORGE_THREADS") else {
        return;
    };
    if let Ok(n) = v.trim().parse::<usize>() {
        if n > 0 {
            // fails only if a pool already exists, which is fine
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    configure_threads();
    let cfg = RunConfig {
        seed: cli.seed,
        samples: cli.samples,
        cap: cli.cap,
        force: cli.force,
    };
    let result = match &cli.command {
        Command::CheckPrelie { file } => commands::check_prelie(&cfg, file, out),
        Command::CheckBrace { file } => commands::check_brace(&cfg, file, out),
        Command::ToBrace { file, output, table } => commands::to_brace(&cfg, file, output, *table, out),
        Command::ToPrelie { file, output } => commands::to_prelie(&cfg, file, output, out),
        Command::Roundtrip { file } => commands::roundtrip(&cfg, file, out),
        Command::Chains { file, kind } => commands::chains(&cfg, file, *kind, out),
        Command::ClassifyP4 { p, family, iso, output } => commands::classify_p4(&cfg, *p, *family, *iso, output, out),
        Command::Radical { file, wedderburn } => commands::radical(&cfg, file, *wedderburn, out),
        Command::OmegaSeries { file } => commands::omega_series(&cfg, file, out),
    };
    match result {
        Ok(Outcome::Pass) => {
            let _ = writeln!(out, "result: pass");
            0
        }
        Ok(Outcome::Fail) => {
            let _ = writeln!(out, "result: FAIL");
            1
        }
        Err(e @ crate::Error::HypothesesViolated(_)) => {
            let _ = writeln!(out, "check failed: {e}");
            let _ = writeln!(out, "result: FAIL");
            1
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
