use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use k3cert_cli::commands::{self, CheckArgs};
use k3cert_cli::{CliError, Format, Outcome, EXIT_ERROR};

/// Exact certificate checks for polarized rank-2 K3 Picard lattices.
///
/// Exit codes: 0 pass, 1 fail, 2 unknown, 3 input or usage error.
#[derive(Parser)]
#[command(name = "k3cert", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the five-step certificate on a lattice document.
    Check {
        path: PathBuf,
        /// Cross-check every step with the brute-force oracles.
        #[arg(long)]
        verify: bool,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        /// Override the document's degree bound.
        #[arg(long)]
        degree_bound: Option<u64>,
        /// Worker threads for the low-degree windows; output does not depend on it.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Include per-step wall-clock times (makes output run-dependent).
        #[arg(long)]
        timing: bool,
    },
    /// Fundamental solution of x² − D y² = 1.
    Pell {
        #[arg(allow_hyphen_values = true)]
        d: String,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Discriminant group of the document's lattice.
    Disc {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Images of the polarization under powers of the isometry.
    Orbit {
        path: PathBuf,
        #[arg(long, default_value_t = 3)]
        k_max: u64,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Positive classes of degree below the bound, with the box-scan cross-check.
    Enumerate {
        path: PathBuf,
        #[arg(long)]
        bound: Option<u64>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
}

fn run(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Check {
            path,
            verify,
            format,
            degree_bound,
            jobs,
            timing,
        } => commands::check(
            &path,
            &CheckArgs {
                verify,
                format,
                degree_bound,
                jobs,
                timing,
            },
        ),
        Command::Pell { d, format } => commands::pell(&d, format),
        Command::Disc { path, format } => commands::disc(&path, format),
        Command::Orbit {
            path,
            k_max,
            format,
        } => commands::orbit(&path, k_max, format),
        Command::Enumerate {
            path,
            bound,
            format,
        } => commands::enumerate(&path, bound, format),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_ERROR),
            };
        }
    };
    match run(cli.command) {
        Ok(outcome) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(outcome.stdout.as_bytes()).is_err() {
                return ExitCode::from(EXIT_ERROR);
            }
            ExitCode::from(outcome.exit)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
