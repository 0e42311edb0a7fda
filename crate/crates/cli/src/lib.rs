//! Front end for the `k3cert` binary: document parsing, report rendering and
//! the subcommand implementations. `main.rs` only wires these to clap.

pub mod commands;
pub mod input;
pub mod output;

pub use commands::Outcome;
pub use input::InputDocument;
pub use output::OutputDocument;

pub const FORMAT_VERSION: &str = "1";

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_UNKNOWN: u8 = 2;
pub const EXIT_ERROR: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}", input_message(.field, .message))]
    Input {
        field: Option<String>,
        message: String,
    },
    #[error("cannot read {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] k3cert::Error),
}

fn input_message(field: &Option<String>, message: &str) -> String {
    match field {
        Some(f) => format!("invalid input at `{f}`: {message}"),
        None => format!("invalid input: {message}"),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Text,
}
