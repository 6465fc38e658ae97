//! Command-line front end for `udisc`.
//!
//! Reports go to standard output. Matrices go only to `--output` files.
//!
//! | exit | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | instance is not unambiguously discriminable (`check`, `solve`, `synth`, synthesizing `simulate`) |
//! | 2 | input or validation error, including bad usage |
//! | 3 | solver did not converge or failed numerically |

pub mod args;
pub mod commands;
pub mod files;
pub mod report;

use std::io::Write;

use clap::Parser;
use thiserror::Error;

pub use args::Cli;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Input(_) => EXIT_INPUT,
            Self::Solver(_) => EXIT_SOLVER,
        }
    }
}

impl From<udisc::Error> for CliError {
    fn from(e: udisc::Error) -> Self {
        use udisc::Error as E;
        match e {
            E::Validation(_)
            | E::InvalidArgument(_)
            | E::AmbientMismatch { .. }
            | E::IndexOutOfRange { .. }
            | E::IncompletePovm { .. }
            | E::ProbabilitySum { .. } => Self::Input(e.to_string()),
            _ => Self::Solver(e.to_string()),
        }
    }
}

impl From<udisc::model::ValidationError> for CliError {
    fn from(e: udisc::model::ValidationError) -> Self {
        Self::Input(e.to_string())
    }
}

/// Parses `argv`, runs the command and returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                EXIT_INPUT
            } else {
                let _ = write!(out, "{}", e.render());
                EXIT_OK
            };
            return code;
        }
    };
    match commands::execute(&cli) {
        Ok(outcome) => {
            if out.write_all(outcome.stdout.as_bytes()).is_err() {
                return EXIT_INPUT;
            }
            outcome.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
