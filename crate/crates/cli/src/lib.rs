//! File formats, command bodies and the claim registry behind the `asbpir`
//! binary. `main.rs` only parses arguments and prints.

pub mod commands;
pub mod matrix_file;
pub mod reproduce;
pub mod request_spec;

use std::fmt;

pub const EXIT_OK: i32 = 0;
/// Property fails, nothing found, claim not confirmed.
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Io(String),
    Core(asbpir_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(asbpir_core::Error::CapExceeded { .. }) => EXIT_BUDGET,
            _ => EXIT_USAGE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "invalid input: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<asbpir_core::Error> for CliError {
    fn from(e: asbpir_core::Error) -> CliError {
        CliError::Core(e)
    }
}
