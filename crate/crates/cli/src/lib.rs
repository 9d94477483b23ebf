//! Command-line front end: configuration, subcommands and report files.

pub mod commands;
pub mod config;
pub mod output;

use relcharge_core::Error;

#[derive(Debug)]
pub enum CliError {
    /// Invalid or unreadable configuration.
    Config(String),
    /// Domain or integration failure.
    Domain(Error),
    /// Sweep finished with failed grid points.
    Partial(String),
    /// Operation not available for the configured system.
    Unsupported(String),
    /// A comparison exceeded its tolerance.
    Failed(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Domain(_) | CliError::Partial(_) => 3,
            CliError::Unsupported(_) => 4,
            CliError::Failed(_) | CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Domain(e) => write!(f, "{e}"),
            CliError::Partial(m) => write!(f, "{m}"),
            CliError::Unsupported(m) => write!(f, "unsupported: {m}"),
            CliError::Failed(m) => write!(f, "failed: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}
