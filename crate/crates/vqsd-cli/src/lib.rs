//! Library surface of the `vqsd` command-line runner: configuration parsing,
//! experiment orchestration, and result serialization. The binary in
//! `main.rs` is a thin argument-parsing wrapper over [`runner`].

pub mod config;
pub mod document;
pub mod runner;

use thiserror::Error;

/// Runner errors, each with a stable process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid configuration or unreadable input: exit code 2.
    #[error("{0}")]
    Config(String),

    /// Training/evaluation failure: exit code 3.
    #[error("{0}")]
    Training(String),

    /// Filesystem failure while writing outputs: exit code 1.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Training(_) => 3,
        }
    }
}
