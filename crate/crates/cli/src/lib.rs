//! Batch runs over `cvxgauss`: configs in, deterministic reports and CSV tables out.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod report;

pub use commands::{run, Command};
pub use config::RunConfig;
pub use report::{exit_code, write_outputs, Outcome, Report, ResultRow};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("{0}")]
    Core(cvxgauss::Error),
    #[error("io error: {0}")]
    Io(String),
}

impl From<cvxgauss::Error> for CliError {
    fn from(e: cvxgauss::Error) -> Self {
        match e {
            cvxgauss::Error::Spec { path, message } => CliError::Config { path, message },
            other => CliError::Core(other),
        }
    }
}
