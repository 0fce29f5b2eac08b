//! Front end for dpq: expression and problem-file parsing, command dispatch
//! and canonical reports.

pub mod commands;
pub mod expr;
pub mod problem;
pub mod report;

use thiserror::Error;

pub use commands::{run, Command};
pub use problem::{parse_problem, Overrides, Problem};
pub use report::{Report, Status};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{0}")]
    Expr(#[from] expr::ExprError),
    #[error("missing section `[{0}]`")]
    MissingSection(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] dpq_core::Error),
}

/// Exit status for input and precondition errors.
pub const EXIT_INPUT_ERROR: i32 = 2;
