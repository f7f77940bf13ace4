//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the balancing library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a precondition (non-finite value, length
    /// mismatch, out-of-range parameter, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A cell of an input file could not be parsed. `row` is the 1-based
    /// data row (the header is row 0).
    #[error("parse error at row {row}, column '{column}': {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    /// A balancing problem cannot be formed (e.g. fewer than two units on
    /// one side).
    #[error("degenerate problem: {0}")]
    DegenerateProblem(String),

    /// Classifier training received labels from a single class, or a class
    /// with no weight.
    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),

    /// An experiment configuration is inconsistent.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
