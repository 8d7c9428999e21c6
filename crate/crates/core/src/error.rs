use thiserror::Error;

/// Errors produced by boundary parsing, validation, and the numerical
/// routines built on top of them.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// The boundary expression failed to parse; `position` is a byte
    /// offset into the input string.
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    /// A value violates a mathematical precondition (e.g. f(0) <= 0).
    #[error("domain error: {0}")]
    Domain(String),

    /// An exponential term has a nonpositive decay rate.
    #[error("rate error: {0}")]
    Rate(String),

    /// A simulation configuration violates its invariants.
    #[error("config error: {0}")]
    Config(String),

    /// A hypothesis required by a bound or inequality check does not hold.
    #[error("hypothesis error: {0}")]
    Hypothesis(String),

    /// Not enough data to carry out a fit.
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
