use thiserror::Error;

/// Errors reported by the analysis and simulation routines.
///
/// The two variants separate contract violations on the inputs from
/// breakdowns of a numerical procedure; command-line front ends map them to
/// distinct exit codes (invalid input: 2, numerical failure: 1).
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An input violates a documented invariant. The message names the
    /// violated invariant.
    #[error("invalid input: {0}")]
    Invalid(String),
    /// A numerical procedure failed (degenerate evaluation point, search
    /// that could not be completed, divergent iteration).
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

pub(crate) fn numerical(msg: impl Into<String>) -> Error {
    Error::Numerical(msg.into())
}
