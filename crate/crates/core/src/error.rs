use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("trajectory has no steps")]
    EmptyTrajectory,
    #[error("cannot align a descriptor of dimension {from} down to {to}")]
    AlignShrink { from: usize, to: usize },
    #[error("expected a {expected} trajectory, got {got}")]
    EnvironmentMismatch { expected: String, got: String },
    #[error("cannot step a terminal state")]
    TerminalState,
    #[error("invalid network shape: {0}")]
    InvalidShape(String),
    #[error("version space is empty: no strictly feasible weight vector")]
    EmptyVersionSpace,
    #[error("every candidate has already been used")]
    Exhausted,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("expert oracle failed: {0}")]
    Oracle(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(values: &[f64], what: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}
