use thiserror::Error;

use crate::ring::MeasureBounds;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unbounded set: {0}")]
    Unbounded(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// Work would exceed the configured explosion cap. `suggested` is the
    /// deepest stage that still fits.
    #[error("budget exceeded: stage {requested} in dimension {dim} exceeds cap of {cap_bits} bits (try stage <= {suggested})")]
    StageBudget {
        requested: u32,
        dim: usize,
        cap_bits: u32,
        suggested: u32,
    },

    /// Adaptive refinement ran out of stages before reaching the tolerance.
    #[error("budget exceeded before tolerance was reached (deepest stage {stage})")]
    ToleranceBudget {
        stage: u32,
        best: Option<Box<MeasureBounds>>,
    },

    #[error("budget exceeded: {0}")]
    Budget(String),

    /// A check that the construction guarantees failed.
    #[error("internal invariant failed: {0}")]
    Internal(String),
}

impl Error {
    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    /// True for the errors that mean "ran out of room", as opposed to bad input.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::StageBudget { .. } | Error::ToleranceBudget { .. } | Error::Budget(_)
        )
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
