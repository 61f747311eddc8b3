use thiserror::Error;

use crate::field::Level;

#[derive(Debug, Error)]
pub enum Error {
    /// Rejected input: non-prime characteristic, out-of-range parameters,
    /// degenerate subspaces, mismatched dimensions.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A supplied defining polynomial failed the irreducibility check.
    #[error("polynomial is not irreducible: {0}")]
    NotIrreducible(String),

    /// An element of one tower level was fed to an operation expecting another.
    #[error("level mismatch: expected {expected:?}, got {got:?}")]
    LevelMismatch { expected: Level, got: Level },

    /// The enumeration would exceed the caller's operation budget.
    #[error("enumeration budget exceeded: needs about {required} ops, budget is {budget}")]
    BudgetExceeded { required: u64, budget: u64 },

    /// A fact that is supposed to hold unconditionally failed to hold.
    /// Reaching this variant means a defect in this crate, not bad input.
    #[error("internal invariant breached: {0}")]
    InvariantBreach(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed certificate: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invariant(msg: impl Into<String>) -> Self {
        Error::InvariantBreach(msg.into())
    }

    pub fn params(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParams(_)
            | Error::NotIrreducible(_)
            | Error::LevelMismatch { .. } => 2,
            Error::BudgetExceeded { .. } => 3,
            Error::InvariantBreach(_) => 4,
            Error::Io(_) | Error::Json(_) => 1,
        }
    }
}

/// Checks `required <= budget` and reports a budget error otherwise.
pub fn charge(required: u64, budget: u64) -> Result<()> {
    if required > budget {
        Err(Error::BudgetExceeded { required, budget })
    } else {
        Ok(())
    }
}
