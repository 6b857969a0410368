use thiserror::Error;

/// Errors surfaced by every fallible operation in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} needs {needed} atoms, above the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        needed: u128,
        cap: u128,
    },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("support mismatch: {0}")]
    SupportMismatch(String),

    #[error("kernel row for round {round} is undefined and the protocol does not allow halting")]
    UndefinedRow { round: usize },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("search budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("coin stripping mismatch: internal gap {internal} vs external gap {external}")]
    MismatchAlpha { internal: f64, external: f64 },

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid artifact: {0}")]
    Artifact(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
