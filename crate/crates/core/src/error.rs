use alloc::string::String;

/// Errors raised by the learners and the cost accounting.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("alignment error: expected {expected} entries, found {found}")]
    Alignment { expected: usize, found: usize },
    #[error("invalid cost row {row}: {reason}")]
    InvalidCost { row: usize, reason: String },
    #[error("invalid example {row}: {reason}")]
    InvalidExample { row: usize, reason: String },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("degenerate dataset: {0}")]
    Degenerate(String),
    #[error("savings undefined: the costless-class cost is zero")]
    UndefinedSavings,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("split error: {0}")]
    Split(String),
    #[error("sampling error: {0}")]
    Sampling(String),
    #[error("weight error: {0}")]
    Weight(String),
    #[error("dimension mismatch: model expects {expected} features, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("training diverged: {0}")]
    Divergence(String),
    #[error("incomplete score table: {0}")]
    IncompleteTable(String),
}

pub type Result<T> = core::result::Result<T, Error>;
