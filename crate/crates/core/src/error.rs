use thiserror::Error;

/// Errors raised by the engine, the domain analysis and the numeric oracle.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("empty index set")]
    EmptyIndexSet,
    #[error("index set too small: need at least {need} elements, got {got}")]
    IndexTooSmall { need: usize, got: usize },
    #[error("K is not a subset of I")]
    KNotSubset,
    #[error("N out of range: {0} (supported: 4..=8)")]
    NOutOfRange(u32),
    #[error("invalid variable {0}")]
    InvalidVariable(String),
    #[error("missing assignment for {0}")]
    MissingAssignment(String),
    #[error("pole proximity: factor {0} is within 1e-12 of zero")]
    PoleProximity(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("witness point violates {0}")]
    WitnessFailed(String),
    #[error("tail is not geometric: {0}")]
    TailNotGeometric(String),
    #[error("budget of {0} exceeded")]
    BudgetExceeded(u64),
    #[error("unsupported integral spec: {0}")]
    UnsupportedSpec(String),
}

impl Error {
    /// The variant name, for messages and exit-code mapping.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyIndexSet => "EmptyIndexSet",
            Error::IndexTooSmall { .. } => "IndexTooSmall",
            Error::KNotSubset => "KNotSubset",
            Error::NOutOfRange(_) => "NOutOfRange",
            Error::InvalidVariable(_) => "InvalidVariable",
            Error::MissingAssignment(_) => "MissingAssignment",
            Error::PoleProximity(_) => "PoleProximity",
            Error::Parse(_) => "Parse",
            Error::WitnessFailed(_) => "WitnessFailed",
            Error::TailNotGeometric(_) => "TailNotGeometric",
            Error::BudgetExceeded(_) => "BudgetExceeded",
            Error::UnsupportedSpec(_) => "UnsupportedSpec",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
