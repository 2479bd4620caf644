use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid link level {0}: levels start at 1")]
    InvalidLevel(u32),

    #[error("invalid link: {0}")]
    InvalidLink(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    /// A parameter fell outside the range its formula is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("selection distribution undefined: node {0} has no feasible neighbors")]
    EmptyFeasibleSet(u32),

    #[error("tree construction exceeded {0} steps")]
    Truncated(usize),

    #[error("physical link mapping: {0}")]
    Mapping(String),

    #[error("unreachable: {0}")]
    Unreachable(String),

    #[error("cost model: {0}")]
    Model(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("numeric overflow: {0}")]
    Overflow(String),

    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable tag, used for structured CLI errors and FFI codes.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidLevel(_) => "invalid-level",
            Error::InvalidLink(_) => "invalid-link",
            Error::InvalidNetwork(_) => "invalid-network",
            Error::Domain(_) => "domain",
            Error::EmptyFeasibleSet(_) => "empty-feasible-set",
            Error::Truncated(_) => "truncated",
            Error::Mapping(_) => "mapping",
            Error::Unreachable(_) => "unreachable",
            Error::Model(_) => "model",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::Overflow(_) => "overflow",
            Error::BudgetExceeded(_) => "budget-exceeded",
            Error::Usage(_) => "usage",
            Error::Internal(_) => "internal",
            Error::Io(_) => "io",
            Error::Json(_) => "parse",
            Error::Csv(_) => "csv",
        }
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
