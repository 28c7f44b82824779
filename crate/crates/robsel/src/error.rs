use thiserror::Error;

/// Errors produced by the solvers, oracles, and graph ingestion.
#[derive(Debug, Error)]
pub enum Error {
    /// A subset was built over a different ground-set width than the one it
    /// is evaluated against.
    #[error("subset width {width} does not match ground set size {expected}")]
    InvalidSubset { width: usize, expected: usize },

    #[error("item index {item} out of range for ground set of size {n}")]
    InvalidItem { item: usize, n: usize },

    #[error("item index {item} is already in the subset")]
    ItemAlreadySelected { item: usize },

    #[error("budget k={k} outside valid range 1..={n}")]
    InvalidBudget { k: usize, n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A brute-force oracle was asked to enumerate more states than its guard
    /// allows.
    #[error("enumeration of {required} states exceeds limit {limit}")]
    EnumerationBudget { required: u128, limit: u64 },

    /// Exact live-edge spread enumerates all 2^|E| subgraphs; refuse graphs
    /// beyond the guard and point at the Monte Carlo estimator instead.
    #[error("graph has {edges} edges; exact spread enumeration is limited to {limit} (use the Monte Carlo estimator)")]
    EdgeLimit { edges: usize, limit: usize },

    #[error("probability vectors have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("edge list contains no nodes")]
    EmptyGraph,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
