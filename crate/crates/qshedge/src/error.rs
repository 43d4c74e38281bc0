use thiserror::Error;

/// Errors raised by model construction and the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("minimax program has no rows")]
    EmptyRows,
    #[error("empty point set")]
    EmptySupport,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("no random variables given")]
    EmptyFamily,
    #[error("no value supplied for support point {0}")]
    MissingValue(String),
    #[error("claim does not match market: {0}")]
    ClaimMismatch(String),
    #[error("invalid market: {0}")]
    InvalidMarket(String),
    #[error("invalid prior: {0}")]
    InvalidPrior(String),
    #[error("operation requires a one-dimensional market, found d = {found}")]
    DimensionError { found: usize },
    #[error("node {0} is visited twice; not a tree")]
    CycleDetected(usize),
    #[error("node {node} sits at depth {depth}, inconsistent with horizon {horizon}")]
    RaggedDepth {
        node: usize,
        depth: usize,
        horizon: usize,
    },
    #[error("node {node} carries {weights} prior weights for {children} children")]
    PriorArityMismatch {
        node: usize,
        weights: usize,
        children: usize,
    },
    #[error("negative price at node {0}")]
    NegativePrice(usize),
    #[error("node {0} is a leaf")]
    LeafNode(usize),
    #[error("malformed tree: {0}")]
    MalformedTree(String),
    #[error("instantaneous profit detected at node {0}")]
    GlobalIpDetected(usize),
    #[error("brute-force oracle scale exceeded: {0}")]
    ScaleExceeded(String),
    #[error("parse error: {0}")]
    Parse(String),
}
