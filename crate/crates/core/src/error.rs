use thiserror::Error;

/// Errors produced by the effective-Hamiltonian machinery.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix must have dimension >= 1")]
    EmptyMatrix,

    #[error("expected {expected} entries for a {dim}x{dim} matrix, got {got}")]
    EntryCount { dim: usize, expected: usize, got: usize },

    #[error("matrix is not Hermitian: |H[{row}][{col}] - conj(H[{col}][{row}])| = {deviation:e}")]
    NotHermitian { row: usize, col: usize, deviation: f64 },

    #[error("index ({0}, {1}) out of range for dimension {2}")]
    IndexOutOfRange(usize, usize, usize),

    #[error("slot {slot} out of range for {count} subsystems")]
    SlotOutOfRange { slot: usize, count: usize },

    #[error("invalid rotation pair: j == k == {0}")]
    DiagonalPair(usize),

    #[error("stale rotation on ({j}, {k}): built for {expected}, matrix now holds {found}")]
    StaleRotation {
        j: usize,
        k: usize,
        expected: String,
        found: String,
    },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("degenerate gap {gap:e} on pair ({j}, {k}); route this coupling through NPAD instead")]
    DegenerateGap { j: usize, k: usize, gap: f64 },

    #[error("generator norm {0} violates the bound hypothesis ||S|| < 1/2")]
    BoundHypothesis(f64),

    #[error("perturbation order K = {0} must be >= 2")]
    OrderTooLow(usize),

    #[error("truncation level m must be >= 1")]
    TruncationTooLow,

    #[error("partition does not cover indices 0..{dim} disjointly")]
    BadPartition { dim: usize },

    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),

    #[error("domain error: {what} at node path {path}")]
    Domain { what: String, path: String },

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("resonant denominator: {0} = 0")]
    Resonance(String),

    #[error("approximation regime violated: {0}")]
    Regime(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
