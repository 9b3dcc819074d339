use thiserror::Error;

/// Errors raised by the operator substrate and everything built on it.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("label collision: `{0}` appears more than once")]
    LabelCollision(String),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("subsystem `{label}` must have positive dimension")]
    ZeroDimension { label: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("layout mismatch: [{left}] vs [{right}]")]
    LayoutMismatch { left: String, right: String },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("herm_tol exceeded: |A - A^dagger|_max = {residual:e} > {tol:e}")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("psd_tol exceeded: minimum eigenvalue {min_eigenvalue:e} < -{tol:e}")]
    NotPsd { min_eigenvalue: f64, tol: f64 },

    #[error("trace_tol exceeded: trace {trace} differs from 1 by more than {tol:e}")]
    TraceMismatch { trace: f64, tol: f64 },

    #[error("eigendecomposition failed to converge")]
    EigenFailure,

    #[error("operator is not supported inside the support of the conditioning state (leak {leak:e})")]
    SupportMismatch { leak: f64 },

    #[error("inconsistent marginals on `{labels}`: trace distance {residual:e} > {tol:e}")]
    InconsistentMarginals { labels: String, residual: f64, tol: f64 },

    #[error("associated graph is not a tree")]
    NotATree,

    #[error("graph is disconnected")]
    Disconnected,

    #[error("missing marginal for pair ({0}, {1})")]
    MissingPair(String, String),

    #[error("outside tractable class: 3-chain {chain} is not compatible with a quantum Markov chain (normality residual {residual:e})")]
    OutsideTractableClass { chain: String, residual: f64 },

    #[error("Petz factor is not normal at step k = {k} (node `{node}`, residual {residual:e})")]
    NormalityFailure { k: usize, node: String, residual: f64 },

    #[error("dual ascent did not converge after {iterations} iterations (max constraint violation {gap:e})")]
    NonConvergence { iterations: usize, gap: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
