use thiserror::Error;

/// Errors raised by the shape catalog.
#[derive(Debug, Error)]
pub enum ShapeError {
    /// Shape evaluated where its formula is singular (usually zeta = 0).
    #[error("shape is singular at zeta = {zeta}: {detail}")]
    Domain { zeta: f64, detail: String },
    /// Parameter outside its admissible range.
    #[error("invalid shape parameter: {0}")]
    Param(String),
    /// Inversion requested for a shape with no monotonicity certificate.
    #[error("shape is not certified strictly increasing: {0}")]
    NonInvertible(String),
    /// The bisection bracket contains no sign change.
    #[error("no root in bracket [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },
    /// Iterative fit stalled before reaching tolerance.
    #[error("fit failed to converge: {0}")]
    Convergence(String),
}

/// Errors raised by the exact update dynamics.
#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("invalid dynamics parameter: {0}")]
    Param(String),
    #[error("inputs have mismatched shape: {0}")]
    Dimension(String),
}

/// Errors raised during graph construction.
#[derive(Debug, Error)]
pub enum GraphError {
    #[error("invalid graph parameter: {0}")]
    Param(String),
    /// A weight left the unit interval.
    #[error("weight out of range: {0}")]
    Range(String),
}

/// Errors raised by the quality metrics.
#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("invalid metric parameter: {0}")]
    Param(String),
    #[error("label set is degenerate: {0}")]
    Label(String),
    #[error("inputs have mismatched shape: {0}")]
    Dimension(String),
    /// A point cloud collapses after centering; alignment is undefined.
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

/// Errors raised reading or writing datasets and tables.
#[derive(Debug, Error)]
pub enum IoError {
    /// A text input failed to parse; `line` is 1-based.
    #[error("{path}:{line}: {detail}")]
    Malformed {
        path: String,
        line: usize,
        detail: String,
    },
    /// A raw payload disagrees with its sidecar.
    #[error("sidecar mismatch for {path}: {detail}")]
    Sidecar { path: String, detail: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Errors raised by the optimizer.
#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("invalid optimizer parameter: {0}")]
    Param(String),
    /// Input matrix cannot support the requested projection.
    #[error("input rank too low: {0}")]
    Rank(String),
    /// A displacement became NaN or infinite.
    #[error("non-finite update at epoch {epoch}, edge ({i}, {j})")]
    NonFinite { epoch: u32, i: usize, j: usize },
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}
