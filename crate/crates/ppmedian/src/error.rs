//! Crate-wide error type.

/// Errors produced by simulation, estimation, and reporting.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter fails its domain check (non-positive scale, fraction
    /// outside its range, and so on).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A pattern and a tessellation (or two patterns) refer to different
    /// windows.
    #[error("window mismatch: {0}")]
    WindowMismatch(String),

    /// A point lies outside the window it was declared on.
    #[error("point ({0}) outside window of half-side {1}")]
    PointOutsideWindow(String, f64),

    /// An operation needs a non-empty sample.
    #[error("empty sample: {0}")]
    EmptySample(&'static str),

    /// The requested field grid exceeds the pixel budget.
    #[error("field grid of {pixels} pixels exceeds the limit of {limit}")]
    FieldTooLarge { pixels: u64, limit: u64 },

    /// An estimator could not produce a value on this pattern.
    #[error("estimation failed: {0}")]
    EstimationFailed(String),

    /// Too many per-replication estimator failures to trust the report.
    #[error("{failed} of {total} estimator evaluations failed (> 1%)")]
    TooManyFailures { failed: usize, total: usize },

    /// The operation is undefined for the given model.
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    /// A pattern file does not follow the expected layout.
    #[error("pattern format error at line {line}: {message}")]
    PatternFormat { line: usize, message: String },

    /// A configuration document failed to parse or validate.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
