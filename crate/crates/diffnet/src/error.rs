//! Crate-wide error type. Every fallible operation returns [`Result`].

use thiserror::Error;

/// Alias for `std::result::Result` with the crate error type.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by matrix kernels, solvers, data pipelines and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value lies outside the operation's domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Operand shapes do not line up.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Input held no usable rows or columns.
    #[error("empty data: {0}")]
    EmptyData(String),

    /// Factorization hit a non-positive pivot; the matrix is not positive
    /// definite. `index` is the zero-based pivot position.
    #[error("matrix is not positive definite: pivot {index} = {value:e}")]
    NotPositiveDefinite { index: usize, value: f64 },

    /// A data column carries no usable signal (for example zero variance).
    #[error("column {index} is degenerate: {context}")]
    DegenerateColumn { index: usize, context: String },

    /// The data as a whole carries no signal (for example zero covariance).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// A text input could not be parsed. `line` is one-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    /// An iterative solver produced a non-finite objective.
    #[error("objective diverged at iteration {iteration} (value {value:e})")]
    Divergence { iteration: usize, value: f64 },

    /// An eigendecomposition failed to converge.
    #[error("eigendecomposition failed: {0}")]
    EigenFailure(String),

    /// A failure inside a solution-path sweep, tagged with the offending
    /// penalty level.
    #[error("at lambda = {lambda}: {source}")]
    AtLambda {
        lambda: f64,
        #[source]
        source: Box<Error>,
    },

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Wraps an error with the penalty level at which it occurred.
    pub fn at_lambda(lambda: f64, source: Error) -> Self {
        Error::AtLambda {
            lambda,
            source: Box::new(source),
        }
    }
}
