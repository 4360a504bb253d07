use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A design column is (numerically) a combination of the preceding ones.
    #[error("singular design: column {column} has pivot {pivot:.3e}, below threshold {threshold:.3e}")]
    SingularDesign {
        column: usize,
        pivot: f64,
        threshold: f64,
    },

    #[error("singular designs in rows {rows:?}")]
    SingularRows { rows: Vec<usize> },

    #[error("series too short: need n >= {required}, got {actual}")]
    InsufficientLength { required: usize, actual: usize },

    #[error("{what} did not converge after {iterations} iterations (estimate {estimate:.6e}, gap {gap:.3e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        estimate: f64,
        gap: f64,
    },

    #[error("model is not stationary: spectral radius {radius:.6} >= 1 - {margin:e}")]
    NonStationary { radius: f64, margin: f64 },

    #[error("order d = {d} is not supported here (only d = 1)")]
    UnsupportedOrder { d: usize },

    #[error("row {row}, k = {k}: residual sum of squares is zero")]
    ZeroRss { row: usize, k: usize },

    #[error("row {row}: {source}")]
    Row {
        row: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics (singularity, non-convergence,
    /// degenerate fits) as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::SingularDesign { .. }
            | Error::SingularRows { .. }
            | Error::NoConvergence { .. }
            | Error::NonStationary { .. }
            | Error::ZeroRss { .. } => true,
            Error::Row { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub(crate) fn in_row(self, row: usize) -> Error {
        match self {
            e @ Error::Row { .. } => e,
            e => Error::Row {
                row,
                source: Box::new(e),
            },
        }
    }
}
