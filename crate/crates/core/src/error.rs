//! Error type shared by every module in the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty sample")]
    EmptySample,

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Kernel weights summed to zero: no covariate fell inside the bandwidth.
    #[error("empty neighborhood: no observation within bandwidth{}", .at.map(|i| format!(" at covariate row {i}")).unwrap_or_default())]
    EmptyNeighborhood { at: Option<usize> },

    /// The weighted sample has zero scale along some direction, so a
    /// scale-normalized depth is undefined there.
    #[error("degenerate scale along direction {direction:?}")]
    DegenerateScale { direction: Vec<f64> },

    #[error("unsupported dimension {p} for {what}")]
    UnsupportedDimension { p: usize, what: &'static str },

    /// A CSV field failed to parse. Row numbers count data rows from 1.
    #[error("{path}: row {row}, column {column}: {message}")]
    InvalidField {
        path: String,
        row: usize,
        column: String,
        message: String,
    },

    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True when the error reflects bad input (files, arguments, shapes)
    /// rather than a numerical degeneracy met during computation.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::EmptyNeighborhood { .. } | Error::DegenerateScale { .. }
        )
    }
}
