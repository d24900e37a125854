use std::path::PathBuf;

use thiserror::Error;

use crate::sieve::SieveState;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {context}: expected {expected:?}, got {actual:?}")]
    Shape {
        context: &'static str,
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid edge set: {0}")]
    InvalidEdges(String),

    #[error("unsupported block norm exponent {0}; only p = 2 is implemented")]
    UnsupportedNorm(f64),

    #[error("cannot build a neighbor graph from {0} point(s); need at least 2")]
    EmptyGraph(usize),

    #[error("dual point is infeasible: block {block} has norm {norm} > radius {radius}")]
    InfeasibleDual { block: usize, norm: f64, radius: f64 },

    #[error("sparse factorization failed: {0}")]
    Factorization(String),

    #[error("partition invariant violated: {0}")]
    Partition(String),

    #[error("sieving did not terminate within {} rounds (|I| = {})", .0.round, .0.index_set.len())]
    SieveRoundsExceeded(Box<SieveState>),

    #[error("{path}, line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error on {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn shape(
        context: &'static str,
        expected: (usize, usize),
        actual: (usize, usize),
    ) -> Self {
        Error::Shape {
            context,
            expected,
            actual,
        }
    }
}
