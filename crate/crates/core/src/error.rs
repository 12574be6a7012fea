use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("arithmetic overflow in {op} (operands: {operands})")]
    Overflow { op: &'static str, operands: String },

    #[error("matrix is not symmetric: {0:?}")]
    NotSymmetric([[i64; 3]; 3]),

    #[error("matrix is not positive definite: {0:?}")]
    NotPositiveDefinite([[i64; 3]; 3]),

    #[error("matrix {matrix:?} is not a similitude of scale {scale}")]
    NotSimilitude { matrix: [[i64; 3]; 3], scale: i64 },

    #[error("not a lattice similitude inverse: {0:?}")]
    NotIntegralInverse([[i64; 3]; 3]),

    #[error("no rational similitude eigenvector for {0:?}")]
    NoEigenvector([[i64; 3]; 3]),

    #[error("eigenspace of {0:?} is not one-dimensional")]
    DegenerateEigenspace([[i64; 3]; 3]),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no witness for {what}")]
    NoWitness { what: String },

    #[error("extraction failed for n = {n}: {reason}")]
    Extraction { n: u64, reason: String },

    #[error("certificate error at `{path}`: {message}")]
    Certificate { path: String, message: String },

    #[error("cache file {path}: {message}")]
    Cache { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn overflow(op: &'static str, operands: impl std::fmt::Debug) -> Error {
    Error::Overflow {
        op,
        operands: format!("{operands:?}"),
    }
}
