use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {what} has length {actual}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),

    #[error("state is not normalized: squared norm {norm_sqr} deviates from 1 by more than {tol:e}")]
    NotNormalized { norm_sqr: f64, tol: f64 },

    #[error("matrix is not Hermitian: max |A - A^†| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("index out of range: {name} = {index}, bound {bound}")]
    IndexOutOfRange {
        name: &'static str,
        index: usize,
        bound: usize,
    },

    #[error("Levy bound does not apply: epsilon {epsilon} must exceed delta {delta}")]
    BoundNotApplicable { epsilon: f64, delta: f64 },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid band specification: {0}")]
    InvalidBands(String),

    #[error("empty energy shell [{lo}, {hi}): nearest eigenvalues below {below:?}, above {above:?}")]
    EmptyShell {
        lo: f64,
        hi: f64,
        below: Option<f64>,
        above: Option<f64>,
    },

    #[error("observables do not commute within the shell: ||[A, B]||_F = {norm:e}")]
    NonCommuting { norm: f64 },

    #[error("state lies outside the energy shell: leakage {leakage:e} exceeds {tol:e}")]
    OutsideShell { leakage: f64, tol: f64 },

    #[error("Hilbert space dimension {dim} exceeds cap {cap}")]
    DimensionOverflow { dim: u128, cap: usize },

    #[error("configuration error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
