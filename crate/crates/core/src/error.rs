use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("probability at ({row}, {col}) is negative: {value}")]
    NegativeProbability { row: usize, col: usize, value: f64 },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("probabilities sum to {sum}, expected 1 (tolerance 1e-9)")]
    SumNotOne { sum: f64 },

    #[error("{axis} symbol {index} has zero marginal mass")]
    EmptyMarginal { axis: Axis, index: usize },

    #[error("grid is empty or ragged: {0}")]
    Shape(String),

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("numeric values for the {0} alphabet are required")]
    MissingValues(Axis),

    #[error("{0} variable has zero variance")]
    DegenerateVariable(Axis),

    #[error("iteration did not converge after {iterations} steps (residual {residual:e}, best value {value})")]
    NotConverged { iterations: usize, residual: f64, value: f64 },

    #[error("need at least {required} samples, got {got}")]
    TooFewSamples { required: usize, got: usize },

    #[error("sample vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("|rho| must be < 1, got {0}")]
    DegenerateRho(f64),

    #[error("theorem needs min(|X|, |Y|) = 2, got {nx}x{ny}")]
    AlphabetTooLarge { nx: usize, ny: usize },

    #[error("maximal correlation of X and Y is zero; ratio supremum is undefined")]
    DegenerateDependence,

    #[error("epsilon {0} out of range: {1}")]
    EpsilonOutOfRange(f64, &'static str),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Axis::X => f.write_str("X"),
            Axis::Y => f.write_str("Y"),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
