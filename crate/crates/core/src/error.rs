//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Errors produced by construction, validation, and numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e} exceeds 1e-8)")]
    NotHermitian { asymmetry: f64 },

    #[error("operator is not positive semidefinite (minimum eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("density operator trace is {trace} (must be 1 within 1e-10)")]
    TraceNotOne { trace: f64 },

    #[error("state vector norm is {norm} (must be 1 within 1e-10)")]
    NotNormalized { norm: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("tensor dimension {required} exceeds the configured cap {cap}")]
    DimCapExceeded { required: usize, cap: usize },

    #[error("enumeration of {required} items exceeds the cap {cap}")]
    EnumerationTooLarge { required: usize, cap: usize },

    #[error("eigensolver failed to converge")]
    EigenFailed,

    #[error("scalar function undefined at eigenvalue {eigenvalue}")]
    FunctionUndefined { eigenvalue: f64 },

    #[error("row {index} of the transition matrix sums to {sum} (must be 1 within 1e-9)")]
    NotStochastic { index: usize, sum: f64 },

    #[error("probability vector sums to {sum} (must be 1 within 1e-10)")]
    NotDistribution { sum: f64 },

    #[error("probability vector has negative entry {value} at index {index}")]
    NegativeProbability { index: usize, value: f64 },

    #[error("letter index {index} out of range for alphabet of size {alphabet}")]
    LetterOutOfRange { index: usize, alphabet: usize },

    #[error("operation requires a pure-state channel; letter {letter} is mixed")]
    PureStateRequired { letter: usize },

    #[error("infeasible input: {0}")]
    Infeasible(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("constrained sampler acceptance too low: {rejections} consecutive rejections")]
    LowAcceptance { rejections: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
