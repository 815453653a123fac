use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input contains no points")]
    EmptyInput,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("negative component at point {point}, coordinate {coord}")]
    NegativeComponent { point: usize, coord: usize },
    #[error("non-finite component at point {point}, coordinate {coord}")]
    NonFinite { point: usize, coord: usize },
    #[error("probability level {0} is outside (0, 1)")]
    OutOfRange(f64),
    #[error("operation requires a univariate distribution, got dimension {0}")]
    NotUnivariate(usize),
    #[error("operation requires dimension 2, got {0}")]
    NotTwoDimensional(usize),
    #[error("{combinations} determinant subsets exceed the enumeration guard {guard}; use Monte Carlo estimation")]
    CombinationOverflow { combinations: u128, guard: u128 },
    #[error(
        "coordinate {axis} of the total production activity is zero; the Gini volume is undefined"
    )]
    DegenerateParallelotope { axis: usize },
    #[error("coordinate {axis} of the distribution mean is not strictly positive")]
    DegenerateMean { axis: usize },
    #[error("values have zero mean")]
    ZeroMean,
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: u64,
        column: u64,
        message: String,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
