use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("at least 2 samples are required, got {0}")]
    TooFewSamples(usize),
    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteInput { row: usize, col: usize },
    #[error("variable {0} has zero variance")]
    ZeroVariance(usize),
    #[error("matrix is numerically singular (condition estimate {condition:e})")]
    SingularMatrix { condition: f64 },
    #[error("diagonal entry {0} is not strictly positive")]
    NonPositiveDiagonal(usize),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("sparsity s={s} is infeasible for dimension p={p}")]
    InfeasibleSparsity { s: usize, p: usize },
    #[error("Kronecker rank {0} is not supported (only rank 1)")]
    UnsupportedRank(usize),
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("matrix role {found} not accepted here (expected {expected})")]
    RoleMismatch { expected: &'static str, found: &'static str },
    #[error("solver diverged: {0}")]
    Diverged(String),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("screening bound requires the screening-law kappa_n")]
    MissingKappa,
    #[error("level {level} is infeasible: implied sample size {n} < 1")]
    InfeasibleLevel { level: f64, n: f64 },
    #[error("invalid value for `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("path fit failed at lambda index {index}: {source}")]
    PathFit { index: usize, source: Box<Error> },
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs or configuration.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::SingularMatrix { .. }
            | Error::NotPositiveDefinite
            | Error::NoSolution(_)
            | Error::Diverged(_) => true,
            Error::PathFit { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig { field, reason: reason.into() }
    }
}
