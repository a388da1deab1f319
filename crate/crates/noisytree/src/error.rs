use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("size guard: d = {d} exceeds the limit of {max}")]
    SizeGuard { d: usize, max: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("column {0} has zero empirical second moment")]
    ZeroVariance(usize),
    #[error("correlation magnitude {0:e} is below the denominator guard")]
    InsufficientCorrelation(f64),
    #[error("tree assembly is ambiguous: {0}")]
    AssemblyAmbiguous(String),
    #[error("q has mass where p is zero")]
    SupportViolation,
    #[error("constraint set is empty: {0}")]
    Infeasible(String),
    #[error("multistart spread {spread:e} exceeds tolerance")]
    NonConvergence { spread: f64 },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("results do not share an n grid")]
    GridMismatch,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
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

pub type Result<T> = std::result::Result<T, Error>;
