use thiserror::Error;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    NoSolution,
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("degenerate immersion: {0}")]
    DegenerateImmersion(String),

    #[error("no solution for r = {target}; attainable range is [{lo}, {hi}]")]
    NoSolution { target: f64, lo: f64, hi: f64 },

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("frequency hits Dirichlet spectrum: alpha = {alpha}, lowest Dirichlet eigenvalue = {dirichlet}")]
    FrequencyHitsDirichlet { alpha: f64, dirichlet: f64 },

    #[error("matrix not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("spectrum too short: {0}")]
    SpectrumTooShort(String),

    #[error("degenerate hypergeometric parameters: {0}")]
    DegenerateParameter(String),

    #[error("eigenvector not normalized: {0}")]
    NotNormalized(String),

    #[error("constraint basis is rank deficient at node {0}")]
    ConstraintRank(usize),

    #[error("eigenspace matching failed: {0}")]
    EigenspaceMatch(String),

    #[error("mesh format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Dimension { .. }
            | Error::Domain(_)
            | Error::Precondition(_)
            | Error::Invalid(_)
            | Error::Format(_)
            | Error::DegenerateParameter(_) => ErrorClass::Validation,
            Error::NoSolution { .. } => ErrorClass::NoSolution,
            _ => ErrorClass::Internal,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
