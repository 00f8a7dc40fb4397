use thiserror::Error;

use crate::varset::VariableSet;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("column {column} has zero sample variance")]
    ZeroVariance { column: usize },

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("need at least {min} observations, got {n}")]
    TooFewSamples { n: usize, min: usize },

    #[error("dataset must have at least one covariate column")]
    NoCovariates,

    #[error("ragged data: row {row} has {found} values, expected {expected}")]
    Ragged { row: usize, found: usize, expected: usize },

    #[error("a covariate set must not contain the response (index 0)")]
    ResponseInCovariateSet,

    #[error("operation requires a nonempty variable set")]
    EmptySet,

    #[error(
        "principal submatrix {set} is numerically singular (|det| = {det:e} < 1e-12); \
         check for duplicated or collinear columns"
    )]
    SingularSubmatrix { set: VariableSet, det: f64 },

    #[error("d = {d} covariates exceeds the supported maximum of {max}: subset enumeration grows as 2^d")]
    DimensionGuard { d: usize, max: usize },

    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("sample covariance matrix is singular")]
    SingularCovariance,

    #[error("index {index} out of range (must be < {bound})")]
    InvalidIndex { index: usize, bound: usize },

    #[error("covariates j and k must differ (both are {0})")]
    SameCovariate(usize),

    #[error("variance of V_{j} - V_{k} is degenerate (denominator {denominator:e})")]
    DegenerateVariance { j: usize, k: usize, denominator: f64 },

    #[error("estimated asymptotic variance for covariate {index} is negative ({value:e})")]
    NegativeVariance { index: usize, value: f64 },

    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),

    #[error("invalid degrees of freedom {0}")]
    InvalidNu(f64),

    #[error("too many degenerate bootstrap resamples ({degenerate} of {attempted} draws)")]
    DegenerateResample { degenerate: usize, attempted: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{method} failed on {failed} of {total} replicates (limit 5%)")]
    TooManyFailures {
        method: String,
        failed: usize,
        total: usize,
    },
}

impl Error {
    /// True for failures of the numerics (singular matrices, degenerate
    /// variances) as opposed to malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularSubmatrix { .. }
                | Error::NotPositiveDefinite
                | Error::SingularCovariance
                | Error::DegenerateVariance { .. }
                | Error::NegativeVariance { .. }
                | Error::DegenerateResample { .. }
                | Error::TooManyFailures { .. }
        )
    }
}
