//! Asymptotic covariances of Shapley values and the resulting confidence
//! intervals and pairwise tests.

mod covariance;
mod inference;
mod kurtosis;

pub use covariance::{acov_corr, AsymptoticModel, CovarianceTerms};
pub use inference::{
    confidence_intervals, difference_test, inference_from_model, DifferenceTest,
    ShapleyCovariance, ShapleyInference, DEGENERATE_TOL, NEGATIVE_VARIANCE_TOL,
};
pub use kurtosis::{mardia_kurtosis, KurtosisEstimate};
