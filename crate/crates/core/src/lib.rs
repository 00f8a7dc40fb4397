//! Shapley decomposition of the coefficient of determination.
//!
//! Given data on a response and `d` covariates, each covariate's Shapley
//! value is its average marginal contribution to `R²` over all orderings.
//! The crate computes the decomposition from the sample correlation matrix,
//! its asymptotic covariance under elliptical sampling, confidence intervals
//! and pairwise equality tests, percentile bootstrap intervals, and the
//! Monte Carlo machinery used to check their coverage.
//!
//! ```
//! use shapley_r2::{confidence_intervals, Dataset};
//!
//! let rows: Vec<[f64; 3]> = (0..60)
//!     .map(|i| {
//!         let t = i as f64;
//!         let (a, b) = ((0.37 * t).sin(), (1.3 * t).cos());
//!         [a + 0.5 * b + 0.2 * (2.9 * t).sin(), a, b]
//!     })
//!     .collect();
//! let data = Dataset::from_rows(&rows).unwrap();
//! let inf = confidence_intervals(&data, 0.05).unwrap();
//! let total: f64 = inf.shapley.values.iter().sum();
//! assert!((total - inf.shapley.r_squared).abs() < 1e-12);
//! ```

pub mod asymptotics;
pub mod corrkit;
pub mod dataset;
pub mod error;
pub mod linalg;
pub mod numeric;
pub mod resample;
pub mod rng;
pub mod shapley;
pub mod simlab;
pub mod varset;

pub use asymptotics::{
    acov_corr, confidence_intervals, difference_test, inference_from_model, mardia_kurtosis,
    AsymptoticModel, DifferenceTest, KurtosisEstimate, ShapleyCovariance, ShapleyInference,
};
pub use corrkit::{sample_correlation, CorrelationModel};
pub use dataset::Dataset;
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use resample::{bootstrap_ci, BootstrapConfig, BootstrapResult};
pub use shapley::{
    population_shapley, r_squared_subset, shapley_permutation_form, shapley_subset_form,
    ShapleyVector, Source,
};
pub use varset::VariableSet;
