use serde::{Deserialize, Serialize};

use super::covariance::AsymptoticModel;
use super::kurtosis::mardia_kurtosis;
use crate::corrkit::{sample_correlation, CorrelationModel};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::numeric::{normal_quantile, normal_sf};
use crate::shapley::{shapley_subset_form, ShapleyVector};

/// Tiny negative variance estimates down to this level are rounding noise
/// and get clamped to zero.
pub const NEGATIVE_VARIANCE_TOL: f64 = 1e-10;

/// Below this, a difference-test denominator (or numerator) counts as zero.
pub const DEGENERATE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapleyCovariance {
    /// `acov(ξ_j, ξ_k)`, 0-based covariate positions.
    pub acov: Matrix,
    pub kappa_used: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapleyInference {
    pub shapley: ShapleyVector,
    pub covariance: ShapleyCovariance,
    /// `(lower, upper)` per covariate at level `1 - alpha`.
    pub intervals: Vec<(f64, f64)>,
    pub alpha: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifferenceTest {
    /// 0-based covariate positions.
    pub j: usize,
    pub k: usize,
    pub statistic: f64,
    pub p_value: f64,
    /// Set when numerator and denominator both vanished and the statistic
    /// was reported as 0.
    pub degenerate: bool,
    pub avar_j: f64,
    pub avar_k: f64,
    pub acov_jk: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

/// Clamps rounding-level negative diagonal entries to zero, rejects larger
/// negatives.
fn clean_variances(acov: &mut Matrix) -> Result<()> {
    for i in 0..acov.rows() {
        let v = acov[(i, i)];
        if v < -NEGATIVE_VARIANCE_TOL || v.is_nan() {
            return Err(Error::NegativeVariance { index: i, value: v });
        }
        if v < 0.0 {
            log::warn!("clamping asymptotic variance {v:e} of covariate {} to 0", i + 1);
            acov[(i, i)] = 0.0;
        }
    }
    Ok(())
}

/// Asymptotic inference from a correlation model and kurtosis, as if they
/// had been estimated from `n` observations.
pub fn inference_from_model(
    model: &CorrelationModel,
    kappa: f64,
    n: usize,
    alpha: f64,
) -> Result<ShapleyInference> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(Error::TooFewSamples { n, min: 1 });
    }
    let shapley = shapley_subset_form(model)?;
    let asym = AsymptoticModel::new(model.clone(), kappa)?;
    let mut acov = asym.shapley_acov()?;
    clean_variances(&mut acov)?;

    let z = normal_quantile(1.0 - alpha / 2.0);
    let intervals = shapley
        .values
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let half = z * (acov[(j, j)] / n as f64).sqrt();
            (v - half, v + half)
        })
        .collect();
    Ok(ShapleyInference {
        shapley,
        covariance: ShapleyCovariance {
            acov,
            kappa_used: kappa,
            n,
        },
        intervals,
        alpha,
    })
}

/// Plug-in asymptotic `1 - alpha` intervals for every Shapley value.
pub fn confidence_intervals(data: &Dataset, alpha: f64) -> Result<ShapleyInference> {
    check_alpha(alpha)?;
    let model = sample_correlation(data)?;
    let kappa = mardia_kurtosis(data)?;
    inference_from_model(&model, kappa.kappa, data.n(), alpha)
}

/// Two-sided z-test of `v_j = v_k` (0-based covariate positions).
pub fn difference_test(data: &Dataset, j: usize, k: usize) -> Result<DifferenceTest> {
    confidence_intervals(data, 0.05)?.difference_test(j, k)
}

impl ShapleyInference {
    pub fn d(&self) -> usize {
        self.shapley.d()
    }

    /// `sqrt(avar(ξ_j) / n)` per covariate.
    pub fn standard_errors(&self) -> Vec<f64> {
        let n = self.covariance.n as f64;
        (0..self.d())
            .map(|j| (self.covariance.acov[(j, j)] / n).sqrt())
            .collect()
    }

    pub fn difference_test(&self, j: usize, k: usize) -> Result<DifferenceTest> {
        let d = self.d();
        for idx in [j, k] {
            if idx >= d {
                return Err(Error::InvalidIndex { index: idx, bound: d });
            }
        }
        if j == k {
            return Err(Error::SameCovariate(j));
        }
        let acov = &self.covariance.acov;
        let (avar_j, avar_k, acov_jk) = (acov[(j, j)], acov[(k, k)], acov[(j, k)]);
        let variance = avar_j + avar_k - 2.0 * acov_jk;
        if variance < -NEGATIVE_VARIANCE_TOL {
            return Err(Error::NegativeVariance {
                index: j,
                value: variance,
            });
        }
        let denominator = variance.max(0.0).sqrt();
        let root_n = (self.covariance.n as f64).sqrt();
        let numerator = root_n * (self.shapley.values[j] - self.shapley.values[k]);

        let (statistic, degenerate) = if denominator < DEGENERATE_TOL {
            if numerator.abs() < DEGENERATE_TOL {
                (0.0, true)
            } else {
                return Err(Error::DegenerateVariance {
                    j,
                    k,
                    denominator,
                });
            }
        } else {
            (numerator / denominator, false)
        };
        Ok(DifferenceTest {
            j,
            k,
            statistic,
            p_value: (2.0 * normal_sf(statistic.abs())).min(1.0),
            degenerate,
            avar_j,
            avar_k,
            acov_jk,
        })
    }
}
