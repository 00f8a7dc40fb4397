//! Coefficients of determination over covariate subsets and their Shapley
//! decomposition.
//!
//! Covariate subsets are [`VariableSet`]s that never contain the response
//! index 0. Tables over all `2^d` covariate subsets are indexed by
//! `mask >> 1`, so entry `k` is the subset whose bit `b` stands for
//! covariate `b + 1`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corrkit::CorrelationModel;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::numeric::{pairwise_sum, CompensatedSum};
use crate::varset::VariableSet;

/// Largest `d` accepted by the `d!`-enumeration form.
pub const MAX_PERMUTATION_D: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Sample,
    Population,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapleyVector {
    /// `V_1, ..., V_d`; `values[i]` belongs to covariate `i + 1`.
    pub values: Vec<f64>,
    /// `R²` of the full covariate set.
    pub r_squared: f64,
    pub source: Source,
}

impl ShapleyVector {
    pub fn d(&self) -> usize {
        self.values.len()
    }

    /// Fraction of `R²` attributed to each covariate.
    pub fn shares(&self) -> Vec<f64> {
        self.values.iter().map(|v| v / self.r_squared).collect()
    }
}

/// Exact binomial coefficient; fits in `u64` for every `n ≤ 62`.
fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Subset weight `ω(S) = |S|! (d - |S| - 1)! / d!` for `|S| = size`.
///
/// Evaluated as `1 / (d · C(d-1, |S|))`: the denominator is an exact
/// integer, so the only rounding is the final division.
pub fn shapley_weight(d: usize, size: usize) -> f64 {
    assert!(size < d, "subset of [d] \\ {{j}} has at most d - 1 elements");
    let denom = d as u64 * binomial(d as u64 - 1, size as u64);
    1.0 / denom as f64
}

/// `ω` indexed by subset size `0..d`.
pub fn weight_table(d: usize) -> Vec<f64> {
    (0..d).map(|s| shapley_weight(d, s)).collect()
}

/// `R²_S = 1 - |R({0} ∪ S)| / |R(S)|`, and exactly 0 for the empty set.
pub fn r_squared_subset(model: &CorrelationModel, set: VariableSet) -> Result<f64> {
    if set.contains(0) {
        return Err(Error::ResponseInCovariateSet);
    }
    if set.is_empty() {
        return Ok(0.0);
    }
    let denom = model.nonsingular_determinant(set)?;
    let numer = model.subset_determinant(set.with_response())?;
    Ok(1.0 - numer / denom)
}

/// `R²_S` for every covariate subset, indexed by `mask >> 1`.
pub fn r_squared_table(model: &CorrelationModel) -> Result<Vec<f64>> {
    let d = model.d();
    let compute = |k: usize| r_squared_subset(model, VariableSet::from_mask((k as u32) << 1));
    if d >= 10 {
        (0..1usize << d).into_par_iter().map(compute).collect()
    } else {
        (0..1usize << d).map(compute).collect()
    }
}

/// Linear coefficients `c_j(S)` with `V_j = Σ_S c_j(S) R²_S`.
///
/// `c_j(S) = ω(S \ {j})` when `j ∈ S` and `-ω(S)` otherwise. Returned as
/// `d` rows of length `2^d`, indexed like [`r_squared_table`].
pub fn shapley_coefficients(d: usize) -> Vec<Vec<f64>> {
    let weights = weight_table(d);
    (0..d)
        .map(|j| {
            let bit = 1usize << j;
            (0..1usize << d)
                .map(|k| {
                    let size = k.count_ones() as usize;
                    if k & bit != 0 {
                        weights[size - 1]
                    } else if size < d {
                        -weights[size]
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// Shapley values from the subset-weight form
/// `V_j = Σ_{S ⊆ [d]∖{j}} ω(S) [R²_{S∪{j}} - R²_S]`.
///
/// Subsets are visited in ascending mask order and each covariate's
/// `2^{d-1}` terms are combined by pairwise summation.
pub fn shapley_subset_form(model: &CorrelationModel) -> Result<ShapleyVector> {
    let table = r_squared_table(model)?;
    Ok(shapley_from_table(model.d(), &table, Source::Sample))
}

pub(crate) fn shapley_from_table(d: usize, table: &[f64], source: Source) -> ShapleyVector {
    let weights = weight_table(d);
    let full = (1usize << d) - 1;
    let value_of = |j: usize| {
        let bit = 1usize << j;
        let others = VariableSet::from_mask((full & !bit) as u32);
        let terms: Vec<f64> = others
            .subsets()
            .map(|s| {
                let k = s.mask() as usize;
                weights[k.count_ones() as usize] * (table[k | bit] - table[k])
            })
            .collect();
        pairwise_sum(&terms)
    };
    let values = if d >= 10 {
        (0..d).into_par_iter().map(value_of).collect()
    } else {
        (0..d).map(value_of).collect()
    };
    ShapleyVector {
        values,
        r_squared: table[full],
        source,
    }
}

/// Shapley values by enumerating all `d!` orderings of the covariates.
///
/// Exponentially slower than [`shapley_subset_form`]; kept as an
/// independent reference for small `d`.
pub fn shapley_permutation_form(model: &CorrelationModel) -> Result<ShapleyVector> {
    let d = model.d();
    if d > MAX_PERMUTATION_D {
        return Err(Error::DimensionGuard {
            d,
            max: MAX_PERMUTATION_D,
        });
    }
    let mut order: Vec<usize> = (1..=d).collect();
    let mut sums = vec![CompensatedSum::default(); d];
    let mut visit = |order: &[usize]| -> Result<()> {
        let mut before = VariableSet::EMPTY;
        let mut r2_before = 0.0;
        for &j in order {
            let after = before.with(j);
            let r2_after = r_squared_subset(model, after)?;
            sums[j - 1].add(r2_after - r2_before);
            before = after;
            r2_before = r2_after;
        }
        Ok(())
    };

    // Heap's algorithm, iterative form.
    visit(&order)?;
    let mut counters = vec![0usize; d];
    let mut i = 1;
    let mut count = 1u64;
    while i < d {
        if counters[i] < i {
            if i % 2 == 0 {
                order.swap(0, i);
            } else {
                order.swap(counters[i], i);
            }
            visit(&order)?;
            count += 1;
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }

    let values = sums.iter().map(|s| s.total() / count as f64).collect();
    Ok(ShapleyVector {
        values,
        r_squared: r_squared_subset(model, VariableSet::covariates(d))?,
        source: Source::Sample,
    })
}

/// Population Shapley values of a covariance matrix, computed from its
/// induced correlation matrix.
pub fn population_shapley(cov: &Matrix) -> Result<ShapleyVector> {
    let model = CorrelationModel::from_covariance(cov)?;
    let mut v = shapley_subset_form(&model)?;
    v.source = Source::Population;
    Ok(v)
}
