//! Nonparametric bootstrap percentile intervals for Shapley values.
//!
//! Resample `r` draws its rows from a generator seeded by
//! `(seed, r, attempt)`, so the output does not depend on how resamples are
//! distributed over threads. A resample whose correlation matrix is
//! degenerate (constant column, singular submatrix) is redrawn under the
//! next attempt number; every resample set therefore holds exactly
//! `n_resamples` values.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corrkit::{sample_correlation, sample_correlation_rows};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::numeric::quantile_sorted;
use crate::rng::rng_for;
use crate::shapley::shapley_subset_form;

/// Fraction of degenerate draws above which the bootstrap gives up.
pub const MAX_DEGENERATE_FRACTION: f64 = 0.10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub n_resamples: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidAlpha(self.alpha));
        }
        if (self.n_resamples as f64) < 2.0 / self.alpha {
            return Err(Error::InvalidConfig(format!(
                "{} resamples cannot resolve percentiles at alpha = {} (need >= {})",
                self.n_resamples,
                self.alpha,
                (2.0 / self.alpha).ceil()
            )));
        }
        Ok(())
    }
}

/// Sorted bootstrap distribution of each covariate's Shapley value.
#[derive(Clone, Debug, PartialEq)]
pub struct BootstrapDistribution {
    /// `sorted[j]` holds the `n_resamples` replicates of `V_{j+1}`, ascending.
    pub sorted: Vec<Vec<f64>>,
    /// Number of degenerate draws that were redrawn.
    pub degenerate: usize,
}

impl BootstrapDistribution {
    /// Middle `1 - alpha` percentile interval per covariate.
    pub fn intervals(&self, alpha: f64) -> Vec<(f64, f64)> {
        self.sorted
            .iter()
            .map(|values| percentile_interval(values, alpha))
            .collect()
    }

    pub fn medians(&self) -> Vec<f64> {
        self.sorted
            .iter()
            .map(|values| quantile_sorted(values, 0.5))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BootstrapResult {
    pub intervals: Vec<(f64, f64)>,
    pub distribution: BootstrapDistribution,
}

/// `[α/2, 1 - α/2]` type-7 percentile interval of sorted values.
pub fn percentile_interval(sorted: &[f64], alpha: f64) -> (f64, f64) {
    (
        quantile_sorted(sorted, alpha / 2.0),
        quantile_sorted(sorted, 1.0 - alpha / 2.0),
    )
}

/// Cap on redraws for a single resample index.
const MAX_ATTEMPTS_PER_RESAMPLE: u64 = 1000;

/// Draws `n_resamples` bootstrap Shapley vectors.
pub fn bootstrap_distribution(
    data: &Dataset,
    n_resamples: usize,
    seed: u64,
) -> Result<BootstrapDistribution> {
    if n_resamples == 0 {
        return Err(Error::InvalidConfig("n_resamples must be positive".into()));
    }
    // Surfaces dimension and full-sample data errors before resampling.
    sample_correlation(data)?;

    let n = data.n();
    let draws: Vec<(Option<Vec<f64>>, usize)> = (0..n_resamples)
        .into_par_iter()
        .map(|r| {
            let mut rows = vec![0usize; n];
            for attempt in 0..MAX_ATTEMPTS_PER_RESAMPLE {
                let mut rng = rng_for(seed, &[r as u64, attempt]);
                rows.iter_mut().for_each(|i| *i = rng.random_range(0..n));
                let values = sample_correlation_rows(data, &rows)
                    .and_then(|m| shapley_subset_form(&m))
                    .map(|v| v.values);
                if let Ok(values) = values {
                    return (Some(values), attempt as usize);
                }
            }
            (None, MAX_ATTEMPTS_PER_RESAMPLE as usize)
        })
        .collect();

    let degenerate: usize = draws.iter().map(|(_, failed)| failed).sum();
    let attempted = n_resamples + degenerate;
    if degenerate as f64 > MAX_DEGENERATE_FRACTION * attempted as f64
        || draws.iter().any(|(v, _)| v.is_none())
    {
        return Err(Error::DegenerateResample {
            degenerate,
            attempted,
        });
    }
    if degenerate > 0 {
        log::debug!("bootstrap redrew {degenerate} degenerate resamples");
    }

    let d = data.d();
    let mut sorted = vec![Vec::with_capacity(n_resamples); d];
    for (values, _) in draws {
        for (j, v) in values.expect("checked above").into_iter().enumerate() {
            sorted[j].push(v);
        }
    }
    for column in &mut sorted {
        column.sort_by(f64::total_cmp);
    }
    Ok(BootstrapDistribution { sorted, degenerate })
}

/// Percentile bootstrap intervals for all Shapley values.
pub fn bootstrap_ci(data: &Dataset, cfg: &BootstrapConfig) -> Result<BootstrapResult> {
    cfg.validate()?;
    let distribution = bootstrap_distribution(data, cfg.n_resamples, cfg.seed)?;
    Ok(BootstrapResult {
        intervals: distribution.intervals(cfg.alpha),
        distribution,
    })
}
