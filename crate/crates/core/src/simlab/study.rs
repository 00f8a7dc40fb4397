//! Monte Carlo coverage studies.
//!
//! Study A draws from `N(0, Σ)`, Study B from the multivariate t with scale
//! `Σ`, and Study C from `N(0, Σ_i)` with `Σ_i ~ W(Σ, ν)` redrawn for every
//! replicate. `Σ` is the compound-symmetry matrix with off-diagonal `c`.
//! Each replicate builds a confidence interval for the first Shapley value
//! and records whether it contains the population value.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::clopper::clopper_pearson;
use super::sampling::{
    compound_symmetry_sigma, sample_mvnormal_with, sample_mvt_with, sample_wishart_with,
};
use crate::asymptotics::confidence_intervals;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::numeric::quantile_sorted;
use crate::resample::bootstrap_distribution;
use crate::rng::{derive_seed, rng_for};
use crate::shapley::population_shapley;

/// Replicate failure rate above which a method's cell is abandoned.
pub const MAX_FAILURE_FRACTION: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Study {
    A,
    B,
    C,
}

impl Study {
    fn tag(self) -> u64 {
        match self {
            Study::A => 0xA,
            Study::B => 0xB,
            Study::C => 0xC,
        }
    }
}

impl fmt::Display for Study {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Study::A => "A",
            Study::B => "B",
            Study::C => "C",
        })
    }
}

impl FromStr for Study {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Study::A),
            "B" => Ok(Study::B),
            "C" => Ok(Study::C),
            other => Err(Error::InvalidConfig(format!("unknown study '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Asymptotic,
    Bootstrap,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Asymptotic => "asymptotic",
            Method::Bootstrap => "bootstrap",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "asymptotic" => Ok(Method::Asymptotic),
            "bootstrap" => Ok(Method::Bootstrap),
            other => Err(Error::InvalidConfig(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub study: Study,
    pub d: usize,
    pub c: f64,
    pub n: usize,
    pub n_replicates: usize,
    pub n_bootstrap: usize,
    pub alpha: f64,
    /// t degrees of freedom (Study B) or Wishart degrees of freedom (Study C).
    pub nu: f64,
    pub seed: u64,
    pub methods: Vec<Method>,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            study: Study::A,
            d: 3,
            c: 0.3,
            n: 500,
            n_replicates: 200,
            n_bootstrap: 1000,
            alpha: 0.05,
            nu: 100.0,
            seed: 0,
            methods: vec![Method::Asymptotic, Method::Bootstrap],
            workers: None,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_replicates == 0 {
            return Err(Error::InvalidConfig("number of replicates must be positive".into()));
        }
        if self.d == 0 {
            return Err(Error::NoCovariates);
        }
        if !(0.0..1.0).contains(&self.c) {
            return Err(Error::InvalidConfig(format!("c must lie in [0, 1), got {}", self.c)));
        }
        if self.n < 3 {
            return Err(Error::TooFewSamples { n: self.n, min: 3 });
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidAlpha(self.alpha));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("no methods selected".into()));
        }
        if self.methods.contains(&Method::Bootstrap) && self.n_bootstrap == 0 {
            return Err(Error::InvalidConfig("bootstrap needs resamples".into()));
        }
        match self.study {
            Study::A => {}
            Study::B if !(self.nu > 2.0) => return Err(Error::InvalidNu(self.nu)),
            Study::C if !(self.nu >= (self.d + 1) as f64) => return Err(Error::InvalidNu(self.nu)),
            _ => {}
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidConfig("workers must be positive".into()));
        }
        Ok(())
    }

    /// Seed of replicate `i`, a function of the master seed, study and `i`.
    pub fn replicate_seed(&self, i: usize) -> u64 {
        derive_seed(self.seed, &[self.study.tag(), i as u64])
    }
}

/// One replicate: population truth and each method's interval for `v_1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicateOutcome {
    pub truth: f64,
    pub intervals: Vec<(Method, Result<(f64, f64)>)>,
}

/// Draws replicate `i` of `cfg` and computes every requested interval.
pub fn run_replicate(cfg: &StudyConfig, i: usize) -> Result<ReplicateOutcome> {
    let seed = cfg.replicate_seed(i);
    let sigma = compound_symmetry_sigma(cfg.d, cfg.c)?;
    let mut rng = rng_for(seed, &[0]);
    let (truth_cov, data): (Matrix, Result<Dataset>) = match cfg.study {
        Study::A => {
            let data = sample_mvnormal_with(&sigma, cfg.n, &mut rng);
            (sigma, data)
        }
        Study::B => {
            let data = sample_mvt_with(&sigma, cfg.nu, cfg.n, &mut rng);
            (sigma, data)
        }
        Study::C => {
            let drawn = sample_wishart_with(&sigma, cfg.nu, &mut rng_for(seed, &[1]))?;
            let data = sample_mvnormal_with(&drawn, cfg.n, &mut rng);
            (drawn, data)
        }
    };
    let truth = population_shapley(&truth_cov)?.values[0];

    let intervals = cfg
        .methods
        .iter()
        .map(|&method| {
            let interval = data.clone().and_then(|data| match method {
                Method::Asymptotic => {
                    confidence_intervals(&data, cfg.alpha).map(|inf| inf.intervals[0])
                }
                Method::Bootstrap => {
                    bootstrap_distribution(&data, cfg.n_bootstrap, derive_seed(seed, &[2]))
                        .map(|dist| dist.intervals(cfg.alpha)[0])
                }
            });
            (method, interval)
        })
        .collect();
    Ok(ReplicateOutcome { truth, intervals })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    pub method: Method,
    pub covered: usize,
    pub n_effective: usize,
    pub failures: usize,
    pub coverage: f64,
    pub cp_lower: f64,
    pub cp_upper: f64,
    pub mean_width: f64,
    pub width_p2_5: f64,
    pub width_p97_5: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub config: StudyConfig,
    pub results: Vec<CoverageResult>,
    /// Population `v_1` of every replicate that produced data, in order.
    pub truths: Vec<f64>,
}

/// One output row per `(study, method, n, c)` cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub study: Study,
    pub method: Method,
    pub d: usize,
    pub c: f64,
    pub n: usize,
    #[serde(rename = "N")]
    pub replicates: usize,
    pub coverage: f64,
    pub cp_lower: f64,
    pub cp_upper: f64,
    pub mean_width: f64,
    pub width_p2_5: f64,
    pub width_p97_5: f64,
    pub n_effective: usize,
    pub seed: u64,
}

impl StudyResult {
    pub fn result(&self, method: Method) -> Option<&CoverageResult> {
        self.results.iter().find(|r| r.method == method)
    }

    pub fn rows(&self) -> Vec<CoverageRow> {
        let cfg = &self.config;
        self.results
            .iter()
            .map(|r| CoverageRow {
                study: cfg.study,
                method: r.method,
                d: cfg.d,
                c: cfg.c,
                n: cfg.n,
                replicates: cfg.n_replicates,
                coverage: r.coverage,
                cp_lower: r.cp_lower,
                cp_upper: r.cp_upper,
                mean_width: r.mean_width,
                width_p2_5: r.width_p2_5,
                width_p97_5: r.width_p97_5,
                n_effective: r.n_effective,
                seed: cfg.seed,
            })
            .collect()
    }
}

/// Runs `f` on a dedicated pool when a worker count is configured.
pub(crate) fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs every replicate of `cfg` and aggregates coverage per method.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let outcomes: Vec<Result<ReplicateOutcome>> = with_workers(cfg.workers, || {
        (0..cfg.n_replicates)
            .into_par_iter()
            .map(|i| run_replicate(cfg, i))
            .collect()
    })?;

    // Errors before any interval was attempted (truth or Wishart draw)
    // count against every method.
    let mut truths = Vec::with_capacity(outcomes.len());
    let mut results = Vec::with_capacity(cfg.methods.len());
    for (slot, &method) in cfg.methods.iter().enumerate() {
        let mut covered = 0usize;
        let mut failures = 0usize;
        let mut widths = Vec::with_capacity(cfg.n_replicates);
        for outcome in &outcomes {
            match outcome {
                Ok(o) => match &o.intervals[slot].1 {
                    Ok((lo, hi)) => {
                        widths.push(hi - lo);
                        if *lo <= o.truth && o.truth <= *hi {
                            covered += 1;
                        }
                    }
                    Err(e) => {
                        log::debug!("{method} replicate failed: {e}");
                        failures += 1;
                    }
                },
                Err(_) => failures += 1,
            }
        }
        if failures as f64 > MAX_FAILURE_FRACTION * cfg.n_replicates as f64 {
            return Err(Error::TooManyFailures {
                method: method.to_string(),
                failed: failures,
                total: cfg.n_replicates,
            });
        }
        let n_effective = widths.len();
        if n_effective == 0 {
            return Err(Error::TooManyFailures {
                method: method.to_string(),
                failed: failures,
                total: cfg.n_replicates,
            });
        }
        let (cp_lower, cp_upper) = clopper_pearson(covered, n_effective, cfg.alpha)?;
        let mean_width = widths.iter().sum::<f64>() / n_effective as f64;
        widths.sort_by(f64::total_cmp);
        results.push(CoverageResult {
            method,
            covered,
            n_effective,
            failures,
            coverage: covered as f64 / n_effective as f64,
            cp_lower,
            cp_upper,
            mean_width,
            width_p2_5: quantile_sorted(&widths, 0.025),
            width_p97_5: quantile_sorted(&widths, 0.975),
        });
    }
    truths.extend(outcomes.iter().flatten().map(|o| o.truth));
    Ok(StudyResult {
        config: cfg.clone(),
        results,
        truths,
    })
}

/// Rejection counts of the pairwise difference test over replicates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RejectionResult {
    pub rejections: usize,
    pub n_effective: usize,
    pub failures: usize,
    pub rate: f64,
}

/// Replicates the data-generating process of `cfg` and applies the
/// difference test to covariates `j`, `k` (0-based) at level `level`.
pub fn run_difference_study(cfg: &StudyConfig, j: usize, k: usize, level: f64) -> Result<RejectionResult> {
    cfg.validate()?;
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidAlpha(level));
    }
    let sigma = compound_symmetry_sigma(cfg.d, cfg.c)?;
    let outcomes: Vec<Result<bool>> = with_workers(cfg.workers, || {
        (0..cfg.n_replicates)
            .into_par_iter()
            .map(|i| {
                let seed = cfg.replicate_seed(i);
                let mut rng = rng_for(seed, &[0]);
                let data = match cfg.study {
                    Study::A => sample_mvnormal_with(&sigma, cfg.n, &mut rng)?,
                    Study::B => sample_mvt_with(&sigma, cfg.nu, cfg.n, &mut rng)?,
                    Study::C => {
                        let drawn = sample_wishart_with(&sigma, cfg.nu, &mut rng_for(seed, &[1]))?;
                        sample_mvnormal_with(&drawn, cfg.n, &mut rng)?
                    }
                };
                let test = confidence_intervals(&data, cfg.alpha)?.difference_test(j, k)?;
                Ok(test.p_value < level)
            })
            .collect()
    })?;
    let failures = outcomes.iter().filter(|o| o.is_err()).count();
    if failures as f64 > MAX_FAILURE_FRACTION * cfg.n_replicates as f64 {
        return Err(Error::TooManyFailures {
            method: "difference test".into(),
            failed: failures,
            total: cfg.n_replicates,
        });
    }
    let rejections = outcomes.iter().filter(|o| matches!(o, Ok(true))).count();
    let n_effective = cfg.n_replicates - failures;
    Ok(RejectionResult {
        rejections,
        n_effective,
        failures,
        rate: rejections as f64 / n_effective as f64,
    })
}

/// Sample sizes of the full grid: `5, 10, ..., 50` then `100, 200, ..., 2000`.
pub fn full_grid_sizes() -> Vec<usize> {
    (1..=10).map(|i| 5 * i).chain((1..=20).map(|i| 100 * i)).collect()
}

/// Correlations of the full grid.
pub const FULL_GRID_C: [f64; 7] = [0.0, 0.1, 0.2, 0.3, 0.6, 0.9, 0.99];

/// Desk-scale defaults.
pub const DESK_GRID_N: [usize; 3] = [10, 50, 500];
pub const DESK_GRID_C: [f64; 4] = [0.0, 0.1, 0.3, 0.9];

#[cfg(test)]
mod tests {
    use super::*;

    fn small(study: Study) -> StudyConfig {
        StudyConfig {
            study,
            n: 60,
            n_replicates: 24,
            n_bootstrap: 100,
            seed: 11,
            ..StudyConfig::default()
        }
    }

    #[test]
    fn zero_replicates_rejected() {
        let cfg = StudyConfig {
            n_replicates: 0,
            ..StudyConfig::default()
        };
        assert!(matches!(run_study(&cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn parse_names() {
        assert_eq!("b".parse::<Study>().unwrap(), Study::B);
        assert!("D".parse::<Study>().is_err());
        assert_eq!("Bootstrap".parse::<Method>().unwrap(), Method::Bootstrap);
    }

    #[test]
    fn schedule_independent() {
        let cfg = small(Study::B);
        let one = run_study(&StudyConfig {
            workers: Some(1),
            ..cfg.clone()
        })
        .unwrap();
        let four = run_study(&StudyConfig {
            workers: Some(4),
            ..cfg
        })
        .unwrap();
        assert_eq!(one.results, four.results);
    }

    #[test]
    fn truths_by_study() {
        let a = run_study(&small(Study::A)).unwrap();
        assert!(a.truths.windows(2).all(|w| w[0] == w[1]));
        let zero = run_study(&StudyConfig {
            c: 0.0,
            methods: vec![Method::Asymptotic],
            ..small(Study::A)
        })
        .unwrap();
        assert!(zero.truths.iter().all(|&t| t == 0.0));
        let c = run_study(&StudyConfig {
            methods: vec![Method::Asymptotic],
            ..small(Study::C)
        })
        .unwrap();
        assert!(c.truths.windows(2).any(|w| w[0] != w[1]));
    }

    #[test]
    fn result_invariants() {
        let res = run_study(&small(Study::A)).unwrap();
        assert_eq!(res.rows().len(), 2);
        for r in &res.results {
            assert!((0.0..=1.0).contains(&r.coverage));
            assert!(r.cp_lower <= r.coverage && r.coverage <= r.cp_upper);
            assert!(r.width_p2_5 >= 0.0 && r.width_p2_5 <= r.width_p97_5);
            assert_eq!(r.n_effective + r.failures, 24);
        }
    }

    #[test]
    fn grid_sizes() {
        let n = full_grid_sizes();
        assert_eq!(n.len(), 30);
        assert_eq!((n[0], n[9], n[10], n[29]), (5, 50, 100, 2000));
        assert_eq!(FULL_GRID_C.len() * n.len(), 210);
    }
}
