//! Wall-clock and peak-allocation comparison of asymptotic and bootstrap
//! interval computation.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::sampling::{compound_symmetry_sigma, sample_mvnormal};
use super::study::with_workers;
use crate::asymptotics::confidence_intervals;
use crate::error::{Error, Result};
use crate::resample::{bootstrap_ci, BootstrapConfig};
use crate::rng::derive_seed;

/// Source of peak heap usage, typically a counting global allocator.
pub trait MemoryProbe: Sync {
    /// Resets the peak to the current live allocation.
    fn reset(&self);
    /// Peak live bytes since the last reset, above the level at reset.
    fn peak_bytes(&self) -> usize;
}

/// Probe that records nothing.
pub struct NoProbe;

impl MemoryProbe for NoProbe {
    fn reset(&self) {}
    fn peak_bytes(&self) -> usize {
        0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub n_grid: Vec<usize>,
    pub d: usize,
    pub c: f64,
    pub n_bootstrap: usize,
    pub alpha: f64,
    pub reps: usize,
    pub seed: u64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            n_grid: vec![1000, 5000, 10000],
            d: 3,
            c: 0.3,
            n_bootstrap: 1000,
            alpha: 0.05,
            reps: 3,
            seed: 0,
        }
    }
}

impl BenchmarkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.reps == 0 {
            return Err(Error::InvalidConfig("benchmark needs sizes and repetitions".into()));
        }
        if let Some(&n) = self.n_grid.iter().find(|&&n| n < 3) {
            return Err(Error::TooFewSamples { n, min: 3 });
        }
        if self.d == 0 {
            return Err(Error::NoCovariates);
        }
        BootstrapConfig {
            n_resamples: self.n_bootstrap,
            alpha: self.alpha,
            seed: 0,
        }
        .validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub n: usize,
    pub d: usize,
    pub n_bootstrap: usize,
    pub asymptotic_secs: f64,
    pub bootstrap_secs: f64,
    pub time_ratio: f64,
    pub asymptotic_peak_bytes: usize,
    pub bootstrap_peak_bytes: usize,
    /// Zero when no allocation was observed for the asymptotic method.
    pub memory_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config: BenchmarkConfig,
    pub rows: Vec<BenchmarkRow>,
}

fn median(mut xs: Vec<Duration>) -> Duration {
    xs.sort();
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2
    }
}

fn measure<T>(probe: &dyn MemoryProbe, f: impl FnOnce() -> Result<T>) -> Result<(Duration, usize)> {
    probe.reset();
    let start = Instant::now();
    let out = f()?;
    let elapsed = start.elapsed();
    let peak = probe.peak_bytes();
    drop(out);
    Ok((elapsed, peak))
}

/// Times both methods on one thread, median over `reps`, for every `n`.
pub fn run_benchmark(cfg: &BenchmarkConfig, probe: &dyn MemoryProbe) -> Result<BenchmarkReport> {
    cfg.validate()?;
    let sigma = compound_symmetry_sigma(cfg.d, cfg.c)?;
    let rows = with_workers(Some(1), || {
        cfg.n_grid
            .iter()
            .map(|&n| {
                let data = sample_mvnormal(&sigma, n, derive_seed(cfg.seed, &[n as u64]))?;
                let boot = BootstrapConfig {
                    n_resamples: cfg.n_bootstrap,
                    alpha: cfg.alpha,
                    seed: derive_seed(cfg.seed, &[n as u64, 1]),
                };
                let mut asy_times = Vec::with_capacity(cfg.reps);
                let mut boot_times = Vec::with_capacity(cfg.reps);
                let (mut asy_peak, mut boot_peak) = (0usize, 0usize);
                for _ in 0..cfg.reps {
                    let (t, m) = measure(probe, || confidence_intervals(&data, cfg.alpha))?;
                    asy_times.push(t);
                    asy_peak = asy_peak.max(m);
                    let (t, m) = measure(probe, || bootstrap_ci(&data, &boot))?;
                    boot_times.push(t);
                    boot_peak = boot_peak.max(m);
                }
                let asymptotic_secs = median(asy_times).as_secs_f64();
                let bootstrap_secs = median(boot_times).as_secs_f64();
                Ok(BenchmarkRow {
                    n,
                    d: cfg.d,
                    n_bootstrap: cfg.n_bootstrap,
                    asymptotic_secs,
                    bootstrap_secs,
                    time_ratio: bootstrap_secs / asymptotic_secs.max(f64::MIN_POSITIVE),
                    asymptotic_peak_bytes: asy_peak,
                    bootstrap_peak_bytes: boot_peak,
                    memory_ratio: if asy_peak == 0 {
                        0.0
                    } else {
                        boot_peak as f64 / asy_peak as f64
                    },
                })
            })
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(BenchmarkReport {
        config: cfg.clone(),
        rows,
    })
}
