//! Monte Carlo coverage studies and computational benchmarks.

mod benchmark;
mod clopper;
mod sampling;
mod study;

pub use benchmark::{
    run_benchmark, BenchmarkConfig, BenchmarkReport, BenchmarkRow, MemoryProbe, NoProbe,
};
pub use clopper::clopper_pearson;
pub use sampling::{
    compound_symmetry_sigma, sample_mvnormal, sample_mvnormal_with, sample_mvt, sample_mvt_with,
    sample_wishart, sample_wishart_with,
};
pub use study::{
    full_grid_sizes, run_difference_study, run_replicate, run_study, CoverageResult, CoverageRow,
    Method, RejectionResult, ReplicateOutcome, Study, StudyConfig, StudyResult, DESK_GRID_C,
    DESK_GRID_N, FULL_GRID_C, MAX_FAILURE_FRACTION,
};
