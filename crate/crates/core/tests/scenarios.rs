//! End-to-end scenarios on constructed datasets.

use shapley_r2::simlab::{
    run_study, sample_mvnormal, Method, Study, StudyConfig,
};
use shapley_r2::{
    bootstrap_ci, confidence_intervals, difference_test, population_shapley, r_squared_subset,
    BootstrapConfig, CorrelationModel, Dataset, Error, Matrix, VariableSet,
};

/// Covariance of `(y, x1, x2, x3)` with independent unit-variance
/// covariates and `y = b·x + e`, `Var(e) = 1`.
fn linear_model_covariance(beta: [f64; 3]) -> Matrix {
    let var_y = 1.0 + beta.iter().map(|b| b * b).sum::<f64>();
    Matrix::from_fn(4, 4, |i, j| match (i, j) {
        (0, 0) => var_y,
        (0, k) | (k, 0) => beta[k - 1],
        (a, b) if a == b => 1.0,
        _ => 0.0,
    })
}

#[test]
fn monotonicity_two_game_scenario() {
    // Raising the first coefficient raises x1's marginal contribution to
    // every coalition; its Shapley value must not fall.
    let weak = linear_model_covariance([0.5, 1.0, 0.7]);
    let strong = linear_model_covariance([1.5, 1.0, 0.7]);
    let mw = CorrelationModel::from_covariance(&weak).unwrap();
    let ms = CorrelationModel::from_covariance(&strong).unwrap();
    for mask in 0u32..8 {
        let s = VariableSet::from_mask(mask << 1);
        if s.contains(1) {
            continue;
        }
        let gain = |m: &CorrelationModel| {
            r_squared_subset(m, s.with(1)).unwrap() - r_squared_subset(m, s).unwrap()
        };
        assert!(gain(&ms) >= gain(&mw), "premise fails at {s}");
    }
    let vw = population_shapley(&weak).unwrap();
    let vs = population_shapley(&strong).unwrap();
    assert!(vs.values[0] > vw.values[0]);

    // The same ordering holds for samples drawn with common random numbers.
    let dw = sample_mvnormal(&weak, 5_000, 8).unwrap();
    let ds = sample_mvnormal(&strong, 5_000, 8).unwrap();
    let sw = confidence_intervals(&dw, 0.05).unwrap().shapley.values[0];
    let ss = confidence_intervals(&ds, 0.05).unwrap().shapley.values[0];
    assert!(ss > sw);
}

#[test]
fn independent_covariates_split_r_squared_by_coefficient() {
    // With independent covariates R²_S is additive, so v_j = b_j²/Var(y).
    let beta = [0.5, 1.0, 0.7];
    let v = population_shapley(&linear_model_covariance(beta)).unwrap();
    let var_y = 1.0 + beta.iter().map(|b| b * b).sum::<f64>();
    for (j, b) in beta.iter().enumerate() {
        assert!((v.values[j] - b * b / var_y).abs() < 1e-12);
    }
}

#[test]
fn asymptotic_and_bootstrap_agree_at_large_n() {
    let sigma = linear_model_covariance([0.8, 0.4, 0.0]);
    let data = sample_mvnormal(&sigma, 4_000, 12).unwrap();
    let asy = confidence_intervals(&data, 0.05).unwrap();
    let boot = bootstrap_ci(
        &data,
        &BootstrapConfig {
            n_resamples: 400,
            alpha: 0.05,
            seed: 5,
        },
    )
    .unwrap();
    for j in 0..2 {
        let (a, b) = (asy.intervals[j], boot.intervals[j]);
        let (wa, wb) = (a.1 - a.0, b.1 - b.0);
        assert!((wa / wb - 1.0).abs() < 0.3, "widths {wa} vs {wb}");
    }
}

#[test]
fn difference_test_detects_unequal_contributions() {
    let sigma = linear_model_covariance([1.0, 0.3, 0.3]);
    let data = sample_mvnormal(&sigma, 2_000, 3).unwrap();
    assert!(difference_test(&data, 0, 1).unwrap().p_value < 1e-6);
    let eq = difference_test(&data, 1, 2).unwrap();
    assert!(eq.p_value > 1e-3);
    assert!(matches!(difference_test(&data, 1, 1), Err(Error::SameCovariate(1))));
    assert!(matches!(difference_test(&data, 0, 3), Err(Error::InvalidIndex { .. })));
}

#[test]
fn constant_column_is_rejected() {
    let rows = vec![[1.0, 2.0, 5.0], [2.0, 1.0, 5.0], [3.0, 3.0, 5.0], [4.0, 0.5, 5.0]];
    assert!(matches!(Dataset::from_rows(&rows), Err(Error::ZeroVariance { column: 2 })));
}

#[test]
fn tiny_samples_are_recorded_as_failures() {
    // At n = 4 with three covariates the kurtosis estimate is undefined, so
    // every asymptotic replicate fails and the cell aborts.
    let cfg = StudyConfig {
        study: Study::A,
        n: 4,
        n_replicates: 20,
        methods: vec![Method::Asymptotic],
        ..StudyConfig::default()
    };
    assert!(matches!(run_study(&cfg), Err(Error::TooManyFailures { .. })));
}
