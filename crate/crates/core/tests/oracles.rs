//! Cross-checks against independent reference computations.

mod common;

use common::{brute_force_shapley, random_correlation, random_model, regression_r2, rng};
use shapley_r2::asymptotics::AsymptoticModel;
use shapley_r2::{
    acov_corr, confidence_intervals, r_squared_subset, sample_correlation, shapley_subset_form,
    CorrelationModel, Dataset, Matrix, VariableSet,
};

#[test]
fn r_squared_matches_normal_equations() {
    let mut r = rng(1);
    for d in 1..=6 {
        for _ in 0..20 {
            let model = random_model(&mut r, d);
            for mask in 0u32..1 << d {
                let set = VariableSet::from_mask(mask << 1);
                let ours = r_squared_subset(&model, set).unwrap();
                let oracle = regression_r2(model.matrix(), &set.to_vec());
                assert!((ours - oracle).abs() < 1e-10, "{set}: {ours} vs {oracle}");
            }
        }
    }
}

#[test]
fn shapley_matches_factorial_definition() {
    let mut r = rng(2);
    for d in 1..=6 {
        for _ in 0..10 {
            let corr = random_correlation(&mut r, d + 1);
            let ours = shapley_subset_form(&CorrelationModel::new(corr.clone()).unwrap()).unwrap();
            for (x, y) in ours.values.iter().zip(brute_force_shapley(&corr)) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn sample_r_squared_matches_least_squares_fit() {
    // Unstandardized OLS with intercept: R² = 1 - SSE/SST.
    let mut r = rng(3);
    let data = common::random_dataset(&mut r, 3, 80);
    let n = data.n();
    let design: Vec<Vec<f64>> = data
        .rows()
        .map(|row| std::iter::once(1.0).chain(row[1..].iter().copied()).collect())
        .collect();
    let y: Vec<f64> = data.column(0).collect();
    let xtx: Vec<Vec<f64>> = (0..4)
        .map(|a| (0..4).map(|b| design.iter().map(|x| x[a] * x[b]).sum()).collect())
        .collect();
    let xty: Vec<f64> = (0..4)
        .map(|a| design.iter().zip(&y).map(|(x, v)| x[a] * v).sum())
        .collect();
    let beta = common::solve(&xtx, &xty);
    let mean = y.iter().sum::<f64>() / n as f64;
    let sse: f64 = design
        .iter()
        .zip(&y)
        .map(|(x, v)| (v - x.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>()).powi(2))
        .sum();
    let sst: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let model = sample_correlation(&data).unwrap();
    let ours = shapley_subset_form(&model).unwrap().r_squared;
    assert!((ours - (1.0 - sse / sst)).abs() < 1e-10);
}

/// Shapley vector as a function of the off-diagonal correlations.
fn shapley_at(corr: &Matrix) -> Vec<f64> {
    shapley_subset_form(&CorrelationModel::new(corr.clone()).unwrap())
        .unwrap()
        .values
}

#[test]
fn shapley_covariance_matches_numerical_delta_method() {
    // acov(V) = J Z Jᵀ with J the Jacobian of V in the off-diagonal
    // correlations (central differences) and Z their asymptotic covariance.
    let mut r = rng(4);
    for d in 1..=4 {
        for _ in 0..4 {
            let corr = random_correlation(&mut r, d + 1);
            let dim = d + 1;
            let pairs: Vec<(usize, usize)> = (0..dim)
                .flat_map(|g| (g + 1..dim).map(move |h| (g, h)))
                .collect();
            let h = 1e-6;
            let jac: Vec<Vec<f64>> = pairs
                .iter()
                .map(|&(g, k)| {
                    let bump = |delta: f64| {
                        let mut m = corr.clone();
                        m[(g, k)] += delta;
                        m[(k, g)] += delta;
                        shapley_at(&m)
                    };
                    let (up, down) = (bump(h), bump(-h));
                    up.iter().zip(&down).map(|(a, b)| (a - b) / (2.0 * h)).collect()
                })
                .collect();
            let model = CorrelationModel::new(corr.clone()).unwrap();
            let kappa = 1.4;
            let am = AsymptoticModel::new(model.clone(), kappa).unwrap();
            let acov = am.shapley_acov().unwrap();
            for j in 0..d {
                for k in 0..d {
                    let mut oracle = 0.0;
                    for (a, &(g1, h1)) in pairs.iter().enumerate() {
                        for (b, &(g2, h2)) in pairs.iter().enumerate() {
                            oracle += jac[a][j] * jac[b][k] * acov_corr(&model, kappa, g1, h1, g2, h2);
                        }
                    }
                    let got = acov[(j, k)];
                    assert!(
                        (got - oracle).abs() < 1e-6 * oracle.abs().max(1.0),
                        "d={d} ({j},{k}): {got} vs {oracle}"
                    );
                }
            }
        }
    }
}

#[test]
fn four_term_form_matches_bilinear_form() {
    let mut r = rng(5);
    for d in 1..=5 {
        let am = AsymptoticModel::new(random_model(&mut r, d), 1.2).unwrap();
        let acov = am.shapley_acov().unwrap();
        for j in 0..d {
            for k in 0..d {
                let terms = am.covariance_terms(j, k).unwrap();
                assert!((terms.total() - acov[(j, k)]).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn symmetric_and_reference_determinant_covariances_agree() {
    let mut r = rng(6);
    let am = AsymptoticModel::new(random_model(&mut r, 3), 0.9).unwrap();
    for u in 1u32..16 {
        for v in 1u32..16 {
            let (u, v) = (VariableSet::from_mask(u), VariableSet::from_mask(v));
            let a = am.acov_det(u, v).unwrap();
            let b = am.acov_det_unsymmetric(u, v).unwrap();
            assert!((a - b).abs() < 1e-12);
            assert_eq!(a.to_bits(), am.acov_det(v, u).unwrap().to_bits());
        }
    }
}

#[test]
fn d_one_collapse_is_exact() {
    let mut r = rng(7);
    for _ in 0..100 {
        let am = AsymptoticModel::new(random_model(&mut r, 1), 1.0).unwrap();
        let s = VariableSet::singleton(1);
        assert_eq!(am.shapley_acov().unwrap()[(0, 0)], am.acov_r2(s, s).unwrap());
    }
}

#[test]
fn normal_theory_interval_for_simple_correlation() {
    // For d = 1 the interval half-width is z · 2|ρ|(1-ρ²) sqrt(κ/n).
    let rows: Vec<[f64; 2]> = (0..200)
        .map(|i| {
            let t = i as f64;
            let x = (0.31 * t).sin() + 0.2 * (1.7 * t).cos();
            [x + 0.8 * (2.3 * t).sin(), x]
        })
        .collect();
    let data = Dataset::from_rows(&rows).unwrap();
    let inf = confidence_intervals(&data, 0.05).unwrap();
    let rho = sample_correlation(&data).unwrap().rho(0, 1);
    let kappa = inf.covariance.kappa_used;
    let half = 1.959_963_984_540_054 * 2.0 * rho.abs() * (1.0 - rho * rho) * (kappa / 200.0).sqrt();
    let (lo, hi) = inf.intervals[0];
    assert!(((hi - lo) / 2.0 - half).abs() < 1e-9);
    assert!(((hi + lo) / 2.0 - rho * rho).abs() < 1e-12);
}
