#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shapley_r2::{CorrelationModel, Dataset, Matrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random SPD correlation matrix of dimension `dim`, from `A Aᵀ + εI`
/// normalized to unit diagonal.
pub fn random_correlation<R: Rng>(rng: &mut R, dim: usize) -> Matrix {
    let k = dim + 2;
    let a: Vec<Vec<f64>> = (0..dim)
        .map(|_| (0..k).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let cov = Matrix::from_fn(dim, dim, |i, j| {
        let dot: f64 = a[i].iter().zip(&a[j]).map(|(x, y)| x * y).sum();
        if i == j {
            dot + 0.05
        } else {
            dot
        }
    });
    Matrix::from_fn(dim, dim, |i, j| {
        if i == j {
            1.0
        } else {
            cov[(i, j)] / (cov[(i, i)] * cov[(j, j)]).sqrt()
        }
    })
}

pub fn random_model<R: Rng>(rng: &mut R, d: usize) -> CorrelationModel {
    CorrelationModel::new(random_correlation(rng, d + 1)).expect("random SPD correlation")
}

/// Linear-model data: covariates mixed through a random matrix and a
/// response with random coefficients plus noise.
pub fn random_dataset<R: Rng>(rng: &mut R, d: usize, n: usize) -> Dataset {
    let mix: Vec<Vec<f64>> = (0..d)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let beta: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let z: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let x: Vec<f64> = (0..d)
                .map(|i| z[i] + 0.5 * mix[i].iter().zip(&z).map(|(m, v)| m * v).sum::<f64>())
                .collect();
            let y = x.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>() + rng.random_range(-1.0..1.0);
            std::iter::once(y).chain(x).collect()
        })
        .collect();
    Dataset::from_rows(&rows).expect("continuous random data")
}

/// Solves `A x = b` by Gauss–Jordan elimination with partial pivoting.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &v)| row.iter().copied().chain(std::iter::once(v)).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..=n {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    (0..n).map(|i| m[i][n] / m[i][i]).collect()
}

/// `R²` of the response on covariate set `cols` (1-based) through the
/// normal equations `r_xyᵀ R_xx⁻¹ r_xy`.
pub fn regression_r2(corr: &Matrix, cols: &[usize]) -> f64 {
    if cols.is_empty() {
        return 0.0;
    }
    let rxx: Vec<Vec<f64>> = cols
        .iter()
        .map(|&i| cols.iter().map(|&j| corr[(i, j)]).collect())
        .collect();
    let rxy: Vec<f64> = cols.iter().map(|&i| corr[(i, 0)]).collect();
    let beta = solve(&rxx, &rxy);
    beta.iter().zip(&rxy).map(|(b, r)| b * r).sum()
}

/// Shapley values by the factorial definition over all subsets, using the
/// regression oracle for `R²`.
pub fn brute_force_shapley(corr: &Matrix) -> Vec<f64> {
    let d = corr.rows() - 1;
    let fact = |k: usize| (1..=k).map(|v| v as f64).product::<f64>();
    (1..=d)
        .map(|j| {
            let others: Vec<usize> = (1..=d).filter(|&i| i != j).collect();
            (0u32..1 << others.len())
                .map(|mask| {
                    let s: Vec<usize> = others
                        .iter()
                        .enumerate()
                        .filter(|(b, _)| mask >> b & 1 == 1)
                        .map(|(_, &i)| i)
                        .collect();
                    let mut with = s.clone();
                    with.push(j);
                    let w = fact(s.len()) * fact(d - s.len() - 1) / fact(d);
                    w * (regression_r2(corr, &with) - regression_r2(corr, &s))
                })
                .sum()
        })
        .collect()
}

/// Symmetric permutation `P R Pᵀ` where new index `i` holds old `perm[i]`.
pub fn permute(m: &Matrix, perm: &[usize]) -> Matrix {
    Matrix::from_fn(m.rows(), m.cols(), |i, j| m[(perm[i], perm[j])])
}
