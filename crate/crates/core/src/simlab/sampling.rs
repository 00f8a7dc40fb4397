//! Data-generating processes for the coverage studies.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::rng_for;

/// `Σ = c J + (1 - c) I` of dimension `d + 1`.
pub fn compound_symmetry_sigma(d: usize, c: f64) -> Result<Matrix> {
    if !(0.0..1.0).contains(&c) {
        return Err(Error::InvalidConfig(format!(
            "equicorrelation must lie in [0, 1), got {c}"
        )));
    }
    Ok(Matrix::from_fn(d + 1, d + 1, |i, j| if i == j { 1.0 } else { c }))
}

fn standard_normal_vec<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = StandardNormal.sample(rng);
    }
}

/// `L z` for lower-triangular `L`, written into `out`.
fn lower_times(l: &Matrix, z: &[f64], out: &mut [f64]) {
    for i in 0..z.len() {
        out[i] = l.row(i)[..=i].iter().zip(z).map(|(a, b)| a * b).sum();
    }
}

/// `n` draws from `N(0, Σ)` as `L z` with `Σ = L Lᵀ`.
pub fn sample_mvnormal_with<R: Rng + ?Sized>(sigma: &Matrix, n: usize, rng: &mut R) -> Result<Dataset> {
    let l = sigma.cholesky()?;
    let p = sigma.rows();
    let mut values = vec![0.0; n * p];
    let mut z = vec![0.0; p];
    for row in values.chunks_exact_mut(p) {
        standard_normal_vec(rng, &mut z);
        lower_times(&l, &z, row);
    }
    Dataset::from_row_major(values, p)
}

pub fn sample_mvnormal(sigma: &Matrix, n: usize, seed: u64) -> Result<Dataset> {
    sample_mvnormal_with(sigma, n, &mut rng_for(seed, &[]))
}

/// `n` draws from the multivariate t with scale `Σ` and `ν` degrees of
/// freedom: `X = Z / sqrt(W / ν)`, `Z ~ N(0, Σ)`, `W ~ χ²_ν`.
pub fn sample_mvt_with<R: Rng + ?Sized>(
    sigma: &Matrix,
    nu: f64,
    n: usize,
    rng: &mut R,
) -> Result<Dataset> {
    if !(nu > 2.0) || !nu.is_finite() {
        return Err(Error::InvalidNu(nu));
    }
    let chi = ChiSquared::new(nu).map_err(|_| Error::InvalidNu(nu))?;
    let l = sigma.cholesky()?;
    let p = sigma.rows();
    let mut values = vec![0.0; n * p];
    let mut z = vec![0.0; p];
    for row in values.chunks_exact_mut(p) {
        standard_normal_vec(rng, &mut z);
        lower_times(&l, &z, row);
        let w: f64 = chi.sample(rng);
        let scale = (nu / w).sqrt();
        row.iter_mut().for_each(|v| *v *= scale);
    }
    Dataset::from_row_major(values, p)
}

pub fn sample_mvt(sigma: &Matrix, nu: f64, n: usize, seed: u64) -> Result<Dataset> {
    sample_mvt_with(sigma, nu, n, &mut rng_for(seed, &[]))
}

/// One draw from `W_p(Scale, ν)` by the Bartlett decomposition
/// `W = L A Aᵀ Lᵀ`, `A` lower triangular with `A_ii² ~ χ²_{ν-i}` (0-based
/// `i`) and standard normal entries below the diagonal.
pub fn sample_wishart_with<R: Rng + ?Sized>(scale: &Matrix, nu: f64, rng: &mut R) -> Result<Matrix> {
    let p = scale.rows();
    if !nu.is_finite() || nu < p as f64 {
        return Err(Error::InvalidNu(nu));
    }
    let l = scale.cholesky()?;
    let mut a = Matrix::zeros(p, p);
    for i in 0..p {
        let chi = ChiSquared::new(nu - i as f64).map_err(|_| Error::InvalidNu(nu))?;
        a[(i, i)] = chi.sample(rng).sqrt();
        for j in 0..i {
            a[(i, j)] = StandardNormal.sample(rng);
        }
    }
    let la = &l * &a;
    let mut w = &la * &la.transpose();
    for i in 0..p {
        for j in 0..i {
            let v = 0.5 * (w[(i, j)] + w[(j, i)]);
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    Ok(w)
}

pub fn sample_wishart(scale: &Matrix, nu: f64, seed: u64) -> Result<Matrix> {
    sample_wishart_with(scale, nu, &mut rng_for(seed, &[]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corrkit::sample_correlation;

    #[test]
    fn compound_symmetry_shape() {
        assert_eq!(compound_symmetry_sigma(3, 0.0).unwrap(), Matrix::identity(4));
        let s = compound_symmetry_sigma(3, 0.3).unwrap();
        assert_eq!(s.rows(), 4);
        assert_eq!(s[(0, 0)], 1.0);
        assert_eq!(s[(2, 1)], 0.3);
        assert!(compound_symmetry_sigma(3, 1.0).is_err());
        assert!(compound_symmetry_sigma(3, -0.1).is_err());
    }

    #[test]
    fn samplers_are_seed_deterministic() {
        let s = compound_symmetry_sigma(2, 0.5).unwrap();
        assert_eq!(sample_mvnormal(&s, 50, 9).unwrap(), sample_mvnormal(&s, 50, 9).unwrap());
        assert_ne!(sample_mvnormal(&s, 50, 9).unwrap(), sample_mvnormal(&s, 50, 10).unwrap());
        assert_eq!(sample_mvt(&s, 5.0, 50, 9).unwrap(), sample_mvt(&s, 5.0, 50, 9).unwrap());
        assert_eq!(sample_wishart(&s, 10.0, 9).unwrap(), sample_wishart(&s, 10.0, 9).unwrap());
    }

    #[test]
    fn invalid_degrees_of_freedom() {
        let s = compound_symmetry_sigma(2, 0.5).unwrap();
        assert_eq!(sample_mvt(&s, 2.0, 10, 0).unwrap_err(), Error::InvalidNu(2.0));
        assert_eq!(sample_wishart(&s, 2.0, 0).unwrap_err(), Error::InvalidNu(2.0));
    }

    #[test]
    fn wishart_draws_are_spd() {
        let s = compound_symmetry_sigma(3, 0.3).unwrap();
        for seed in 0..50 {
            let w = sample_wishart(&s, 4.0, seed).unwrap();
            assert!(w.cholesky().is_ok());
        }
    }

    #[test]
    fn identity_sample_correlations_are_small() {
        let n = 20_000;
        let data = sample_mvnormal(&Matrix::identity(4), n, 5).unwrap();
        let m = sample_correlation(&data).unwrap();
        let bound = 5.0 / (n as f64).sqrt();
        for i in 0..4 {
            for j in 0..i {
                assert!(m.rho(i, j).abs() < bound);
            }
        }
    }
}
