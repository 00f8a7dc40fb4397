//! Correlation matrices, principal-submatrix determinants and scaled
//! adjugates `|R(U)| R(U)⁻¹`.
//!
//! A [`CorrelationModel`] is immutable apart from two lazily filled caches
//! indexed by [`VariableSet`] mask. Cache slots are `OnceLock`s, so
//! concurrent readers either see a fully written value or compute it
//! themselves; the first writer wins and later writers are discarded.

use std::sync::{Arc, OnceLock};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::numeric::CompensatedSum;
use crate::varset::VariableSet;

/// Determinants below this magnitude are treated as singular.
pub const SINGULARITY_TOL: f64 = 1e-12;

/// Hard cap on the number of covariates.
pub const MAX_COVARIATES: usize = 20;

/// Above this many covariates a warning is logged.
pub const WARN_COVARIATES: usize = 12;

#[derive(Clone, Debug)]
pub struct CorrelationModel {
    corr: Matrix,
    det_cache: Box<[OnceLock<f64>]>,
    adj_cache: Box<[OnceLock<Arc<Matrix>>]>,
}

fn check_dimension(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::NoCovariates);
    }
    if d > MAX_COVARIATES {
        return Err(Error::DimensionGuard {
            d,
            max: MAX_COVARIATES,
        });
    }
    if d > WARN_COVARIATES {
        log::warn!(
            "d = {d} covariates: subset enumeration touches 2^{d} = {} sets",
            1u64 << d
        );
    }
    Ok(())
}

impl CorrelationModel {
    /// Wraps a correlation matrix. The matrix must be square with at least
    /// two rows, symmetric within 1e-12 and have a unit diagonal (within
    /// 1e-12); it is stored exactly symmetric with diagonal exactly 1.
    pub fn new(corr: Matrix) -> Result<Self> {
        if !corr.is_square() {
            return Err(Error::InvalidConfig(format!(
                "correlation matrix must be square, got {}x{}",
                corr.rows(),
                corr.cols()
            )));
        }
        let dim = corr.rows();
        check_dimension(dim.saturating_sub(1))?;
        for i in 0..dim {
            for j in 0..dim {
                if !corr[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i, column: j });
                }
            }
            if (corr[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidConfig(format!(
                    "diagonal entry {i} of a correlation matrix is {}",
                    corr[(i, i)]
                )));
            }
        }
        if !corr.is_symmetric(1e-12) {
            return Err(Error::InvalidConfig(
                "correlation matrix is not symmetric".into(),
            ));
        }
        let corr = Matrix::from_fn(dim, dim, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Less => corr[(i, j)],
            std::cmp::Ordering::Greater => corr[(j, i)],
        });
        Ok(Self::from_trusted(corr))
    }

    fn from_trusted(corr: Matrix) -> Self {
        let slots = 1usize << corr.rows();
        CorrelationModel {
            corr,
            det_cache: (0..slots).map(|_| OnceLock::new()).collect(),
            adj_cache: (0..slots).map(|_| OnceLock::new()).collect(),
        }
    }

    /// Correlation matrix induced by a symmetric positive definite covariance.
    pub fn from_covariance(cov: &Matrix) -> Result<Self> {
        if !cov.is_square() || !cov.is_symmetric(1e-12 * max_abs(cov).max(1.0)) {
            return Err(Error::NotPositiveDefinite);
        }
        cov.cholesky()?;
        let dim = cov.rows();
        check_dimension(dim.saturating_sub(1))?;
        let sd: Vec<f64> = (0..dim).map(|i| cov[(i, i)].sqrt()).collect();
        let corr = Matrix::from_fn(dim, dim, |i, j| {
            if i == j {
                1.0
            } else {
                let (a, b) = if i < j { (i, j) } else { (j, i) };
                cov[(a, b)] / (sd[a] * sd[b])
            }
        });
        Ok(Self::from_trusted(corr))
    }

    /// Number of covariates `d`.
    pub fn d(&self) -> usize {
        self.corr.rows() - 1
    }

    /// Matrix dimension `d + 1`.
    pub fn dim(&self) -> usize {
        self.corr.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.corr
    }

    /// Correlation between variables `i` and `j` (0 = response).
    #[inline]
    pub fn rho(&self, i: usize, j: usize) -> f64 {
        self.corr[(i, j)]
    }

    fn check_set(&self, set: VariableSet) -> Result<()> {
        if set.is_empty() {
            return Err(Error::EmptySet);
        }
        if !set.is_subset_of(VariableSet::all(self.d())) {
            let bad = set.iter().find(|&i| i > self.d()).unwrap_or_default();
            return Err(Error::InvalidIndex {
                index: bad,
                bound: self.dim(),
            });
        }
        Ok(())
    }

    /// `|R(U)|`, memoized. Singletons return exactly 1.
    pub fn subset_determinant(&self, set: VariableSet) -> Result<f64> {
        self.check_set(set)?;
        Ok(*self.det_cache[set.mask() as usize].get_or_init(|| {
            if set.len() == 1 {
                1.0
            } else {
                self.corr.principal(&set.to_vec()).determinant()
            }
        }))
    }

    /// `|R(U)|`, failing with `SingularSubmatrix` when it is below 1e-12.
    pub fn nonsingular_determinant(&self, set: VariableSet) -> Result<f64> {
        let det = self.subset_determinant(set)?;
        if det.abs() < SINGULARITY_TOL {
            return Err(Error::SingularSubmatrix { set, det });
        }
        Ok(det)
    }

    /// The scaled adjugate `|R(U)| R(U)⁻¹`, rows and columns in ascending
    /// index order of `set`. Memoized.
    pub fn scaled_adjugate(&self, set: VariableSet) -> Result<Arc<Matrix>> {
        let det = self.nonsingular_determinant(set)?;
        let slot = &self.adj_cache[set.mask() as usize];
        if let Some(m) = slot.get() {
            return Ok(Arc::clone(m));
        }
        let adj = if set.len() == 1 {
            Matrix::identity(1)
        } else {
            let sub = self.corr.principal(&set.to_vec());
            let mut adj = sub.lu().inverse().scale(det);
            // Symmetrize: the adjugate of a symmetric matrix is symmetric.
            for i in 0..adj.rows() {
                for j in 0..i {
                    let v = 0.5 * (adj[(i, j)] + adj[(j, i)]);
                    adj[(i, j)] = v;
                    adj[(j, i)] = v;
                }
            }
            adj
        };
        Ok(Arc::clone(slot.get_or_init(|| Arc::new(adj))))
    }
}

fn max_abs(m: &Matrix) -> f64 {
    m.as_slice().iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// Sample correlation matrix of all `d + 1` columns.
pub fn sample_correlation(data: &Dataset) -> Result<CorrelationModel> {
    correlation_impl(data, (0..data.n()).map(|i| data.row(i)), data.n())
}

/// Sample correlation of the rows selected by `rows` (repeats allowed), as
/// used by the bootstrap.
pub fn sample_correlation_rows(data: &Dataset, rows: &[usize]) -> Result<CorrelationModel> {
    if let Some(&bad) = rows.iter().find(|&&r| r >= data.n()) {
        return Err(Error::InvalidIndex {
            index: bad,
            bound: data.n(),
        });
    }
    correlation_impl(data, rows.iter().map(|&i| data.row(i)), rows.len())
}

fn correlation_impl<'a, I>(data: &'a Dataset, rows: I, n: usize) -> Result<CorrelationModel>
where
    I: Iterator<Item = &'a [f64]> + Clone,
{
    let p = data.width();
    check_dimension(p - 1)?;
    if n < 2 {
        return Err(Error::TooFewSamples { n, min: 2 });
    }

    let mut sums = vec![CompensatedSum::default(); p];
    let mut lo = vec![f64::INFINITY; p];
    let mut hi = vec![f64::NEG_INFINITY; p];
    for (r, row) in rows.clone().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { row: r, column: j });
            }
            sums[j].add(v);
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
        }
    }
    if let Some(column) = (0..p).find(|&j| lo[j] == hi[j]) {
        return Err(Error::ZeroVariance { column });
    }
    let means: Vec<f64> = sums.iter().map(|s| s.total() / n as f64).collect();

    // Upper triangle (including the diagonal) of the centred cross products.
    let mut cross = vec![0.0; p * (p + 1) / 2];
    let mut centred = vec![0.0; p];
    for row in rows {
        for j in 0..p {
            centred[j] = row[j] - means[j];
        }
        let mut idx = 0;
        for a in 0..p {
            let ca = centred[a];
            for b in a..p {
                cross[idx] += ca * centred[b];
                idx += 1;
            }
        }
    }
    let tri = |a: usize, b: usize| a * p - a * (a + 1) / 2 + b;
    let sd: Vec<f64> = (0..p).map(|j| cross[tri(j, j)].sqrt()).collect();
    if let Some(column) = (0..p).find(|&j| sd[j] == 0.0) {
        return Err(Error::ZeroVariance { column });
    }
    let corr = Matrix::from_fn(p, p, |i, j| {
        if i == j {
            1.0
        } else {
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            (cross[tri(a, b)] / (sd[a] * sd[b])).clamp(-1.0, 1.0)
        }
    });
    Ok(CorrelationModel::from_trusted(corr))
}
