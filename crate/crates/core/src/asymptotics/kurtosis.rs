use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::numeric::CompensatedSum;

/// Mardia's multivariate kurtosis, normalized so the multivariate normal
/// has `kappa = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KurtosisEstimate {
    pub kappa: f64,
    pub n: usize,
}

/// `κ̂ = Σ_i [(Z_i - Z̄)ᵀ Σ̂⁻¹ (Z_i - Z̄)]² / (n (d+1) (d+3))`.
///
/// `Σ̂` is the divisor-`n` sample covariance of all `d + 1` columns. With
/// the divisor-`n - 1` convention the estimate would shrink by the factor
/// `((n-1)/n)²`.
pub fn mardia_kurtosis(data: &Dataset) -> Result<KurtosisEstimate> {
    let n = data.n();
    let p = data.width();
    if n <= p {
        return Err(Error::TooFewSamples { n, min: p + 1 });
    }

    let means: Vec<f64> = (0..p)
        .map(|j| data.column(j).collect::<CompensatedSum>().total() / n as f64)
        .collect();
    let mut cov = Matrix::zeros(p, p);
    let mut centred = vec![0.0; p];
    for row in data.rows() {
        for j in 0..p {
            centred[j] = row[j] - means[j];
        }
        for a in 0..p {
            for b in a..p {
                cov[(a, b)] += centred[a] * centred[b];
            }
        }
    }
    for a in 0..p {
        for b in a..p {
            let v = cov[(a, b)] / n as f64;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    let chol = cov.cholesky().map_err(|_| Error::SingularCovariance)?;

    // Mahalanobis form via forward substitution against the Cholesky factor.
    let mut total = CompensatedSum::default();
    let mut y = vec![0.0; p];
    for row in data.rows() {
        let mut form = 0.0;
        for i in 0..p {
            let mut v = row[i] - means[i];
            for k in 0..i {
                v -= chol[(i, k)] * y[k];
            }
            y[i] = v / chol[(i, i)];
            form += y[i] * y[i];
        }
        total.add(form * form);
    }
    let kappa = total.total() / (n as f64 * p as f64 * (p + 2) as f64);
    Ok(KurtosisEstimate { kappa, n })
}
