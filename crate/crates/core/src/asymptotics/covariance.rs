//! Delta-method covariances: correlations → determinants → `R²` → Shapley
//! values, all under an elliptical model with kurtosis `κ`.
//!
//! [`AsymptoticModel`] binds a correlation model to a `κ` and memoizes the
//! intermediate quantities. Determinant gradients are stored as sparse
//! vectors over the off-diagonal pairs `(g, h)`, `g < h`, so that
//! `acov(δ(U), δ(V)) = a_Uᵀ Z a_V` with `Z` the pair covariance matrix.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corrkit::CorrelationModel;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::numeric::pairwise_sum;
use crate::shapley::{shapley_coefficients, weight_table};
use crate::varset::VariableSet;

/// Asymptotic covariance of the normalized sample correlations `ζ_gh` and
/// `ζ_jk` (variable indices, 0 = response).
///
/// Returns 0 whenever `g = h` or `j = k`: diagonal correlations are the
/// constant 1, so their normalized deltas vanish.
pub fn acov_corr(model: &CorrelationModel, kappa: f64, g: usize, h: usize, j: usize, k: usize) -> f64 {
    if g == h || j == k {
        return 0.0;
    }
    let r = |a: usize, b: usize| model.rho(a, b);
    let (gh, jk) = (r(g, h), r(j, k));
    let (gj, hj, gk, hk) = (r(g, j), r(h, j), r(g, k), r(h, k));
    let first = gh * jk * (gj * gj + hj * hj + gk * gk + hk * hk) / 2.0 + gj * hk + gk * hj;
    let second = gh * (hj * hk + gj * gk) + jk * (gj * hj + gk * hk);
    kappa * (first - second)
}

/// Sparse gradient of `|R(U)|` over off-diagonal pairs: entries
/// `(pair index, r*_U(g, h))` with `r* = 2 |R(U)| R(U)⁻¹` off the diagonal.
#[derive(Debug)]
struct Gradient {
    entries: Vec<(usize, f64)>,
}

/// Four components of `acov(ξ_j, ξ_k) = a + b - c - d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceTerms {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl CovarianceTerms {
    pub fn total(&self) -> f64 {
        self.a + self.b - self.c - self.d
    }
}

pub struct AsymptoticModel {
    model: CorrelationModel,
    kappa: f64,
    /// Covariance of `ζ` over off-diagonal pairs, `P × P` with `P = (d+1)d/2`.
    zeta: Matrix,
    gradients: Box<[OnceLock<Arc<Gradient>>]>,
    projections: Box<[OnceLock<Arc<Vec<f64>>>]>,
    det_memo: RwLock<HashMap<(u32, u32), f64>>,
    r2_memo: RwLock<HashMap<(u32, u32), f64>>,
}

impl AsymptoticModel {
    pub fn new(model: CorrelationModel, kappa: f64) -> Result<Self> {
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(Error::InvalidConfig(format!("kurtosis must be >= 0, got {kappa}")));
        }
        let pairs = pair_list(model.dim());
        let p = pairs.len();
        let mut zeta = Matrix::zeros(p, p);
        for (a, &(g, h)) in pairs.iter().enumerate() {
            for (b, &(j, k)) in pairs.iter().enumerate().skip(a) {
                let v = acov_corr(&model, kappa, g, h, j, k);
                zeta[(a, b)] = v;
                zeta[(b, a)] = v;
            }
        }
        let slots = 1usize << model.dim();
        Ok(AsymptoticModel {
            model,
            kappa,
            zeta,
            gradients: (0..slots).map(|_| OnceLock::new()).collect(),
            projections: (0..slots).map(|_| OnceLock::new()).collect(),
            det_memo: RwLock::new(HashMap::new()),
            r2_memo: RwLock::new(HashMap::new()),
        })
    }

    pub fn correlation(&self) -> &CorrelationModel {
        &self.model
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn d(&self) -> usize {
        self.model.d()
    }

    fn pair_index(&self, g: usize, h: usize) -> usize {
        debug_assert!(g < h);
        let dim = self.model.dim();
        g * dim - g * (g + 1) / 2 + (h - g - 1)
    }

    fn gradient(&self, set: VariableSet) -> Result<Arc<Gradient>> {
        let slot = &self.gradients[set.mask() as usize];
        if let Some(g) = slot.get() {
            return Ok(Arc::clone(g));
        }
        let adj = self.model.scaled_adjugate(set)?;
        let members = set.to_vec();
        let mut entries = Vec::with_capacity(members.len() * (members.len() - 1) / 2);
        for (a, &g) in members.iter().enumerate() {
            for (b, &h) in members.iter().enumerate().skip(a + 1) {
                entries.push((self.pair_index(g, h), 2.0 * adj[(a, b)]));
            }
        }
        Ok(Arc::clone(slot.get_or_init(|| Arc::new(Gradient { entries }))))
    }

    /// `Z a_V`, dense over all pairs.
    fn projection(&self, set: VariableSet) -> Result<Arc<Vec<f64>>> {
        let slot = &self.projections[set.mask() as usize];
        if let Some(p) = slot.get() {
            return Ok(Arc::clone(p));
        }
        let grad = self.gradient(set)?;
        let proj: Vec<f64> = (0..self.zeta.rows())
            .map(|p| {
                let row = self.zeta.row(p);
                grad.entries.iter().map(|&(q, w)| row[q] * w).sum()
            })
            .collect();
        Ok(Arc::clone(slot.get_or_init(|| Arc::new(proj))))
    }

    fn check_set(&self, set: VariableSet) -> Result<()> {
        if set.is_empty() {
            return Err(Error::EmptySet);
        }
        if !set.is_subset_of(VariableSet::all(self.d())) {
            return Err(Error::InvalidIndex {
                index: set.iter().last().unwrap_or_default(),
                bound: self.model.dim(),
            });
        }
        Ok(())
    }

    /// Uncached `acov(δ(U), δ(V))`, symmetric form. Arguments are put in
    /// canonical order first so the result is bit-symmetric in `(U, V)`.
    fn acov_det_raw(&self, u: VariableSet, v: VariableSet) -> Result<f64> {
        let (u, v) = if u <= v { (u, v) } else { (v, u) };
        if u.len() < 2 || v.len() < 2 {
            return Ok(0.0);
        }
        let grad = self.gradient(u)?;
        let proj = self.projection(v)?;
        Ok(grad.entries.iter().map(|&(p, w)| w * proj[p]).sum())
    }

    /// Asymptotic covariance of the normalized determinants `δ(U)`, `δ(V)`
    /// for nonempty `U, V ⊆ {0} ∪ [d]`. Memoized over unordered pairs.
    pub fn acov_det(&self, u: VariableSet, v: VariableSet) -> Result<f64> {
        self.check_set(u)?;
        self.check_set(v)?;
        let key = ordered_key(u, v);
        if let Some(&hit) = self.det_memo.read().expect("memo lock").get(&key) {
            return Ok(hit);
        }
        let value = self.acov_det_raw(u, v)?;
        Ok(*self
            .det_memo
            .write()
            .expect("memo lock")
            .entry(key)
            .or_insert(value))
    }

    /// Reference evaluation of `acov(δ(U), δ(V))` through the full double sum
    /// over all ordered index pairs with the unsymmetrized derivative
    /// `|R| R⁻¹`. Quadratically slower than [`Self::acov_det`].
    pub fn acov_det_unsymmetric(&self, u: VariableSet, v: VariableSet) -> Result<f64> {
        self.check_set(u)?;
        self.check_set(v)?;
        let adj_u = self.model.scaled_adjugate(u)?;
        let adj_v = self.model.scaled_adjugate(v)?;
        let (mu, mv) = (u.to_vec(), v.to_vec());
        let mut total = 0.0;
        for (a, &g) in mu.iter().enumerate() {
            for (b, &h) in mu.iter().enumerate() {
                for (c, &j) in mv.iter().enumerate() {
                    for (e, &k) in mv.iter().enumerate() {
                        total += adj_u[(a, b)]
                            * adj_v[(c, e)]
                            * acov_corr(&self.model, self.kappa, g, h, j, k);
                    }
                }
            }
        }
        Ok(total)
    }

    fn acov_r2_raw(&self, s: VariableSet, t: VariableSet) -> Result<f64> {
        let (s, t) = if s <= t { (s, t) } else { (t, s) };
        if s.is_empty() || t.is_empty() {
            return Ok(0.0);
        }
        let (s0, t0) = (s.with_response(), t.with_response());
        let det_s = self.model.nonsingular_determinant(s)?;
        let det_t = self.model.nonsingular_determinant(t)?;
        let det_s0 = self.model.subset_determinant(s0)?;
        let det_t0 = self.model.subset_determinant(t0)?;

        let full = self.acov_det_raw(s0, t0)?;
        let base = self.acov_det_raw(s, t)?;
        let base_full = self.acov_det_raw(s, t0)?;
        let full_base = self.acov_det_raw(s0, t)?;

        Ok(full / (det_s * det_t)
            + det_s0 * det_t0 / (det_s * det_s * det_t * det_t) * base
            - det_s0 / (det_s * det_s * det_t) * base_full
            - det_t0 / (det_s * det_t * det_t) * full_base)
    }

    /// Asymptotic covariance of the normalized coefficients of determination
    /// `λ(S)`, `λ(T)` for `S, T ⊆ [d]`; 0 when either set is empty.
    pub fn acov_r2(&self, s: VariableSet, t: VariableSet) -> Result<f64> {
        for set in [s, t] {
            if set.contains(0) {
                return Err(Error::ResponseInCovariateSet);
            }
            if !set.is_subset_of(VariableSet::covariates(self.d())) {
                return Err(Error::InvalidIndex {
                    index: set.iter().last().unwrap_or_default(),
                    bound: self.model.dim(),
                });
            }
        }
        let key = ordered_key(s, t);
        if let Some(&hit) = self.r2_memo.read().expect("memo lock").get(&key) {
            return Ok(hit);
        }
        let value = self.acov_r2_raw(s, t)?;
        Ok(*self
            .r2_memo
            .write()
            .expect("memo lock")
            .entry(key)
            .or_insert(value))
    }

    /// `d × d` asymptotic covariance of the normalized Shapley values.
    ///
    /// Writing `V_j = Σ_S c_j(S) R²_S`, the covariance is the bilinear form
    /// `c_jᵀ Λ c_k` with `Λ(S, T) = acov(λ(S), λ(T))`; expanding `c_j`
    /// recovers the four-term sum `a + b - c - d` (see
    /// [`Self::covariance_terms`]). Rows of `Λ` are generated in parallel and
    /// each is reduced sequentially, so the result does not depend on the
    /// thread schedule.
    pub fn shapley_acov(&self) -> Result<Matrix> {
        let d = self.d();
        let m = 1usize << d;
        let coef = shapley_coefficients(d);
        let subset = |k: usize| VariableSet::from_mask((k as u32) << 1);

        let row_of = |s: usize| -> Result<Vec<f64>> {
            if s == 0 {
                return Ok(vec![0.0; d]);
            }
            let lambda: Vec<f64> = (0..m)
                .map(|t| self.acov_r2_raw(subset(s), subset(t)))
                .collect::<Result<_>>()?;
            let mut terms = vec![0.0; m];
            Ok((0..d)
                .map(|k| {
                    for t in 0..m {
                        terms[t] = lambda[t] * coef[k][t];
                    }
                    pairwise_sum(&terms)
                })
                .collect())
        };
        let projected: Vec<Vec<f64>> = if d >= 6 {
            (0..m).into_par_iter().map(row_of).collect::<Result<_>>()?
        } else {
            (0..m).map(row_of).collect::<Result<_>>()?
        };

        let mut out = Matrix::zeros(d, d);
        let mut terms = vec![0.0; m];
        for j in 0..d {
            for k in 0..d {
                for s in 0..m {
                    terms[s] = coef[j][s] * projected[s][k];
                }
                out[(j, k)] = pairwise_sum(&terms);
            }
        }
        for j in 0..d {
            for k in 0..j {
                let v = 0.5 * (out[(j, k)] + out[(k, j)]);
                out[(j, k)] = v;
                out[(k, j)] = v;
            }
        }
        Ok(out)
    }

    /// The four double sums `a_jk, b_jk, c_jk, d_jk` over
    /// `S ⊆ [d]∖{j}`, `T ⊆ [d]∖{k}` for 0-based covariate positions `j`, `k`.
    pub fn covariance_terms(&self, j: usize, k: usize) -> Result<CovarianceTerms> {
        let d = self.d();
        for idx in [j, k] {
            if idx >= d {
                return Err(Error::InvalidIndex { index: idx, bound: d });
            }
        }
        let weights = weight_table(d);
        let (vj, vk) = (j + 1, k + 1);
        let cov = VariableSet::covariates(d);
        let mut acc = CovarianceTerms {
            a: 0.0,
            b: 0.0,
            c: 0.0,
            d: 0.0,
        };
        for s in cov.without(vj).subsets() {
            for t in cov.without(vk).subsets() {
                let w = weights[s.len()] * weights[t.len()];
                acc.a += w * self.acov_r2(s.with(vj), t.with(vk))?;
                acc.b += w * self.acov_r2(s, t)?;
                acc.c += w * self.acov_r2(s, t.with(vk))?;
                acc.d += w * self.acov_r2(s.with(vj), t)?;
            }
        }
        Ok(acc)
    }
}

fn ordered_key(a: VariableSet, b: VariableSet) -> (u32, u32) {
    if a <= b {
        (a.mask(), b.mask())
    } else {
        (b.mask(), a.mask())
    }
}

fn pair_list(dim: usize) -> Vec<(usize, usize)> {
    (0..dim)
        .flat_map(|g| (g + 1..dim).map(move |h| (g, h)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(rows: &[[f64; 4]]) -> CorrelationModel {
        CorrelationModel::new(Matrix::from_rows(rows)).unwrap()
    }

    fn sample_model() -> CorrelationModel {
        model(&[
            [1.0, 0.5, 0.3, -0.2],
            [0.5, 1.0, 0.1, 0.2],
            [0.3, 0.1, 1.0, 0.4],
            [-0.2, 0.2, 0.4, 1.0],
        ])
    }

    #[test]
    fn acov_corr_pair_variance() {
        let m = sample_model();
        for (j, k) in [(0, 1), (1, 3), (2, 3), (0, 3)] {
            let rho = m.rho(j, k);
            let v = acov_corr(&m, 1.3, j, k, j, k);
            assert!((v - 1.3 * (1.0 - rho * rho).powi(2)).abs() < 1e-15);
        }
        assert_eq!(acov_corr(&m, 1.0, 2, 2, 0, 1), 0.0);
        assert_eq!(acov_corr(&m, 1.0, 0, 1, 3, 3), 0.0);
    }

    #[test]
    fn acov_corr_vanishes_for_disjoint_uncorrelated_pairs() {
        let m = CorrelationModel::new(Matrix::identity(4)).unwrap();
        assert_eq!(acov_corr(&m, 1.0, 0, 1, 2, 3), 0.0);
    }

    #[test]
    fn acov_det_two_by_two_closed_form() {
        let m = sample_model();
        let am = AsymptoticModel::new(m.clone(), 1.1).unwrap();
        for (j, k) in [(0, 1), (1, 2), (0, 3)] {
            let set = VariableSet::from_indices([j, k]);
            let rho = m.rho(j, k);
            let expected = 4.0 * 1.1 * rho * rho * (1.0 - rho * rho).powi(2);
            assert!((am.acov_det(set, set).unwrap() - expected).abs() < 1e-14);
        }
        let single = VariableSet::singleton(2);
        assert_eq!(am.acov_det(single, VariableSet::all(3)).unwrap(), 0.0);
        assert_eq!(
            am.acov_det(VariableSet::EMPTY, single),
            Err(Error::EmptySet)
        );
    }

    #[test]
    fn symmetric_and_unsymmetric_forms_agree() {
        let am = AsymptoticModel::new(sample_model(), 0.9).unwrap();
        let all = VariableSet::all(3);
        for u in all.subsets().skip(1) {
            for v in all.subsets().skip(1) {
                let fast = am.acov_det(u, v).unwrap();
                let slow = am.acov_det_unsymmetric(u, v).unwrap();
                assert!((fast - slow).abs() < 1e-12, "{u} {v}: {fast} vs {slow}");
                assert_eq!(fast.to_bits(), am.acov_det(v, u).unwrap().to_bits());
            }
        }
    }

    #[test]
    fn acov_r2_variance_closed_form() {
        let m = sample_model();
        let am = AsymptoticModel::new(m.clone(), 1.7).unwrap();
        for s in VariableSet::covariates(3).subsets().skip(1) {
            let r2 = crate::shapley::r_squared_subset(&m, s).unwrap();
            let expected = 4.0 * 1.7 * r2 * (1.0 - r2).powi(2);
            assert!((am.acov_r2(s, s).unwrap() - expected).abs() < 1e-10);
        }
        assert_eq!(am.acov_r2(VariableSet::EMPTY, VariableSet::singleton(1)).unwrap(), 0.0);
        assert_eq!(
            am.acov_r2(VariableSet::singleton(0), VariableSet::singleton(1)),
            Err(Error::ResponseInCovariateSet)
        );
    }

    #[test]
    fn four_terms_match_bilinear_form() {
        let am = AsymptoticModel::new(sample_model(), 1.0).unwrap();
        let acov = am.shapley_acov().unwrap();
        for j in 0..3 {
            for k in 0..3 {
                let terms = am.covariance_terms(j, k).unwrap();
                assert!((terms.total() - acov[(j, k)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_model_has_zero_covariance() {
        let am = AsymptoticModel::new(CorrelationModel::new(Matrix::identity(5)).unwrap(), 1.0)
            .unwrap();
        let acov = am.shapley_acov().unwrap();
        assert!(acov.as_slice().iter().all(|v| v.abs() < 1e-10));
    }
}
