//! Yeo–Johnson power transform with maximum-likelihood `λ`.

use serde::Serialize;

const LAMBDA_MIN: f64 = -5.0;
const LAMBDA_MAX: f64 = 5.0;
const GRID_STEP: f64 = 0.01;
const EPS: f64 = 1e-12;

/// `ψ(x, λ)`.
pub fn transform_value(x: f64, lambda: f64) -> f64 {
    if x >= 0.0 {
        if lambda.abs() < EPS {
            x.ln_1p()
        } else {
            (lambda * x.ln_1p()).exp_m1() / lambda
        }
    } else if (lambda - 2.0).abs() < EPS {
        -(-x).ln_1p()
    } else {
        -((2.0 - lambda) * (-x).ln_1p()).exp_m1() / (2.0 - lambda)
    }
}

pub fn transform(values: &[f64], lambda: f64) -> Vec<f64> {
    values.iter().map(|&x| transform_value(x, lambda)).collect()
}

/// Normal profile log-likelihood of `λ`, up to a constant.
pub fn log_likelihood(values: &[f64], lambda: f64) -> f64 {
    let n = values.len() as f64;
    let t = transform(values, lambda);
    let mean = t.iter().sum::<f64>() / n;
    let var = t.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let jacobian: f64 = values.iter().map(|&x| x.signum() * x.abs().ln_1p()).sum();
    let ll = -0.5 * n * var.ln() + (lambda - 1.0) * jacobian;
    if ll.is_finite() {
        ll
    } else {
        f64::NEG_INFINITY
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct YeoJohnson {
    pub lambda: f64,
    pub values: Vec<f64>,
}

/// Chooses `λ` on a grid over `[-5, 5]`, refines it by golden-section
/// search in the neighbouring grid cells, and transforms the column.
pub fn yeo_johnson(values: &[f64]) -> YeoJohnson {
    let steps = ((LAMBDA_MAX - LAMBDA_MIN) / GRID_STEP).round() as usize;
    let (mut best, mut best_ll) = (1.0, f64::NEG_INFINITY);
    for i in 0..=steps {
        let lambda = LAMBDA_MIN + i as f64 * GRID_STEP;
        let ll = log_likelihood(values, lambda);
        if ll > best_ll {
            best = lambda;
            best_ll = ll;
        }
    }

    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (
        (best - GRID_STEP).max(LAMBDA_MIN),
        (best + GRID_STEP).min(LAMBDA_MAX),
    );
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let (mut fc, mut fd) = (log_likelihood(values, c), log_likelihood(values, d));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = log_likelihood(values, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = log_likelihood(values, d);
        }
    }
    let refined = 0.5 * (a + b);
    let lambda = if log_likelihood(values, refined) >= best_ll {
        refined
    } else {
        best
    };
    YeoJohnson {
        lambda,
        values: transform(values, lambda),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn lambda_one_is_identity_on_nonnegative() {
        for x in [0.0, 0.5, 3.0, 100.0] {
            assert!((transform_value(x, 1.0) - x).abs() < 1e-12);
        }
    }

    #[test]
    fn sign_flip_identity() {
        for &x in &[0.3, 1.0, 4.5] {
            for &l in &[-1.5, 0.0, 0.5, 1.0, 2.0, 3.2] {
                let lhs = transform_value(-x, l);
                let rhs = -transform_value(x, 2.0 - l);
                assert!((lhs - rhs).abs() < 1e-12, "x={x} l={l}");
            }
        }
    }

    #[test]
    fn continuous_at_special_lambdas() {
        assert!((transform_value(2.0, 1e-9) - 2f64.ln_1p()).abs() < 1e-8);
        assert!((transform_value(-2.0, 2.0 - 1e-9) + 2f64.ln_1p()).abs() < 1e-8);
    }

    #[test]
    fn normal_data_gives_lambda_near_one() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let xs: Vec<f64> = (0..10_000)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let fit = yeo_johnson(&xs);
        assert!((fit.lambda - 1.0).abs() < 0.15, "{}", fit.lambda);
    }

    #[test]
    fn skewed_data_is_pulled_toward_symmetry() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<f64> = (0..5_000)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z.exp()
            })
            .collect();
        let fit = yeo_johnson(&xs);
        assert!(fit.lambda < 0.5);
        assert!(log_likelihood(&xs, fit.lambda) >= log_likelihood(&xs, fit.lambda + 0.01));
        assert!(log_likelihood(&xs, fit.lambda) >= log_likelihood(&xs, fit.lambda - 0.01));
    }
}
