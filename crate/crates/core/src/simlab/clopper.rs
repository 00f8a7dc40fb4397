use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

/// Inverse of the regularized incomplete beta function `I_x(a, b) = p` by
/// bisection; `I_x` is monotone in `x`, and 100 halvings exhaust double
/// precision on `[0, 1]`.
fn beta_inv(p: f64, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Exact (Clopper–Pearson) `1 - alpha` interval for a binomial proportion.
pub fn clopper_pearson(successes: usize, trials: usize, alpha: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::InvalidConfig("Clopper-Pearson needs at least one trial".into()));
    }
    if successes > trials {
        return Err(Error::InvalidConfig(format!(
            "{successes} successes exceed {trials} trials"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let (x, n) = (successes as f64, trials as f64);
    let lower = if successes == 0 {
        0.0
    } else {
        beta_inv(alpha / 2.0, x, n - x + 1.0)
    };
    let upper = if successes == trials {
        1.0
    } else {
        beta_inv(1.0 - alpha / 2.0, x + 1.0, n - x)
    };
    Ok((lower, upper))
}
