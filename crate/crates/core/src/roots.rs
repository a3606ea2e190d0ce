//! Bracketed scalar root finding.

use crate::error::{Error, Result};

/// Bisects `f` on `[lo, hi]` until the bracket is narrower than `xtol` or
/// stops shrinking in floating point. Returns the final bracket.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<(f64, f64)> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok((lo, lo));
    }
    if f_hi == 0.0 {
        return Ok((hi, hi));
    }
    if !(f_lo.is_finite() && f_hi.is_finite()) || f_lo.signum() == f_hi.signum() {
        return Err(Error::NoBracket { lo, hi, f_lo, f_hi });
    }
    while hi - lo > xtol {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok((mid, mid));
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Bisection to `xtol`, then a few secant steps that are only accepted while
/// they stay inside the bracket and reduce `|f|`.
pub fn bisect_secant<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, xtol: f64) -> Result<f64> {
    let (mut a, mut b) = bisect(&f, lo, hi, xtol)?;
    if a == b {
        return Ok(a);
    }
    let (mut fa, mut fb) = (f(a), f(b));
    let mut best = if fa.abs() <= fb.abs() { (a, fa) } else { (b, fb) };
    for _ in 0..4 {
        if fb == fa {
            break;
        }
        let x = b - fb * (b - a) / (fb - fa);
        if !(x >= lo && x <= hi) {
            break;
        }
        let fx = f(x);
        if fx.abs() >= best.1.abs() {
            break;
        }
        best = (x, fx);
        if fx == 0.0 {
            break;
        }
        (a, fa, b, fb) = (b, fb, x, fx);
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = bisect_secant(|x| x * x - 2.0, 0.0, 2.0, 1e-13).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_missing_sign_change() {
        assert!(matches!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12), Err(Error::NoBracket { .. })));
    }

    #[test]
    fn exact_endpoint_root() {
        assert_eq!(bisect(|x| x, 0.0, 1.0, 1e-12).unwrap(), (0.0, 0.0));
    }
}
