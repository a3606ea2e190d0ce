//! Covariance mixtures `ν(x) = Σ γ_k² x^k` and the overlap shift `ν ↦ ν_q`.
//!
//! A mixture encodes the covariance of a spherical Gaussian field:
//! `E H(σ)H(σ') = N ν(R(σ, σ'))`. The pure p-spin model is `ν(x) = x^p`.
//! Shifting by an overlap `q` gives the mixture of the field restricted to
//! the band of configurations at overlap `q` with a fixed centre:
//! `ν_q(x) = ν(q + (1-q)x) - ν(q) - ν'(q)(1-q)x`.

use crate::error::{invalid, Error, Result};

/// Largest degree accepted anywhere in the crate.
pub const MAX_DEGREE: u32 = 64;

/// A finite polynomial mixture with nonnegative weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    /// `(degree, weight)` pairs sorted by degree, weights are `γ_k²`.
    coefficients: Vec<(u32, f64)>,
}

impl Mixture {
    pub fn new(mut coefficients: Vec<(u32, f64)>) -> Result<Self> {
        coefficients.sort_by_key(|&(k, _)| k);
        for w in coefficients.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(invalid("coefficients", format!("degree {} repeated", w[0].0)));
            }
        }
        for &(k, w) in &coefficients {
            if !(2..=MAX_DEGREE).contains(&k) {
                return Err(invalid("coefficients", format!("degree {k} outside [2, {MAX_DEGREE}]")));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(invalid("coefficients", format!("weight {w} of degree {k} is not a nonnegative number")));
            }
        }
        if !coefficients.iter().any(|&(_, w)| w > 0.0) {
            return Err(invalid("coefficients", "at least one weight must be positive"));
        }
        Ok(Self { coefficients })
    }

    /// The pure p-spin mixture `ν(x) = x^p`.
    pub fn pure(p: u32) -> Result<Self> {
        Self::new(vec![(p, 1.0)])
    }

    pub fn coefficients(&self) -> &[(u32, f64)] {
        &self.coefficients
    }

    pub fn degree_max(&self) -> u32 {
        self.coefficients.last().map_or(0, |&(k, _)| k)
    }

    /// Returns the single degree if exactly one weight is nonzero and equals one.
    pub fn pure_degree(&self) -> Option<u32> {
        let mut nonzero = self.coefficients.iter().filter(|&&(_, w)| w != 0.0);
        match (nonzero.next(), nonzero.next()) {
            (Some(&(k, 1.0)), None) => Some(k),
            _ => None,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().map(|&(k, w)| w * x.powi(k as i32)).sum()
    }

    /// `(ν(x), ν'(x), ν''(x))`.
    pub fn eval_derivs(&self, x: f64) -> (f64, f64, f64) {
        self.coefficients.iter().fold((0.0, 0.0, 0.0), |(v, d1, d2), &(k, w)| {
            let kf = k as f64;
            let k = k as i32;
            (v + w * x.powi(k), d1 + w * kf * x.powi(k - 1), d2 + w * kf * (kf - 1.0) * x.powi(k - 2))
        })
    }

    /// `ν_q(x) = ν(q + (1-q)x) - ν(q) - ν'(q)(1-q)x`, evaluated directly.
    pub fn shifted_eval(&self, q: f64, x: f64) -> f64 {
        let (nu_q, d1_q, _) = self.eval_derivs(q);
        self.eval(q + (1.0 - q) * x) - nu_q - d1_q * (1.0 - q) * x
    }
}

/// Binomial coefficient in exact integer arithmetic.
pub fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    // Each partial product c * (n - i) / (i + 1) is itself a binomial coefficient.
    (0..k).fold(1u128, |c, i| c * (n - i) / (i + 1))
}

/// The pure-model mixture `ν_q` as its pure-component weights `α_k²(q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedMixture {
    pub base_p: u32,
    pub q: f64,
    /// `α_k²(q)` for `k = 2..=p`, indexed by `k - 2`.
    pub alpha_sq: Vec<f64>,
}

impl ShiftedMixture {
    pub fn alpha_sq(&self, k: u32) -> f64 {
        if k < 2 || k > self.base_p {
            0.0
        } else {
            self.alpha_sq[(k - 2) as usize]
        }
    }

    /// `ν_q(1) = Σ α_k²(q)`.
    pub fn total(&self) -> f64 {
        self.alpha_sq.iter().sum()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.alpha_sq.iter().enumerate().map(|(i, a)| a * x.powi(i as i32 + 2)).sum()
    }

    pub fn to_mixture(&self) -> Result<Mixture> {
        Mixture::new(self.alpha_sq.iter().enumerate().map(|(i, &a)| (i as u32 + 2, a)).collect())
    }
}

pub(crate) fn check_degree(p: u32) -> Result<()> {
    if (2..=MAX_DEGREE).contains(&p) {
        Ok(())
    } else {
        Err(invalid("p", format!("degree {p} outside [2, {MAX_DEGREE}]")))
    }
}

pub(crate) fn check_overlap_half_open(q: f64) -> Result<()> {
    if (0.0..1.0).contains(&q) {
        Ok(())
    } else {
        Err(Error::OverlapOutOfDomain { q, domain: "[0, 1)" })
    }
}

/// Pure-component decomposition `α_k²(q) = C(p,k)(1-q)^k q^{p-k}` of `ν_q` for `ν(x) = x^p`.
pub fn shift_mixture(p: u32, q: f64) -> Result<ShiftedMixture> {
    check_degree(p)?;
    check_overlap_half_open(q)?;
    let alpha_sq = (2..=p).map(|k| binomial(p, k) as f64 * (1.0 - q).powi(k as i32) * q.powi((p - k) as i32)).collect();
    Ok(ShiftedMixture { base_p: p, q, alpha_sq })
}

/// The energy threshold `E∞ = 2 sqrt((p-1)/p)`.
pub fn e_infinity(p: u32) -> f64 {
    let p = p as f64;
    2.0 * ((p - 1.0) / p).sqrt()
}

/// `ν_q(1) = ν(1) - ν(q) - ν'(q)(1-q)` for the pure model.
///
/// Summed as `Σ_k α_k²(q)` so that every term is nonnegative; the closed form
/// cancels catastrophically as `q → 1`. While the subtracted part is small it is
/// computed directly, which keeps the result monotone near `q = 0`.
pub fn pure_shift_at_one(p: u32, q: f64) -> f64 {
    let one_minus = 1.0 - q;
    let removed = q.powi(p as i32 - 1) * (q + p as f64 * one_minus);
    if removed <= 0.5 {
        return 1.0 - removed;
    }
    (2..=p).map(|k| binomial(p, k) as f64 * one_minus.powi(k as i32) * q.powi((p - k) as i32)).sum()
}

/// Onsager reaction term `½ β² ν_q(1)` of the pure p-spin model.
pub fn onsager_term(p: u32, q: f64, beta: f64) -> Result<f64> {
    check_degree(p)?;
    check_overlap_half_open(q)?;
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(invalid("beta", format!("{beta} is not a nonnegative number")));
    }
    Ok(0.5 * beta * beta * pure_shift_at_one(p, q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_evaluations() {
        let m3 = Mixture::pure(3).unwrap();
        assert_eq!(m3.eval(1.0), 1.0);
        assert_eq!(m3.eval(0.5), 0.125);
        assert_eq!(Mixture::pure(2).unwrap().eval(-1.0), 1.0);
        assert_eq!(m3.eval_derivs(0.5), (0.125, 0.75, 3.0));
        assert_eq!(Mixture::pure(2).unwrap().eval_derivs(0.0), (0.0, 0.0, 2.0));
        assert_eq!(m3.pure_degree(), Some(3));
    }

    #[test]
    fn mixture_rejects_bad_weights() {
        assert!(Mixture::new(vec![(3, 0.0)]).is_err());
        assert!(Mixture::new(vec![(3, -1.0), (2, 2.0)]).is_err());
        assert!(Mixture::new(vec![(1, 1.0)]).is_err());
        assert!(Mixture::new(vec![(2, 1.0), (2, 1.0)]).is_err());
        let m = Mixture::new(vec![(4, 0.25), (2, 0.75)]).unwrap();
        assert_eq!(m.eval(1.0), 1.0);
        assert_eq!(m.degree_max(), 4);
        assert_eq!(m.pure_degree(), None);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(3, 2), 3);
        assert_eq!(binomial(16, 8), 12870);
        assert_eq!(binomial(64, 32), 1_832_624_140_942_590_534);
        assert_eq!(binomial(5, 7), 0);
    }

    #[test]
    fn shift_examples() {
        let s = shift_mixture(3, 0.0).unwrap();
        assert_eq!(s.alpha_sq, vec![0.0, 1.0]);
        let s = shift_mixture(3, 0.5).unwrap();
        assert_eq!(s.alpha_sq(2), 0.375);
        assert_eq!(s.alpha_sq(3), 0.125);
        assert_eq!(s.total(), 0.5);
        assert_eq!(pure_shift_at_one(3, 0.5), 1.0 - 0.125 - 0.75 * 0.5);
        assert_eq!(pure_shift_at_one(4, 0.0), 1.0);
        assert!(shift_mixture(3, 1.0).is_err());
        assert!(shift_mixture(3, -0.1).is_err());
    }

    #[test]
    fn shifted_mixture_matches_direct_shift() {
        let m = Mixture::pure(5).unwrap();
        let s = shift_mixture(5, 0.3).unwrap();
        for &x in &[0.0, 0.25, 0.6, 1.0] {
            assert!((s.eval(x) - m.shifted_eval(0.3, x)).abs() < 1e-14);
        }
    }

    #[test]
    fn e_infinity_values() {
        assert!((e_infinity(2) - 2f64.sqrt()).abs() < 1e-15);
        assert!((e_infinity(3) - 1.632993162).abs() < 1e-9);
        let mut prev = 0.0;
        for p in 2..=64 {
            let e = e_infinity(p);
            assert!(e > prev && e < 2.0);
            prev = e;
        }
    }

    #[test]
    fn onsager_examples() {
        assert_eq!(onsager_term(3, 0.0, 1.7).unwrap(), 0.5 * 1.7 * 1.7);
        assert_eq!(onsager_term(3, 0.5, 1.0).unwrap(), 0.25);
        assert_eq!(onsager_term(4, 0.3, 0.0).unwrap(), 0.0);
        assert!(onsager_term(3, 1.0, 1.0).is_err());
    }
}
