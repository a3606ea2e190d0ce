//! Free energy of the spherical pure p-spin model at every temperature.
//!
//! Below the critical inverse temperature the free energy is the annealed
//! value `½β²`. Above it the largest multi-samplable overlap `q_β` is the root
//! in `(ℓ, 1)`, `ℓ = (p-2)/p`, of
//!
//! ```text
//! β q^{p/2-1} (1-q) = t₋
//! ```
//!
//! where `t₋ <= t₊` are the roots of `p(p-1)t² - pE★t + 1 = 0`, and
//!
//! ```text
//! F(β) = β E★ q^{p/2} + ½ log(1-q) + ½ β² ν_q(1)    at q = q_β.
//! ```

use rayon::prelude::*;

use crate::critical::{solve_critical, CriticalPoint};
use crate::error::{invalid, Error, Result};
use crate::mixtures::{check_degree, e_infinity, pure_shift_at_one, Mixture};
use crate::roots::bisect;

/// Relative window inside which `E★ = E∞` is treated as a double root.
const DEGENERATE_DISCRIMINANT: f64 = 1e-14;

/// Default bracket width for `q_β`; bisection also stops once the bracket
/// no longer shrinks in floating point.
pub const DEFAULT_Q_TOL: f64 = 1e-15;

/// Which formula produced a [`TapSolution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// `β < β_c`: `q_β = 0`, `F = ½β²ν(1)`.
    HighTemperature,
    /// `β = β_c`: `q_β = q_c`, both formulas agree.
    Critical,
    /// `β > β_c`.
    LowTemperature,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::HighTemperature => "high",
            Branch::Critical => "critical",
            Branch::LowTemperature => "low",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TapSolution {
    pub p: u32,
    pub beta: f64,
    pub q_beta: f64,
    pub t_minus: f64,
    pub t_plus: f64,
    pub free_energy: f64,
    /// Maximiser `(p-2)/p` of `q^{p/2-1}(1-q)`.
    pub ell: f64,
    pub branch: Branch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TapFunctionalSample {
    pub q: f64,
    pub g_value: f64,
    pub g_derivative: f64,
}

/// `f(q) = q^{p/2-1}(1-q)`.
pub fn f_overlap(p: u32, q: f64) -> f64 {
    q.powf(0.5 * p as f64 - 1.0) * (1.0 - q)
}

/// `ℓ = (p-2)/p`.
pub fn ell(p: u32) -> f64 {
    (p as f64 - 2.0) / p as f64
}

/// Ordered roots `(t₋, t₊)` of `p(p-1)t² - pE★t + 1 = 0`.
pub fn t_pm(p: u32, e_star: f64) -> Result<(f64, f64)> {
    check_degree(p)?;
    let e_inf = e_infinity(p);
    let x = e_star / e_inf;
    if !x.is_finite() || x < 1.0 - DEGENERATE_DISCRIMINANT {
        return Err(Error::Inconsistent(format!(
            "E★ = {e_star} is below E∞ = {e_inf}; the t-quadratic has no real roots"
        )));
    }
    let pp = p as f64 * (p as f64 - 1.0);
    let root = if x <= 1.0 + DEGENERATE_DISCRIMINANT { 0.0 } else { (x * x - 1.0).sqrt() };
    let t_plus = (x + root) / pp.sqrt();
    // Vieta keeps t₋ accurate when the roots are far apart.
    let t_minus = 1.0 / (pp * t_plus);
    Ok((t_minus, t_plus))
}

fn check_beta(beta: f64) -> Result<()> {
    if beta >= 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(invalid("beta", format!("{beta} is not a nonnegative number")))
    }
}

/// A solved model: the critical point of degree `p` plus the t-roots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TapModel {
    pub critical: CriticalPoint,
    pub t_minus: f64,
    pub t_plus: f64,
}

impl TapModel {
    pub fn new(p: u32) -> Result<Self> {
        let critical = solve_critical(p)?;
        let (t_minus, t_plus) = t_pm(p, critical.e_star)?;
        Ok(Self { critical, t_minus, t_plus })
    }

    pub fn p(&self) -> u32 {
        self.critical.p
    }

    pub fn beta_c(&self) -> f64 {
        self.critical.beta_c
    }

    /// Largest multi-samplable overlap for `β >= β_c`.
    pub fn q_beta(&self, beta: f64) -> Result<f64> {
        solve_q_beta_with(self.p(), beta, self.critical.beta_c, self.t_minus, DEFAULT_Q_TOL)
    }

    pub fn solution(&self, beta: f64) -> Result<TapSolution> {
        check_beta(beta)?;
        let p = self.p();
        let cp = &self.critical;
        let base = TapSolution {
            p,
            beta,
            q_beta: 0.0,
            t_minus: self.t_minus,
            t_plus: self.t_plus,
            free_energy: 0.5 * beta * beta,
            ell: ell(p),
            branch: Branch::HighTemperature,
        };
        if beta < cp.beta_c {
            return Ok(base);
        }
        if beta == cp.beta_c {
            return Ok(TapSolution { q_beta: cp.q_c, branch: Branch::Critical, ..base });
        }
        if p == 2 {
            let q = 1.0 - 1.0 / (std::f64::consts::SQRT_2 * beta);
            let free_energy = std::f64::consts::SQRT_2 * beta - 0.5 * beta.ln() - 0.25 * std::f64::consts::LN_2 - 0.75;
            return Ok(TapSolution { q_beta: q, free_energy, branch: Branch::LowTemperature, ..base });
        }
        let q = self.q_beta(beta)?;
        let free_energy = tap_value(p, beta, cp.e_star, q);
        Ok(TapSolution { q_beta: q, free_energy, branch: Branch::LowTemperature, ..base })
    }

    pub fn tap_functional(&self, beta: f64, q: f64) -> Result<TapFunctionalSample> {
        tap_functional(self.p(), beta, self.critical.e_star, q)
    }
}

/// `g(β, q) = β E★ q^{p/2} + ½ log(1-q) + ½ β² ν_q(1)`.
fn tap_value(p: u32, beta: f64, e_star: f64, q: f64) -> f64 {
    beta * e_star * q.powf(0.5 * p as f64) + 0.5 * (-q).ln_1p() + 0.5 * beta * beta * pure_shift_at_one(p, q)
}

fn solve_q_beta_with(p: u32, beta: f64, beta_c: f64, t_minus: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0 && tol <= 1e-6) {
        return Err(invalid("tol", format!("{tol} outside (0, 1e-6]")));
    }
    if !(beta >= beta_c && beta.is_finite()) {
        return Err(invalid("beta", format!("{beta} is below the critical value {beta_c}")));
    }
    let lo = ell(p);
    let target = t_minus / beta;
    let f_max = f_overlap(p, lo);
    if target > f_max {
        return Err(Error::Inconsistent(format!(
            "t₋/β = {target} exceeds max f = {f_max}; no overlap solves the TAP equation"
        )));
    }
    if target == f_max {
        return Ok(lo);
    }
    let (a, b) = bisect(|q| f_overlap(p, q) - target, lo, 1.0, tol)?;
    Ok(0.5 * (a + b))
}

/// Root in `(ℓ, 1)` of `β f(q) = t₋(E★)`, the larger of the two solutions.
///
/// `β = β_c` is accepted and yields `q_c`.
pub fn solve_q_beta(p: u32, beta: f64, e_star: f64, tol: f64) -> Result<f64> {
    check_degree(p)?;
    let cp = solve_critical(p)?;
    let (t_minus, _) = t_pm(p, e_star)?;
    solve_q_beta_with(p, beta, cp.beta_c, t_minus, tol)
}

/// Free energy of the pure p-spin model at inverse temperature `beta`.
pub fn free_energy(p: u32, beta: f64) -> Result<TapSolution> {
    TapModel::new(p)?.solution(beta)
}

/// `g(β, q)` and its `q`-derivative
/// `β E★ (p/2) q^{p/2-1} - ½/(1-q) - ½ β² (1-q) ν''(q)`.
///
/// Diagnostic only: `g` coincides with the free energy at `q = q_β` but is
/// not claimed to be maximised there over all of `[0, 1)`.
pub fn tap_functional(p: u32, beta: f64, e_star: f64, q: f64) -> Result<TapFunctionalSample> {
    check_degree(p)?;
    check_beta(beta)?;
    if !(0.0..1.0).contains(&q) {
        return Err(Error::OverlapOutOfDomain { q, domain: "[0, 1)" });
    }
    let half_p = 0.5 * p as f64;
    let (_, _, d2) = Mixture::pure(p)?.eval_derivs(q);
    let g_derivative =
        beta * e_star * half_p * q.powf(half_p - 1.0) - 0.5 / (1.0 - q) - 0.5 * beta * beta * (1.0 - q) * d2;
    Ok(TapFunctionalSample { q, g_value: tap_value(p, beta, e_star, q), g_derivative })
}

/// `β q^{p/2-1}(1-q) <= 1/sqrt(p(p-1))`, with slack `1e-12`.
pub fn lemma_bound_check(p: u32, beta: f64, q_beta: f64) -> bool {
    let bound = 1.0 / (p as f64 * (p as f64 - 1.0)).sqrt();
    let lhs = if q_beta == 0.0 && p > 2 { 0.0 } else { beta * f_overlap(p, q_beta) };
    bound - lhs >= -1e-12
}

/// One [`TapSolution`] per `β`, evaluated independently and returned in input order.
pub fn sweep(p: u32, betas: &[f64]) -> Result<Vec<TapSolution>> {
    if let Some(bad) = betas.iter().find(|b| !(**b >= 0.0 && b.is_finite())) {
        return Err(invalid("betas", format!("{bad} is not a nonnegative number")));
    }
    if betas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("betas", "grid must be strictly increasing"));
    }
    let model = TapModel::new(p)?;
    betas
        .par_iter()
        .map(|&beta| model.solution(beta).map_err(|e| Error::AtBeta { beta, source: Box::new(e) }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(p: u32, e: f64, t: f64) -> f64 {
        let pf = p as f64;
        pf * (pf - 1.0) * t * t - pf * e * t + 1.0
    }

    #[test]
    fn t_roots() {
        let (lo, hi) = t_pm(3, e_infinity(3)).unwrap();
        assert!((lo - 1.0 / 6f64.sqrt()).abs() < 1e-12 && (hi - lo).abs() < 1e-12);
        let m = TapModel::new(3).unwrap();
        assert!((m.t_minus - 0.343992513806825).abs() < 1e-12);
        assert!((m.t_plus - 0.484506667956912).abs() < 1e-12);
        assert!((m.t_minus * m.t_plus - 1.0 / 6.0).abs() < 1e-15);
        for t in [m.t_minus, m.t_plus] {
            assert!(quadratic(3, m.critical.e_star, t).abs() < 1e-12);
        }
        assert!(t_pm(3, 1.5).is_err());
    }

    #[test]
    fn q_beta_examples() {
        let m = TapModel::new(3).unwrap();
        let at_c = m.q_beta(m.beta_c()).unwrap();
        assert!((at_c - m.critical.q_c).abs() < 1e-9);
        let q = m.q_beta(2.0 * m.beta_c()).unwrap();
        assert!((q - 0.844916846782053).abs() < 1e-12);
        let q = m.q_beta(1e4).unwrap();
        assert!((q - 0.999965600156940).abs() < 1e-12);
        assert!(m.q_beta(0.9 * m.beta_c()).is_err());
        assert!(solve_q_beta(3, 2.0 * m.beta_c(), m.critical.e_star, 1e-3).is_err());
        // A t₋ larger than β·max f admits no root.
        let bc = m.beta_c();
        let too_big = 1.01 * bc * f_overlap(3, ell(3));
        assert!(matches!(solve_q_beta_with(3, bc, bc, too_big, 1e-12), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn free_energy_examples() {
        let m = TapModel::new(3).unwrap();
        let bc = m.beta_c();
        let s = m.solution(0.5 * bc).unwrap();
        assert_eq!(s.free_energy, 0.5 * (0.5 * bc) * (0.5 * bc));
        assert_eq!((s.q_beta, s.branch), (0.0, Branch::HighTemperature));
        let s = m.solution(bc).unwrap();
        assert!((s.free_energy - 0.727888370309506).abs() < 1e-12);
        assert_eq!(s.branch, Branch::Critical);
        let s = m.solution(2.0 * bc).unwrap();
        assert!((s.free_energy - 2.361879592607728).abs() < 1e-10);
        let above = m.solution(bc * (1.0 + 1e-12)).unwrap();
        assert!((above.free_energy - 0.5 * bc * bc).abs() < 1e-8);
    }

    #[test]
    fn p2_branch() {
        let s = free_energy(2, 2.0).unwrap();
        assert!((s.q_beta - (1.0 - 1.0 / (2.0 * 2f64.sqrt()))).abs() < 1e-15);
        assert!((s.t_minus - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((2.0 * f_overlap(2, s.q_beta) - s.t_minus).abs() < 1e-14);
        let below = free_energy(2, 0.5).unwrap();
        assert_eq!((below.q_beta, below.free_energy), (0.0, 0.125));
    }

    #[test]
    fn tap_functional_examples() {
        let m = TapModel::new(3).unwrap();
        let s = m.tap_functional(1.3, 0.0).unwrap();
        assert_eq!(s.g_value, 0.5 * 1.3 * 1.3);
        assert_eq!(s.g_derivative, -0.5);
        let s = m.tap_functional(m.beta_c(), m.critical.q_c).unwrap();
        assert!((s.g_value - 0.5 * m.beta_c().powi(2)).abs() < 1e-8);
        assert!(s.g_derivative.abs() < 1e-8);
        let b = 2.0 * m.beta_c();
        let s = m.tap_functional(b, m.q_beta(b).unwrap()).unwrap();
        assert!(s.g_derivative.abs() < 1e-8);
        assert!(m.tap_functional(1.0, 1.0).is_err());
    }

    #[test]
    fn lemma_bound_examples() {
        let m = TapModel::new(3).unwrap();
        let b = 2.0 * m.beta_c();
        assert!(lemma_bound_check(3, b, m.q_beta(b).unwrap()));
        assert!(lemma_bound_check(3, 0.5, 0.0));
        let l = ell(3);
        let violating = (1.0 / 6f64.sqrt()) / f_overlap(3, l) * 1.01;
        assert!(!lemma_bound_check(3, violating, l));
    }

    #[test]
    fn sweep_examples() {
        let rows = sweep(3, &[0.0]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!((rows[0].free_energy, rows[0].q_beta), (0.0, 0.0));
        let bc = TapModel::new(3).unwrap().beta_c();
        let rows = sweep(3, &[bc - 1e-6, bc + 1e-6]).unwrap();
        assert_eq!(rows[0].q_beta, 0.0);
        assert!((rows[1].q_beta - 0.645).abs() < 1e-2);
        assert!((rows[1].free_energy - rows[0].free_energy).abs() < 1e-5);
        assert!(sweep(3, &[1.0, 0.5]).is_err());
        assert!(sweep(3, &[-1.0]).is_err());
        let rows = sweep(2, &[0.2, 0.5, 0.71, 1.0, 3.0]).unwrap();
        for r in rows {
            let expected = (1.0 - 1.0 / (2f64.sqrt() * r.beta)).max(0.0);
            assert!((r.q_beta - expected).abs() < 1e-15);
        }
    }
}
