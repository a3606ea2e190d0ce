//! Critical overlap, critical inverse temperature and ground-state energy of
//! the spherical pure p-spin model.
//!
//! For `p >= 3` the critical overlap `q_c` is the unique zero in `(0, 1)` of
//!
//! ```text
//! a(q) = p(1-q) log(1-q) + pq - (p-1)q²
//! ```
//!
//! and then
//!
//! ```text
//! β_c = q_c^{1 - p/2} / sqrt(p(1-q_c))
//! E★  = ½ E∞ ( 1/sqrt((p-1)(1-q_c)) + sqrt((p-1)(1-q_c)) )
//! ```
//!
//! `a` has a single interior stationary point, located where
//! `b(q) = -log(1-q)/q` equals `2(p-1)/p`; since `b` is increasing that point
//! is found by bisection and `[q*, 1)` brackets `q_c`.
//!
//! At `p = 2` the interior root degenerates to `q_c = 0` and the closed forms
//! `β_c = 1/√2`, `E★ = √2` are used instead.

use crate::error::{invalid, Error, Result};
use crate::mixtures::{check_degree, e_infinity, Mixture};
use crate::roots::{bisect, bisect_secant};

/// Distance kept between `q` and 1 before taking `log(1-q)`.
pub const ONE_MINUS_Q_FLOOR: f64 = 1e-12;

/// Upper end of the bracket used for `q_c`.
const QC_BRACKET_TOP: f64 = 1.0 - 1e-9;

/// Bracket width at which bisection hands over to secant refinement.
const BISECTION_WIDTH: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub p: u32,
    pub q_c: f64,
    pub beta_c: f64,
    /// Ground-state energy per spin.
    pub e_star: f64,
    pub e_inf: f64,
}

/// Signed left-minus-right residuals of the three equations satisfied by
/// `(β_c, q_c, E★)`:
///
/// * `r_i`:   `1/(1-q) + β²(1-q)ν''(q) - β p q^{p/2-1} E`
/// * `r_iia`: `β²(ν(q) + (1-q)ν'(q)) - β q^{p/2} E`
/// * `r_iib`: `β q^{p/2} E + log(1-q)`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualTriple {
    pub r_i: f64,
    pub r_iia: f64,
    pub r_iib: f64,
}

impl ResidualTriple {
    pub fn max_abs(&self) -> f64 {
        self.r_i.abs().max(self.r_iia.abs()).max(self.r_iib.abs())
    }
}

fn clamp_below_one(q: f64) -> f64 {
    q.min(1.0 - ONE_MINUS_Q_FLOOR)
}

/// `log(1-q)` with `q` clamped away from one.
fn log_one_minus(q: f64) -> f64 {
    (-clamp_below_one(q)).ln_1p()
}

fn check_q(q: f64) -> Result<()> {
    if (0.0..1.0).contains(&q) {
        Ok(())
    } else {
        Err(Error::OverlapOutOfDomain { q, domain: "[0, 1)" })
    }
}

pub fn aux_a(p: u32, q: f64) -> Result<f64> {
    check_degree(p)?;
    check_q(q)?;
    if q == 0.0 {
        return Ok(0.0);
    }
    let pf = p as f64;
    Ok(pf * (1.0 - q) * log_one_minus(q) + pf * q - (pf - 1.0) * q * q)
}

/// `b(q) = -log(1-q)/q`, continued by its limit `b(0) = 1`.
pub fn aux_b(q: f64) -> Result<f64> {
    check_q(q)?;
    if q == 0.0 {
        return Ok(1.0);
    }
    Ok(-log_one_minus(q) / q)
}

/// Point `q*` where `a'(q*) = 0`, i.e. `b(q*) = 2(p-1)/p`.
pub fn stationary_point_of_a(p: u32) -> Result<f64> {
    check_degree(p)?;
    if p < 3 {
        return Err(invalid("p", "a(q) has no interior stationary point for p = 2"));
    }
    let target = 2.0 * (p as f64 - 1.0) / p as f64;
    let g = |q: f64| aux_b(q).unwrap_or(f64::INFINITY) - target;
    let (lo, hi) = bisect(g, 0.0, QC_BRACKET_TOP, BISECTION_WIDTH)?;
    Ok(0.5 * (lo + hi))
}

/// Critical overlap `q_c` for `p >= 3`, with `|a(q_c)| <= tol`.
pub fn solve_qc(p: u32, tol: f64) -> Result<f64> {
    check_degree(p)?;
    if p < 3 {
        return Err(invalid("p", "solve_qc needs p >= 3; p = 2 has the boundary root q_c = 0"));
    }
    if !(tol > 0.0 && tol <= 1e-6) {
        return Err(invalid("tol", format!("{tol} outside (0, 1e-6]")));
    }
    let q_star = stationary_point_of_a(p)?;
    let a = |q: f64| aux_a(p, q).expect("q inside [q*, 1)");
    let (a_lo, a_hi) = (a(q_star), a(QC_BRACKET_TOP));
    if !(a_lo < 0.0 && a_hi > 0.0) {
        return Err(Error::NoBracket { lo: q_star, hi: QC_BRACKET_TOP, f_lo: a_lo, f_hi: a_hi });
    }
    let q_c = bisect_secant(a, q_star, QC_BRACKET_TOP, BISECTION_WIDTH)?;
    let residual = a(q_c);
    if residual.abs() > tol {
        return Err(Error::Inconsistent(format!("|a(q_c)| = {residual:e} exceeds tolerance {tol:e}")));
    }
    Ok(q_c)
}

/// Solves for `(q_c, β_c, E★)` with the default tolerance `1e-12`.
pub fn solve_critical(p: u32) -> Result<CriticalPoint> {
    solve_critical_with_tol(p, 1e-12)
}

pub fn solve_critical_with_tol(p: u32, tol: f64) -> Result<CriticalPoint> {
    check_degree(p)?;
    let e_inf = e_infinity(p);
    if p == 2 {
        return Ok(CriticalPoint {
            p,
            q_c: 0.0,
            beta_c: std::f64::consts::FRAC_1_SQRT_2,
            e_star: std::f64::consts::SQRT_2,
            e_inf,
        });
    }
    let q_c = solve_qc(p, tol)?;
    let pf = p as f64;
    let beta_c = q_c.powf(1.0 - 0.5 * pf) / (pf * (1.0 - q_c)).sqrt();
    let s = ((pf - 1.0) * (1.0 - q_c)).sqrt();
    let e_star = 0.5 * e_inf * (1.0 / s + s);
    Ok(CriticalPoint { p, q_c, beta_c, e_star, e_inf })
}

/// Residuals of the stationarity equations at `(β, q, E)`.
///
/// `q` must lie in `(0, 1)`; at `p = 2` the boundary `q = 0` is also accepted
/// because every power of `q` stays finite there.
pub fn residuals_prop(p: u32, beta: f64, q: f64, energy: f64) -> Result<ResidualTriple> {
    check_degree(p)?;
    let q_ok = if p == 2 { (0.0..1.0).contains(&q) } else { q > 0.0 && q < 1.0 };
    if !q_ok {
        return Err(Error::OverlapOutOfDomain { q, domain: "(0, 1)" });
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(invalid("beta", format!("{beta} is not positive")));
    }
    let (nu, d1, d2) = Mixture::pure(p)?.eval_derivs(q);
    let half_p = 0.5 * p as f64;
    let q_half_p_minus_one = q.powf(half_p - 1.0);
    let q_half_p = q.powf(half_p);
    Ok(ResidualTriple {
        r_i: 1.0 / (1.0 - q) + beta * beta * (1.0 - q) * d2 - beta * p as f64 * q_half_p_minus_one * energy,
        r_iia: beta * beta * (nu + (1.0 - q) * d1) - beta * q_half_p * energy,
        r_iib: beta * q_half_p * energy + log_one_minus(q),
    })
}

/// Residual of the p = 2 continuity condition
/// `½β² = √2 β - ½ log β - ¼ log 2 - ¾` (left minus right).
pub fn p2_betac_residual(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(invalid("beta", format!("{beta} is not positive")));
    }
    let rhs = std::f64::consts::SQRT_2 * beta - 0.5 * beta.ln() - 0.25 * std::f64::consts::LN_2 - 0.75;
    Ok(0.5 * beta * beta - rhs)
}
