//! Grid and property checks of the analytic solvers against independent oracles.

use proptest::prelude::*;
use pspin::critical::{aux_a, aux_b, residuals_prop, solve_critical, stationary_point_of_a};
use pspin::free_energy::{f_overlap, sweep, t_pm, TapModel};
use pspin::mixtures::{binomial, pure_shift_at_one, shift_mixture, Mixture};

/// `1 - q^p - p q^{p-1}(1-q)` with `1 - q^p` from `expm1`, so the only loss
/// is the final cancellation.
fn shift_at_one_closed_form(p: u32, q: f64) -> f64 {
    let pf = p as f64;
    let one_minus_qp = -(pf * (-(1.0 - q)).ln_1p()).exp_m1();
    one_minus_qp - pf * q.powi(p as i32 - 1) * (1.0 - q)
}

#[test]
fn shifted_weights_sum_to_closed_form_on_grid() {
    for p in 2..=16 {
        for i in 0..1000 {
            let q = i as f64 * 1e-3;
            let s = shift_mixture(p, q).unwrap();
            assert!(s.alpha_sq.iter().all(|&a| a >= 0.0));
            let expected = shift_at_one_closed_form(p, q);
            let rel = (s.total() - expected).abs() / expected;
            assert!(rel <= 1e-12, "p={p} q={q} rel={rel:e}");
        }
    }
}

#[test]
fn shifted_total_decreases_in_q() {
    for p in 2..=16 {
        let vals: Vec<f64> = (0..1000).map(|i| pure_shift_at_one(p, i as f64 * 1e-3)).collect();
        // Near q = 0 the decrease is below f64 resolution for large p.
        for (i, w) in vals.windows(2).enumerate() {
            assert!(w[1] <= w[0], "p={p} i={i} {w:?}");
        }
        assert!(vals[999] < vals[500] && vals[500] < vals[100], "p={p}");
    }
}

#[test]
fn binomial_row_sums() {
    for n in 0..=64u32 {
        let sum: u128 = (0..=n).map(|k| binomial(n, k)).sum();
        assert_eq!(sum, 1u128 << n);
    }
}

proptest! {
    #[test]
    fn derivatives_match_central_differences(
        x in 0.05f64..0.95,
        weights in proptest::collection::vec(0.0f64..2.0, 1..6),
    ) {
        let mut coeffs: Vec<(u32, f64)> = weights.iter().enumerate().map(|(i, &w)| (i as u32 + 2, w)).collect();
        coeffs[0].1 += 0.1;
        let m = Mixture::new(coeffs).unwrap();
        let h = 1e-5;
        let (_, d1, d2) = m.eval_derivs(x);
        let fd1 = (m.eval(x + h) - m.eval(x - h)) / (2.0 * h);
        let fd2 = (m.eval_derivs(x + h).1 - m.eval_derivs(x - h).1) / (2.0 * h);
        prop_assert!((d1 - fd1).abs() <= 1e-6 * d1.abs());
        prop_assert!((d2 - fd2).abs() <= 1e-6 * d2.abs());
    }

    #[test]
    fn vieta_relations(p in 3u32..=16) {
        let cp = solve_critical(p).unwrap();
        let (tm, tp) = t_pm(p, cp.e_star).unwrap();
        let pf = p as f64;
        prop_assert!(((tm * tp) * pf * (pf - 1.0) - 1.0).abs() <= 1e-12);
        prop_assert!(((tm + tp) - cp.e_star / (pf - 1.0)).abs() <= 1e-12 * (tm + tp));
        let pivot = 1.0 / (pf * (pf - 1.0)).sqrt();
        prop_assert!(tm <= pivot && pivot <= tp);
    }
}

#[test]
fn finite_differences_at_fixed_point() {
    let m = Mixture::pure(3).unwrap();
    let x = 0.3;
    let h = 1e-5;
    let (_, d1, d2) = m.eval_derivs(x);
    assert!(((m.eval(x + h) - m.eval(x - h)) / (2.0 * h) - d1).abs() <= 1e-6 * d1);
    assert!(((m.eval_derivs(x + h).1 - m.eval_derivs(x - h).1) / (2.0 * h) - d2).abs() <= 1e-6 * d2);
}

/// Number of sign changes of `a(q)` on a uniform grid of `(0, 1 - 1e-9)`.
fn sign_changes(p: u32, step: f64) -> usize {
    let top = 1.0 - 1e-9;
    let count = (top / step) as usize;
    let mut prev = aux_a(p, step).unwrap().signum();
    let mut changes = 0;
    for i in 2..=count {
        let s = aux_a(p, (i as f64 * step).min(top)).unwrap().signum();
        if s != prev {
            changes += 1;
            prev = s;
        }
    }
    changes
}

#[test]
fn a_has_one_interior_root() {
    for p in 3..=16 {
        assert_eq!(sign_changes(p, 1e-5), 1, "p={p}");
    }
}

#[test]
fn a_limits() {
    for p in 3..=16 {
        assert_eq!(aux_a(p, 0.0).unwrap(), 0.0);
        assert!((aux_a(p, 1.0 - 1e-12).unwrap() - 1.0).abs() < 1e-6, "p={p}");
    }
}

#[test]
fn b_is_strictly_increasing() {
    let vals: Vec<f64> = (1..1000).map(|i| aux_b(i as f64 * 1e-3).unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[1] > w[0]));
}

/// Plain bisection of `a` on a sign-change bracket found by scanning, independent
/// of the solver's auxiliary-function bracket.
fn scan_bisect_qc(p: u32) -> f64 {
    let step = 1e-6;
    let mut lo = step;
    while aux_a(p, lo + step).unwrap() < 0.0 {
        lo += step;
    }
    let mut hi = lo + step;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if aux_a(p, mid).unwrap() < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn qc_matches_scan_oracle() {
    for p in [3, 4, 7, 12, 16] {
        let cp = solve_critical(p).unwrap();
        assert!((cp.q_c - scan_bisect_qc(p)).abs() < 1e-12, "p={p}");
        assert!(cp.q_c > stationary_point_of_a(p).unwrap());
    }
    assert!((scan_bisect_qc(3) - 0.6450).abs() < 1e-4);
}

#[test]
fn critical_triples_solve_the_equations() {
    for p in 3..=16 {
        let cp = solve_critical(p).unwrap();
        let r = residuals_prop(p, cp.beta_c, cp.q_c, cp.e_star).unwrap();
        assert!(r.max_abs() <= 1e-9, "p={p} {r:?}");
        assert!(cp.e_star >= cp.e_inf);
        let pf = p as f64;
        let expected_beta = cp.q_c.powf(1.0 - pf / 2.0) / (pf * (1.0 - cp.q_c)).sqrt();
        assert_eq!(cp.beta_c, expected_beta);
        // β_c f(q_c) = t₋
        let (tm, _) = t_pm(p, cp.e_star).unwrap();
        assert!((cp.beta_c * f_overlap(p, cp.q_c) - tm).abs() <= 1e-9, "p={p}");
    }
}

#[test]
fn branch_continuity() {
    for p in 2..=10 {
        let m = TapModel::new(p).unwrap();
        let bc = m.beta_c();
        let f = m.solution(bc + 1e-9).unwrap().free_energy;
        assert!((f - 0.5 * bc * bc).abs() <= 1e-6, "p={p}");
    }
}

#[test]
fn free_energy_monotone_and_convex() {
    for p in [2, 3, 5] {
        let betas: Vec<f64> = (0..=1000).map(|i| i as f64 * 1e-2).collect();
        let rows = sweep(p, &betas).unwrap();
        let f: Vec<f64> = rows.iter().map(|r| r.free_energy).collect();
        assert!(f.windows(2).all(|w| w[1] >= w[0]), "p={p}");
        assert!(f.windows(3).all(|w| w[2] - 2.0 * w[1] + w[0] >= -1e-8), "p={p}");
        let q: Vec<f64> = rows.iter().map(|r| r.q_beta).collect();
        assert!(q.windows(2).all(|w| w[1] >= w[0]), "p={p}");
    }
}

#[test]
fn root_identity_on_grid() {
    for p in 3..=8 {
        let m = TapModel::new(p).unwrap();
        let bc = m.beta_c();
        for i in 1..=200 {
            let beta = bc + (10.0 - bc) * i as f64 / 200.0;
            let q = m.q_beta(beta).unwrap();
            assert!((beta * f_overlap(p, q) - m.t_minus).abs() <= 1e-10);
            assert!(q > (p as f64 - 2.0) / p as f64 && q < 1.0);
        }
    }
}

#[test]
fn low_temperature_asymptotics() {
    let m = TapModel::new(3).unwrap();
    let beta = 1e4;
    let s = m.solution(beta).unwrap();
    let predicted = m.t_minus / beta;
    assert!(((1.0 - s.q_beta) - predicted).abs() <= 0.01 * predicted);
    assert!((s.free_energy / beta - m.critical.e_star).abs() <= 5e-3);
}

#[test]
fn tap_functional_stationary_and_decreasing_below_small_root() {
    let m = TapModel::new(3).unwrap();
    for factor in [1.2, 2.0, 5.0] {
        let beta = factor * m.beta_c();
        let q = m.q_beta(beta).unwrap();
        assert!(m.tap_functional(beta, q).unwrap().g_derivative.abs() <= 1e-8);
        assert!((m.tap_functional(beta, q).unwrap().g_value - m.solution(beta).unwrap().free_energy).abs() < 1e-12);
        // Smaller root of β f(q) = t₋ lies in (0, ℓ).
        let ell = 1.0 / 3.0;
        let target = m.t_minus / beta;
        let (mut lo, mut hi) = (0.0, ell);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f_overlap(3, mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let q_minus = 0.5 * (lo + hi);
        let g: Vec<f64> =
            (0..=100).map(|i| m.tap_functional(beta, q_minus * i as f64 / 100.0).unwrap().g_value).collect();
        assert!(g.windows(2).all(|w| w[1] < w[0]), "factor={factor}");
        assert!(m.tap_functional(beta, q).unwrap().g_value < 0.5 * beta * beta);
    }
}
