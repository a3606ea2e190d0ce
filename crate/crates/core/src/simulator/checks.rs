//! Monte Carlo and finite-difference checks of the field itself.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::simulator::disorder::{stream_rng, DisorderTensor, DEFAULT_ENTRY_BUDGET};
use crate::simulator::kernel::{gradient_at, hamiltonian_at, Workspace};
use crate::simulator::spin::SpinConfiguration;

/// Draws per parallel block; block sums are reduced in a fixed order.
const BLOCK: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceRow {
    pub overlap: f64,
    /// `N R^p`.
    pub target: f64,
    pub mean: f64,
    pub stderr: f64,
    pub z: f64,
}

/// Empirical `E H(σ)H(σ')` over `draws` fresh disorder samples, compared with
/// the covariance `N R(σ,σ')^p` of the pure model.
pub fn covariance_check(
    n: usize,
    p: u32,
    pairs: &[(SpinConfiguration, SpinConfiguration)],
    draws: usize,
    seed: u64,
) -> Result<Vec<CovarianceRow>> {
    if draws < 1000 {
        return Err(invalid("draws", format!("{draws} < 1000")));
    }
    for (a, b) in pairs {
        if a.n() != n || b.n() != n {
            return Err(invalid("pairs", format!("configurations must have dimension {n}")));
        }
        if (a.radius_ratio() - 1.0).abs() > 1e-10 || (b.radius_ratio() - 1.0).abs() > 1e-10 {
            return Err(invalid("pairs", "configurations must lie on the sphere"));
        }
    }
    let blocks = draws.div_ceil(BLOCK);
    let partial: Vec<Vec<(f64, f64)>> = (0..blocks)
        .into_par_iter()
        .map(|b| -> Result<Vec<(f64, f64)>> {
            let mut sums = vec![(0.0, 0.0); pairs.len()];
            let mut ws = Workspace::default();
            for d in b * BLOCK..((b + 1) * BLOCK).min(draws) {
                let j = DisorderTensor::sample_stream(n, p, seed, d as u64, DEFAULT_ENTRY_BUDGET)?;
                for ((a, c), s) in pairs.iter().zip(sums.iter_mut()) {
                    let x = ws.energy(&j, a.coords()) * ws.energy(&j, c.coords());
                    s.0 += x;
                    s.1 += x * x;
                }
            }
            Ok(sums)
        })
        .collect::<Result<_>>()?;
    let d = draws as f64;
    Ok(pairs
        .iter()
        .enumerate()
        .map(|(i, (a, b))| {
            let (sum, sum_sq) = partial.iter().fold((0.0, 0.0), |acc, blk| (acc.0 + blk[i].0, acc.1 + blk[i].1));
            let mean = sum / d;
            let var = (sum_sq / d - mean * mean) * d / (d - 1.0);
            let stderr = (var.max(0.0) / d).sqrt();
            let overlap = a.overlap(b);
            let target = n as f64 * overlap.powi(p as i32);
            CovarianceRow { overlap, target, mean, stderr, z: (mean - target) / stderr }
        })
        .collect())
}

/// Two configurations on the sphere of dimension `n` with overlap exactly
/// `r` up to rounding.
pub fn pair_with_overlap(n: usize, r: f64) -> Result<(SpinConfiguration, SpinConfiguration)> {
    if n < 2 || !(-1.0..=1.0).contains(&r) {
        return Err(invalid("r", format!("cannot build overlap {r} in dimension {n}")));
    }
    let root_n = (n as f64).sqrt();
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    a[0] = root_n;
    b[0] = r * root_n;
    b[1] = (1.0 - r * r).max(0.0).sqrt() * root_n;
    Ok((SpinConfiguration::normalized(a)?, SpinConfiguration::normalized(b)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientCheck {
    pub n: usize,
    pub p: u32,
    /// `‖∇H - ∇_fd H‖ / ‖∇H‖`.
    pub rel_error: f64,
}

/// Central finite differences of `H` with step `step` at a random point of
/// the sphere, against the analytic gradient.
pub fn gradient_check(n: usize, p: u32, seed: u64, step: f64) -> Result<GradientCheck> {
    let j = DisorderTensor::sample(n, p, seed)?;
    let sigma = SpinConfiguration::random(n, &mut stream_rng(seed, 1));
    let analytic = gradient_at(&j, sigma.coords())?;
    let mut x = sigma.coords().to_vec();
    let mut diff_sq = 0.0;
    for i in 0..n {
        let orig = x[i];
        x[i] = orig + step;
        let up = hamiltonian_at(&j, &x)?;
        x[i] = orig - step;
        let down = hamiltonian_at(&j, &x)?;
        x[i] = orig;
        diff_sq += ((up - down) / (2.0 * step) - analytic[i]).powi(2);
    }
    let norm = analytic.iter().map(|g| g * g).sum::<f64>().sqrt();
    Ok(GradientCheck { n, p, rel_error: diff_sq.sqrt() / norm })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn built_pairs_have_requested_overlap() {
        for r in [0.0, 0.5, 1.0, -0.3] {
            let (a, b) = pair_with_overlap(16, r).unwrap();
            assert!((a.overlap(&b) - r).abs() < 1e-14);
        }
    }

    #[test]
    fn covariance_small_run() {
        let pairs = vec![pair_with_overlap(6, 1.0).unwrap(), pair_with_overlap(6, 0.0).unwrap()];
        let rows = covariance_check(6, 2, &pairs, 4000, 8).unwrap();
        assert!((rows[0].target - 6.0).abs() < 1e-12);
        assert_eq!(rows[1].target, 0.0);
        for r in &rows {
            assert!(r.z.abs() < 5.0, "{r:?}");
        }
        assert!(covariance_check(6, 2, &pairs, 10, 8).is_err());
    }

    #[test]
    fn gradient_check_is_small() {
        let g = gradient_check(7, 3, 4, 1e-5).unwrap();
        assert!(g.rel_error < 1e-6, "{g:?}");
    }
}
