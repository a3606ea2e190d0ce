//! Maximisation of `H` over the sphere by projected gradient ascent.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::simulator::disorder::{stream_rng, DisorderTensor};
use crate::simulator::kernel::{gradient_at, hamiltonian_at, SymmetricKernel, Workspace};
use crate::simulator::spin::{dot, SpinConfiguration};

/// Armijo sufficient-increase constant.
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundStateOptions {
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop once `‖∇_sp H‖ <= tol · ‖∇H‖`.
    pub tol: f64,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for GroundStateOptions {
    fn default() -> Self {
        Self { restarts: 10, max_iters: 20_000, tol: 1e-7, seed: 0, parallel: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartResult {
    pub restart: usize,
    pub energy_per_spin: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub config: SpinConfiguration,
    pub energy_per_spin: f64,
    /// Whether the best restart met the tolerance within `max_iters`.
    pub converged: bool,
    pub restarts: Vec<RestartResult>,
}

enum Field<'a> {
    Symmetric(SymmetricKernel),
    Direct(&'a DisorderTensor),
}

impl Field<'_> {
    fn energy_gradient(&self, x: &[f64], grad: &mut Vec<f64>, ws: &mut Workspace) -> f64 {
        match self {
            Field::Symmetric(k) => k.energy_gradient(x, grad, ws),
            Field::Direct(j) => {
                *grad = gradient_at(j, x).expect("dimensions checked");
                hamiltonian_at(j, x).expect("dimensions checked")
            }
        }
    }

    fn energy(&self, x: &[f64], ws: &mut Workspace) -> f64 {
        match self {
            Field::Symmetric(k) => k.energy(x, ws),
            Field::Direct(j) => ws.energy(j, x),
        }
    }
}

fn project_to_sphere(x: &mut [f64]) {
    let n = x.len() as f64;
    let s = (n / dot(x, x)).sqrt();
    x.iter_mut().for_each(|v| *v *= s);
}

fn ascend(field: &Field, mut x: Vec<f64>, opts: &GroundStateOptions) -> (Vec<f64>, f64, usize, bool) {
    let n = x.len() as f64;
    let mut ws = Workspace::default();
    let mut grad = Vec::new();
    let mut trial = vec![0.0; x.len()];
    let mut energy = field.energy_gradient(&x, &mut grad, &mut ws);
    let mut step = f64::NAN;
    for iter in 0..opts.max_iters {
        let radial = dot(&grad, &x) / n;
        let tangent: Vec<f64> = grad.iter().zip(&x).map(|(g, s)| g - radial * s).collect();
        let t_norm_sq = dot(&tangent, &tangent);
        let g_norm = dot(&grad, &grad).sqrt();
        if t_norm_sq.sqrt() <= opts.tol * g_norm || t_norm_sq == 0.0 {
            return (x, energy, iter, true);
        }
        if !step.is_finite() {
            step = 0.1 * n.sqrt() / t_norm_sq.sqrt();
        }
        let mut accepted = false;
        for _ in 0..MAX_BACKTRACKS {
            trial.iter_mut().zip(&x).zip(&tangent).for_each(|((t, s), d)| *t = s + step * d);
            project_to_sphere(&mut trial);
            let e = field.energy(&trial, &mut ws);
            if e >= energy + ARMIJO * step * t_norm_sq {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // Stalled at floating-point resolution.
            return (x, energy, iter, true);
        }
        std::mem::swap(&mut x, &mut trial);
        energy = field.energy_gradient(&x, &mut grad, &mut ws);
        step *= 2.0;
    }
    (x, energy, opts.max_iters, false)
}

/// Best local maximum of `H/N` over `restarts` uniform random starts.
pub fn ground_state_search(j: &DisorderTensor, opts: &GroundStateOptions) -> Result<GroundState> {
    if opts.restarts == 0 {
        return Err(invalid("restarts", "at least one restart is required"));
    }
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(invalid("tol", "must be positive"));
    }
    let n = j.n();
    let field = match SymmetricKernel::new(j) {
        Some(k) => Field::Symmetric(k),
        None => Field::Direct(j),
    };
    let run = |r: usize| {
        let start = SpinConfiguration::random(n, &mut stream_rng(opts.seed, r as u64));
        let (x, energy, iterations, converged) = ascend(&field, start.into_coords(), opts);
        let energy = hamiltonian_at(j, &x).unwrap_or(energy);
        (x, RestartResult { restart: r, energy_per_spin: energy / n as f64, iterations, converged })
    };
    let outcomes: Vec<_> = if opts.parallel {
        (0..opts.restarts).into_par_iter().map(run).collect()
    } else {
        (0..opts.restarts).map(run).collect()
    };
    let best =
        outcomes
            .iter()
            .enumerate()
            .fold(0, |b, (i, o)| if o.1.energy_per_spin > outcomes[b].1.energy_per_spin { i } else { b });
    let (best_x, best_result) = outcomes[best].clone();
    Ok(GroundState {
        config: SpinConfiguration::normalized(best_x)?,
        energy_per_spin: best_result.energy_per_spin,
        converged: best_result.converged,
        restarts: outcomes.into_iter().map(|o| o.1).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field() {
        let j = DisorderTensor::zeros(6, 3).unwrap();
        let gs = ground_state_search(&j, &GroundStateOptions { restarts: 2, ..Default::default() }).unwrap();
        assert_eq!(gs.energy_per_spin, 0.0);
        assert!(gs.converged);
    }

    #[test]
    fn rejects_zero_restarts() {
        let j = DisorderTensor::sample(4, 3, 0).unwrap();
        assert!(ground_state_search(&j, &GroundStateOptions { restarts: 0, ..Default::default() }).is_err());
    }

    #[test]
    fn result_is_on_sphere_and_deterministic() {
        let j = DisorderTensor::sample(10, 3, 9).unwrap();
        let opts = GroundStateOptions { restarts: 4, seed: 2, ..Default::default() };
        let a = ground_state_search(&j, &opts).unwrap();
        let b = ground_state_search(&j, &GroundStateOptions { parallel: false, ..opts }).unwrap();
        assert_eq!(a, b);
        assert!((a.config.radius_ratio() - 1.0).abs() < 1e-10);
        assert_eq!(a.restarts.len(), 4);
        assert!(a.restarts.iter().all(|r| r.energy_per_spin <= a.energy_per_spin));
    }

    #[test]
    fn direct_field_path_for_high_degree() {
        let j = DisorderTensor::sample(3, 8, 1).unwrap();
        let gs = ground_state_search(&j, &GroundStateOptions { restarts: 2, ..Default::default() }).unwrap();
        assert!(gs.energy_per_spin > 0.0);
    }
}
