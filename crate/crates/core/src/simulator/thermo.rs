//! Thermodynamic integration of the finite-N free energy.
//!
//! With the uniform measure on the sphere normalised to one, `F_N(0) = 0` and
//! `dF_N/dβ = ⟨H⟩_β / N`, so `F_N(β)` is the trapezoid integral of the mean
//! energy per spin along the tempering ladder.

use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::simulator::disorder::DisorderTensor;
use crate::simulator::tempering::{RungStatistics, TemperingConfig, TemperingEnsemble};

/// Rungs accepting fewer proposals than this are flagged.
pub const MIN_ACCEPTANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct ThermoPoint {
    pub beta: f64,
    pub free_energy: f64,
    pub stderr: f64,
    pub mean_energy_per_spin: f64,
    pub acceptance_rate: f64,
    pub unequilibrated: bool,
}

/// Cumulative trapezoid over the ladder from the recorded rung statistics.
pub fn integrate(stats: &[RungStatistics]) -> Result<Vec<ThermoPoint>> {
    let first = stats.first().ok_or_else(|| invalid("ladder", "empty"))?;
    if first.beta != 0.0 {
        return Err(invalid("ladder", format!("must start at beta = 0, starts at {}", first.beta)));
    }
    if let Some(s) = stats.iter().find(|s| s.samples == 0) {
        return Err(invalid("ladder", format!("rung beta = {} has no samples", s.beta)));
    }
    // weights[i] is the coefficient of rung i's mean in the running integral.
    let mut weights = vec![0.0; stats.len()];
    let mut free_energy = 0.0;
    let mut out = Vec::with_capacity(stats.len());
    for (k, s) in stats.iter().enumerate() {
        if k > 0 {
            let prev = &stats[k - 1];
            let h = s.beta - prev.beta;
            free_energy += 0.5 * h * (prev.mean_energy_per_spin + s.mean_energy_per_spin);
            weights[k - 1] += 0.5 * h;
            weights[k] += 0.5 * h;
        }
        let var: f64 =
            weights[..=k].iter().zip(stats).map(|(w, s)| if *w == 0.0 { 0.0 } else { (w * s.stderr).powi(2) }).sum();
        out.push(ThermoPoint {
            beta: s.beta,
            free_energy,
            stderr: var.sqrt(),
            mean_energy_per_spin: s.mean_energy_per_spin,
            acceptance_rate: s.acceptance_rate,
            unequilibrated: s.beta > 0.0 && s.acceptance_rate < MIN_ACCEPTANCE,
        });
    }
    Ok(out)
}

/// Integrates the statistics currently held by `ensemble`.
pub fn thermo_integration(ensemble: &TemperingEnsemble) -> Result<Vec<ThermoPoint>> {
    integrate(&ensemble.statistics())
}

/// Evenly spaced ladder on `[0, beta_max]` with `rungs` points, plus a
/// geometric cluster around `beta_c` when it lies inside the interval.
pub fn thermo_ladder(beta_max: f64, rungs: usize, beta_c: Option<f64>) -> Result<Vec<f64>> {
    if !(beta_max > 0.0 && beta_max.is_finite()) || rungs < 2 {
        return Err(invalid("ladder", "need beta_max > 0 and at least two rungs"));
    }
    let h = beta_max / (rungs - 1) as f64;
    let mut ladder: Vec<f64> = (0..rungs).map(|i| if i + 1 == rungs { beta_max } else { i as f64 * h }).collect();
    if let Some(bc) = beta_c.filter(|&b| b > 0.0 && b < beta_max) {
        ladder.push(bc);
        for k in 0..3 {
            let d = 0.5 * h * 0.5f64.powi(k);
            ladder.extend([bc - d, bc + d].into_iter().filter(|&b| b > 0.0 && b < beta_max));
        }
    }
    ladder.sort_by(f64::total_cmp);
    ladder.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    Ok(ladder)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermoOptions {
    pub tempering: TemperingConfig,
    pub burn_in: usize,
    pub sweeps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermoRun {
    pub points: Vec<ThermoPoint>,
    pub rungs: Vec<RungStatistics>,
}

/// Burn-in, measurement and integration in one call.
pub fn run_thermo(disorder: Arc<DisorderTensor>, opts: &ThermoOptions) -> Result<ThermoRun> {
    let mut ensemble = TemperingEnsemble::new(disorder, &opts.tempering)?;
    ensemble.burn_in(opts.burn_in);
    let rungs = ensemble.tempering_sweep(opts.sweeps)?;
    Ok(ThermoRun { points: integrate(&rungs)?, rungs })
}
