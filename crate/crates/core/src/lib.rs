//! Thermodynamics of spherical pure p-spin glasses.
//!
//! The analytic side ([`mixtures`], [`critical`], [`free_energy`]) computes
//! the critical overlap, the critical inverse temperature, the ground-state
//! energy and the free energy at every temperature from closed-form
//! equations. The [`simulator`] realises the model at finite `N` so that
//! those values can be checked against sampled disorder.

pub mod critical;
pub mod error;
pub mod free_energy;
pub mod mixtures;
mod roots;
pub mod simulator;

pub use critical::{
    aux_a, aux_b, p2_betac_residual, residuals_prop, solve_critical, solve_qc, CriticalPoint, ResidualTriple,
};
pub use error::{Error, Result};
pub use free_energy::{
    free_energy, lemma_bound_check, solve_q_beta, sweep, t_pm, tap_functional, Branch, TapFunctionalSample, TapModel,
    TapSolution,
};
pub use mixtures::{e_infinity, onsager_term, shift_mixture, Mixture, ShiftedMixture};
