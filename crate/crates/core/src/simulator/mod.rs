//! Finite-N realisation of the spherical pure p-spin model.

pub mod checks;
pub mod disorder;
pub mod ground_state;
pub mod kernel;
pub mod probe;
pub mod spin;
pub mod tempering;
pub mod thermo;

pub use checks::{covariance_check, gradient_check, pair_with_overlap, CovarianceRow, GradientCheck};
pub use disorder::{stream_rng, DisorderTensor, DEFAULT_ENTRY_BUDGET};
pub use ground_state::{ground_state_search, GroundState, GroundStateOptions, RestartResult};
pub use kernel::{gradient, gradient_at, hamiltonian, hamiltonian_at, SymmetricKernel, Workspace};
pub use probe::{overlap_probe, OverlapHistogram, ProbeOptions, ProbeReport};
pub use spin::SpinConfiguration;
pub use tempering::{batch_means, RungStatistics, TemperingConfig, TemperingEnsemble};
pub use thermo::{integrate, run_thermo, thermo_integration, thermo_ladder, ThermoOptions, ThermoPoint, ThermoRun};
