//! Replica-exchange Metropolis sampling of the Gibbs measure `∝ e^{βH(σ)}` on
//! the sphere.
//!
//! Each rung of the β ladder owns one chain and one RNG stream. A proposal
//! moves the whole configuration, `σ' = √N (σ + δg)/‖σ + δg‖` with `g`
//! standard Gaussian, which is symmetric with respect to the uniform measure.
//! During burn-in `δ` adapts toward the target acceptance window and is frozen
//! afterwards so that measurements use a fixed kernel.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::simulator::disorder::{stream_rng, DisorderTensor};
use crate::simulator::kernel::Workspace;
use crate::simulator::spin::{dot, SpinConfiguration};

/// Proposals between two scale adaptations.
const ADAPT_WINDOW: u64 = 50;
const TARGET_ACCEPTANCE: (f64, f64) = (0.3, 0.5);
const SCALE_BOUNDS: (f64, f64) = (1e-5, 20.0);
/// Upper bound on the number of batches used for batch-means errors.
pub const MAX_BATCHES: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct TemperingConfig {
    pub ladder: Vec<f64>,
    pub seed: u64,
    pub initial_scale: f64,
    /// Adapt `δ` during burn-in.
    pub adapt: bool,
    /// Metropolis proposals per chain in one sweep.
    pub steps_per_sweep: usize,
    /// Swap attempts happen every `swap_interval` sweeps; 0 disables swaps.
    pub swap_interval: usize,
    pub parallel: bool,
}

impl TemperingConfig {
    pub fn new(ladder: Vec<f64>, seed: u64) -> Self {
        Self { ladder, seed, initial_scale: 0.2, adapt: true, steps_per_sweep: 5, swap_interval: 1, parallel: false }
    }
}

#[derive(Debug, Clone)]
struct Chain {
    sigma: SpinConfiguration,
    energy: f64,
    scale: f64,
    rng: ChaCha8Rng,
    proposals: u64,
    accepted: u64,
    window_proposals: u64,
    window_accepted: u64,
    samples: Vec<f64>,
    ws: Workspace,
    proposal: Vec<f64>,
}

impl Chain {
    fn step(&mut self, disorder: &DisorderTensor, beta: f64, adapt: bool) -> bool {
        let n = self.sigma.n();
        self.proposal.clear();
        for &x in self.sigma.coords() {
            let g: f64 = self.rng.sample(StandardNormal);
            self.proposal.push(x + self.scale * g);
        }
        let norm = dot(&self.proposal, &self.proposal).sqrt();
        let factor = (n as f64).sqrt() / norm;
        self.proposal.iter_mut().for_each(|v| *v *= factor);
        let energy = self.ws.energy(disorder, &self.proposal);
        let log_ratio = beta * (energy - self.energy);
        let u: f64 = self.rng.random();
        let accept = log_ratio >= 0.0 || u < log_ratio.exp();
        if accept {
            let coords = std::mem::take(&mut self.proposal);
            let previous = std::mem::replace(&mut self.sigma, SpinConfiguration::from_projected(coords));
            self.proposal = previous.into_coords();
            self.energy = energy;
        }
        self.proposals += 1;
        self.accepted += accept as u64;
        if adapt {
            self.window_proposals += 1;
            self.window_accepted += accept as u64;
            if self.window_proposals == ADAPT_WINDOW {
                let rate = self.window_accepted as f64 / ADAPT_WINDOW as f64;
                if rate < TARGET_ACCEPTANCE.0 {
                    self.scale *= 0.8;
                } else if rate > TARGET_ACCEPTANCE.1 {
                    self.scale *= 1.25;
                }
                self.scale = self.scale.clamp(SCALE_BOUNDS.0, SCALE_BOUNDS.1);
                self.window_proposals = 0;
                self.window_accepted = 0;
            }
        }
        accept
    }
}

/// Running statistics of one rung.
#[derive(Debug, Clone, PartialEq)]
pub struct RungStatistics {
    pub beta: f64,
    pub mean_energy_per_spin: f64,
    /// Batch-means standard error of the mean energy per spin.
    pub stderr: f64,
    pub acceptance_rate: f64,
    /// Acceptance rate of swaps with the next rung (`None` for the top rung).
    pub swap_rate: Option<f64>,
    pub samples: usize,
    pub proposal_scale: f64,
}

#[derive(Debug, Clone)]
pub struct TemperingEnsemble {
    disorder: Arc<DisorderTensor>,
    ladder: Vec<f64>,
    chains: Vec<Chain>,
    swap_rng: ChaCha8Rng,
    swap_attempts: Vec<u64>,
    swap_accepts: Vec<u64>,
    steps_per_sweep: usize,
    swap_interval: usize,
    adapting: bool,
    sweeps_done: u64,
    parallel: bool,
}

impl TemperingEnsemble {
    pub fn new(disorder: Arc<DisorderTensor>, config: &TemperingConfig) -> Result<Self> {
        let ladder = config.ladder.clone();
        if ladder.is_empty() {
            return Err(invalid("ladder", "at least one rung is required"));
        }
        if ladder.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(invalid("ladder", "inverse temperatures must be finite and nonnegative"));
        }
        if ladder.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("ladder", "must be strictly increasing"));
        }
        if !(config.initial_scale > 0.0 && config.initial_scale.is_finite()) {
            return Err(invalid("initial_scale", "must be positive"));
        }
        if config.steps_per_sweep == 0 {
            return Err(invalid("steps_per_sweep", "must be positive"));
        }
        let n = disorder.n();
        let chains = (0..ladder.len())
            .map(|r| {
                let mut rng = stream_rng(config.seed, 1 + r as u64);
                let sigma = SpinConfiguration::random(n, &mut rng);
                let mut ws = Workspace::default();
                let energy = ws.energy(&disorder, sigma.coords());
                Chain {
                    sigma,
                    energy,
                    scale: config.initial_scale,
                    rng,
                    proposals: 0,
                    accepted: 0,
                    window_proposals: 0,
                    window_accepted: 0,
                    samples: Vec::new(),
                    ws,
                    proposal: Vec::with_capacity(n),
                }
            })
            .collect();
        let rungs = ladder.len();
        Ok(Self {
            disorder,
            ladder,
            chains,
            swap_rng: stream_rng(config.seed, 0),
            swap_attempts: vec![0; rungs.saturating_sub(1)],
            swap_accepts: vec![0; rungs.saturating_sub(1)],
            steps_per_sweep: config.steps_per_sweep,
            swap_interval: config.swap_interval,
            adapting: config.adapt,
            sweeps_done: 0,
            parallel: config.parallel,
        })
    }

    pub fn ladder(&self) -> &[f64] {
        &self.ladder
    }

    pub fn disorder(&self) -> &Arc<DisorderTensor> {
        &self.disorder
    }

    pub fn configuration(&self, rung: usize) -> &SpinConfiguration {
        &self.chains[rung].sigma
    }

    pub fn energy(&self, rung: usize) -> f64 {
        self.chains[rung].energy
    }

    /// Per-sweep energy-per-spin samples recorded at `rung`.
    pub fn samples(&self, rung: usize) -> &[f64] {
        &self.chains[rung].samples
    }

    /// One Metropolis proposal at `rung`; returns whether it was accepted.
    pub fn mcmc_step(&mut self, rung: usize) -> Result<bool> {
        if rung >= self.chains.len() {
            return Err(invalid("rung", format!("{rung} out of range")));
        }
        let beta = self.ladder[rung];
        Ok(self.chains[rung].step(&self.disorder, beta, self.adapting))
    }

    fn advance_chains(&mut self) {
        let disorder = &self.disorder;
        let ladder = &self.ladder;
        let (steps, adapt) = (self.steps_per_sweep, self.adapting);
        let work = |(r, chain): (usize, &mut Chain)| {
            for _ in 0..steps {
                chain.step(disorder, ladder[r], adapt);
            }
        };
        if self.parallel {
            self.chains.par_iter_mut().enumerate().for_each(work);
        } else {
            self.chains.iter_mut().enumerate().for_each(work);
        }
    }

    /// Attempts exchanges between adjacent rungs, even or odd pairs alternately.
    fn attempt_swaps(&mut self) {
        let start = (self.sweeps_done % 2) as usize;
        let mut i = start;
        while i + 1 < self.chains.len() {
            let (bi, bj) = (self.ladder[i], self.ladder[i + 1]);
            let (hi, hj) = (self.chains[i].energy, self.chains[i + 1].energy);
            let log_ratio = (bi - bj) * (hj - hi);
            let u: f64 = self.swap_rng.random();
            self.swap_attempts[i] += 1;
            if log_ratio >= 0.0 || u < log_ratio.exp() {
                self.swap_accepts[i] += 1;
                let (lo, hi_chains) = self.chains.split_at_mut(i + 1);
                let (a, b) = (&mut lo[i], &mut hi_chains[0]);
                std::mem::swap(&mut a.sigma, &mut b.sigma);
                std::mem::swap(&mut a.energy, &mut b.energy);
            }
            i += 2;
        }
    }

    fn sweep_once(&mut self, record: bool) {
        self.advance_chains();
        if self.swap_interval > 0 && (self.sweeps_done + 1).is_multiple_of(self.swap_interval as u64) {
            self.attempt_swaps();
        }
        self.sweeps_done += 1;
        if record {
            let n = self.disorder.n() as f64;
            for chain in &mut self.chains {
                chain.samples.push(chain.energy / n);
            }
        }
    }

    /// Equilibration sweeps. Samples are discarded, the proposal scales are
    /// frozen afterwards and every counter is reset.
    pub fn burn_in(&mut self, sweeps: usize) {
        for _ in 0..sweeps {
            self.sweep_once(false);
        }
        self.adapting = false;
        for chain in &mut self.chains {
            chain.proposals = 0;
            chain.accepted = 0;
            chain.samples.clear();
        }
        self.swap_attempts.iter_mut().for_each(|c| *c = 0);
        self.swap_accepts.iter_mut().for_each(|c| *c = 0);
    }

    /// Measurement sweeps: each records one energy sample per rung.
    pub fn tempering_sweep(&mut self, sweeps: usize) -> Result<Vec<RungStatistics>> {
        if sweeps == 0 {
            return Err(invalid("sweeps", "at least one sweep is required"));
        }
        for _ in 0..sweeps {
            self.sweep_once(true);
        }
        Ok(self.statistics())
    }

    pub fn statistics(&self) -> Vec<RungStatistics> {
        self.chains
            .iter()
            .enumerate()
            .map(|(r, chain)| {
                let (mean, stderr) = batch_means(&chain.samples, MAX_BATCHES);
                RungStatistics {
                    beta: self.ladder[r],
                    mean_energy_per_spin: mean,
                    stderr,
                    acceptance_rate: ratio(chain.accepted, chain.proposals),
                    swap_rate: self.swap_attempts.get(r).map(|&a| ratio(self.swap_accepts[r], a)),
                    samples: chain.samples.len(),
                    proposal_scale: chain.scale,
                }
            })
            .collect()
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Mean and batch-means standard error. Uses up to `max_batches` equal
/// batches; a leading remainder is dropped from the error estimate only.
pub fn batch_means(samples: &[f64], max_batches: usize) -> (f64, f64) {
    let len = samples.len();
    if len == 0 {
        return (f64::NAN, f64::INFINITY);
    }
    let mean = samples.iter().sum::<f64>() / len as f64;
    let batches = max_batches.min(len);
    if batches < 2 {
        return (mean, f64::INFINITY);
    }
    let size = len / batches;
    let tail = &samples[len - size * batches..];
    let means: Vec<f64> = tail.chunks_exact(size).map(|c| c.iter().sum::<f64>() / size as f64).collect();
    let m = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (batches as f64 - 1.0);
    (mean, (var / batches as f64).sqrt())
}
