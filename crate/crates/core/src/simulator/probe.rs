//! Empirical distribution of pairwise overlaps between independent replicas.
//!
//! Each replica is a full tempering ensemble on the shared disorder with its
//! own seed. After every measurement sweep the configurations at the probed
//! rung are compared pairwise, `R(σ^i, σ^j)` for all `i < j`. Finite-N
//! histograms cannot certify that a given overlap is multi-samplable; the
//! report is a consistency diagnostic.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::simulator::disorder::DisorderTensor;
use crate::simulator::spin::SpinConfiguration;
use crate::simulator::tempering::{RungStatistics, TemperingConfig, TemperingEnsemble};
use crate::simulator::thermo::MIN_ACCEPTANCE;

/// Uniform histogram of overlaps over `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapHistogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub k: usize,
    pub pair_count: u64,
}

impl OverlapHistogram {
    pub fn new(bins: usize, k: usize) -> Self {
        let bin_edges = (0..=bins).map(|i| if i == bins { 1.0 } else { -1.0 + 2.0 * i as f64 / bins as f64 }).collect();
        Self { bin_edges, counts: vec![0; bins], k, pair_count: 0 }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_of(&self, r: f64) -> usize {
        let bins = self.bins();
        let x = ((r.clamp(-1.0, 1.0) + 1.0) * 0.5 * bins as f64).floor() as usize;
        x.min(bins - 1)
    }

    pub fn record(&mut self, r: f64) {
        let b = self.bin_of(r);
        self.counts[b] += 1;
        self.pair_count += 1;
    }

    pub fn modal_bin(&self) -> usize {
        // First maximum, for a deterministic tie-break.
        self.counts.iter().enumerate().fold(0, |best, (i, &c)| if c > self.counts[best] { i } else { best })
    }

    pub fn bin_center(&self, bin: usize) -> f64 {
        0.5 * (self.bin_edges[bin] + self.bin_edges[bin + 1])
    }

    /// Fraction of recorded pairs in bins whose centre lies in `[lo, hi]`.
    fn mass_where(&self, keep: impl Fn(f64) -> bool) -> f64 {
        if self.pair_count == 0 {
            return 0.0;
        }
        let inside: u64 = (0..self.bins()).filter(|&b| keep(self.bin_center(b))).map(|b| self.counts[b]).sum();
        inside as f64 / self.pair_count as f64
    }

    pub fn mass_within(&self, target: f64, epsilon: f64) -> f64 {
        self.mass_where(|c| (c - target).abs() <= epsilon)
    }

    pub fn mass_abs_above(&self, threshold: f64) -> f64 {
        self.mass_where(|c| c.abs() > threshold)
    }

    /// Centre of the modal bin of `|R|`, folding the histogram about zero.
    pub fn modal_abs_overlap(&self) -> f64 {
        let bins = self.bins();
        let mut folded = vec![0u64; bins.div_ceil(2)];
        for (b, &c) in self.counts.iter().enumerate() {
            let mirror = bins - 1 - b;
            folded[(b.max(mirror)) - bins / 2] += c;
        }
        let best = folded.iter().enumerate().fold(0, |best, (i, &c)| if c > folded[best] { i } else { best });
        self.bin_center(bins / 2 + best).abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeOptions {
    /// Number of replicas, at least two.
    pub k: usize,
    /// Rung of the tempering ladder that is probed.
    pub beta_index: usize,
    pub burn_in: usize,
    pub sweeps: usize,
    pub bins: usize,
    /// Overlap whose neighbourhood mass is reported.
    pub target: Option<f64>,
    pub epsilon: f64,
    /// Explicit per-replica seeds; derived from the tempering seed otherwise.
    pub replica_seeds: Option<Vec<u64>>,
}

impl ProbeOptions {
    pub fn new(k: usize, beta_index: usize, sweeps: usize) -> Self {
        Self { k, beta_index, burn_in: sweeps / 2, sweeps, bins: 40, target: None, epsilon: 0.15, replica_seeds: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub beta: f64,
    pub histogram: OverlapHistogram,
    pub modal_overlap: f64,
    pub modal_abs_overlap: f64,
    pub mean_abs_overlap: f64,
    pub target: Option<f64>,
    pub mass_near_target: Option<f64>,
    /// Every recorded overlap equals one: the replicas are copies of each other.
    pub degenerate: bool,
    /// Some rung froze, swaps stalled, or replicas disagree on the mean energy.
    pub unequilibrated: bool,
    /// Tempering statistics of each replica.
    pub replica_statistics: Vec<Vec<RungStatistics>>,
}

/// SplitMix64 finaliser, used to derive replica seeds from one base seed.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn replica_seed(base: u64, replica: usize) -> u64 {
    mix(base ^ mix(replica as u64 + 1))
}

fn run_replica(
    disorder: &Arc<DisorderTensor>,
    config: &TemperingConfig,
    seed: u64,
    opts: &ProbeOptions,
) -> Result<(Vec<SpinConfiguration>, Vec<RungStatistics>)> {
    let cfg = TemperingConfig { seed, ..config.clone() };
    let mut ensemble = TemperingEnsemble::new(disorder.clone(), &cfg)?;
    ensemble.burn_in(opts.burn_in);
    let mut trajectory = Vec::with_capacity(opts.sweeps);
    for _ in 0..opts.sweeps {
        ensemble.tempering_sweep(1)?;
        trajectory.push(ensemble.configuration(opts.beta_index).clone());
    }
    Ok((trajectory, ensemble.statistics()))
}

pub fn overlap_probe(
    disorder: Arc<DisorderTensor>,
    config: &TemperingConfig,
    opts: &ProbeOptions,
) -> Result<ProbeReport> {
    if opts.k < 2 {
        return Err(invalid("k", format!("need at least two replicas, got {}", opts.k)));
    }
    if opts.beta_index >= config.ladder.len() {
        return Err(invalid("beta_index", format!("{} outside the ladder", opts.beta_index)));
    }
    if opts.sweeps == 0 || opts.bins == 0 {
        return Err(invalid("sweeps", "sweeps and bins must be positive"));
    }
    let seeds = match &opts.replica_seeds {
        Some(s) if s.len() != opts.k => {
            return Err(invalid("replica_seeds", format!("{} seeds for {} replicas", s.len(), opts.k)))
        }
        Some(s) => s.clone(),
        None => (0..opts.k).map(|r| replica_seed(config.seed, r)).collect(),
    };
    let runs: Vec<_> = if config.parallel {
        seeds.par_iter().map(|&s| run_replica(&disorder, config, s, opts)).collect::<Result<_>>()?
    } else {
        seeds.iter().map(|&s| run_replica(&disorder, config, s, opts)).collect::<Result<_>>()?
    };

    let mut histogram = OverlapHistogram::new(opts.bins, opts.k);
    let mut abs_sum = 0.0;
    let mut degenerate = true;
    for t in 0..opts.sweeps {
        for i in 0..opts.k {
            for j in i + 1..opts.k {
                let r = runs[i].0[t].overlap(&runs[j].0[t]);
                degenerate &= r >= 1.0 - 1e-12;
                abs_sum += r.abs();
                histogram.record(r);
            }
        }
    }

    let replica_statistics: Vec<Vec<RungStatistics>> = runs.into_iter().map(|r| r.1).collect();
    let frozen = replica_statistics.iter().flatten().any(|s| {
        (s.beta > 0.0 && s.acceptance_rate < MIN_ACCEPTANCE) || s.swap_rate.is_some_and(|w| w < MIN_ACCEPTANCE)
    });
    let at_rung: Vec<&RungStatistics> = replica_statistics.iter().map(|s| &s[opts.beta_index]).collect();
    let disagree = at_rung.iter().enumerate().any(|(i, a)| {
        at_rung[i + 1..].iter().any(|b| {
            let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
            (a.mean_energy_per_spin - b.mean_energy_per_spin).abs() > 4.0 * se
        })
    });

    let modal = histogram.modal_bin();
    Ok(ProbeReport {
        beta: config.ladder[opts.beta_index],
        modal_overlap: histogram.bin_center(modal),
        modal_abs_overlap: histogram.modal_abs_overlap(),
        mean_abs_overlap: abs_sum / histogram.pair_count as f64,
        target: opts.target,
        mass_near_target: opts.target.map(|t| histogram.mass_within(t, opts.epsilon)),
        degenerate,
        unequilibrated: frozen || disagree,
        replica_statistics,
        histogram,
    })
}
