//! One function per subcommand, each producing a result table.

use std::sync::Arc;

use pspin::critical::{residuals_prop, solve_critical_with_tol};
use pspin::free_energy::{sweep, TapModel};
use pspin::simulator::{
    covariance_check, gradient_check, ground_state_search, overlap_probe, pair_with_overlap, run_thermo, thermo_ladder,
    DisorderTensor, GroundStateOptions, ProbeOptions, TemperingConfig, ThermoOptions,
};
use serde_json::json;

use crate::config::{insert_critical, CommandKind, RunConfig};
use crate::emit::{Table, Value};
use crate::error::CliError;

/// Overlaps of the fixed pairs used by `mc-verify`.
pub const COVARIANCE_OVERLAPS: [f64; 3] = [0.0, 0.5, 1.0];
/// `|z|` above which a covariance row fails.
pub const MAX_Z: f64 = 4.0;

pub fn execute(cfg: &RunConfig) -> Result<Table, CliError> {
    match cfg.command {
        CommandKind::Critical => critical(cfg),
        CommandKind::Sweep => sweep_table(cfg),
        CommandKind::Gstate => gstate(cfg),
        CommandKind::McVerify => mc_verify(cfg),
        CommandKind::Thermo => thermo(cfg),
        CommandKind::Probe => probe(cfg),
    }
}

fn critical(cfg: &RunConfig) -> Result<Table, CliError> {
    let cp = solve_critical_with_tol(cfg.p, cfg.tolerance("qc", 1e-12))?;
    let r = residuals_prop(cfg.p, cp.beta_c, cp.q_c, cp.e_star)?;
    let mut t = Table::new(vec!["p", "q_c", "beta_c", "e_star", "e_inf", "r_I", "r_IIa", "r_IIb"]);
    t.push(vec![
        cfg.p.into(),
        cp.q_c.into(),
        cp.beta_c.into(),
        cp.e_star.into(),
        cp.e_inf.into(),
        r.r_i.into(),
        r.r_iia.into(),
        r.r_iib.into(),
    ]);
    Ok(t)
}

fn sweep_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let model = TapModel::new(cfg.p)?;
    let mut grid = cfg.beta_grid.clone();
    insert_critical(&mut grid, model.beta_c());
    let rows = sweep(cfg.p, &grid)?;
    let mut t = Table::new(vec!["beta", "q_beta", "t_minus", "F", "branch"]);
    for s in rows {
        t.push(vec![s.beta.into(), s.q_beta.into(), s.t_minus.into(), s.free_energy.into(), s.branch.as_str().into()]);
    }
    t.summary = Some(json!({ "beta_c": model.beta_c(), "e_star": model.critical.e_star }));
    Ok(t)
}

/// Loads the disorder file when it exists, otherwise samples from the seed
/// and writes the file if one was named.
fn disorder(cfg: &RunConfig) -> Result<DisorderTensor, CliError> {
    let n = cfg.n.expect("sampling commands resolve n");
    match &cfg.disorder_file {
        Some(path) if path.exists() => {
            let j = DisorderTensor::load(path)?;
            if j.n() != n || j.p() != cfg.p {
                return Err(CliError::usage(
                    "disorder-file",
                    format!(
                        "{} holds N = {}, p = {} but the run asks for N = {n}, p = {}",
                        path.display(),
                        j.n(),
                        j.p(),
                        cfg.p
                    ),
                ));
            }
            Ok(j)
        }
        Some(path) => {
            let j = DisorderTensor::sample(n, cfg.p, cfg.seed)?;
            j.save(path)?;
            Ok(j)
        }
        None => Ok(DisorderTensor::sample(n, cfg.p, cfg.seed)?),
    }
}

fn gstate(cfg: &RunConfig) -> Result<Table, CliError> {
    let j = disorder(cfg)?;
    let opts = GroundStateOptions {
        restarts: cfg.restarts.expect("resolved"),
        max_iters: cfg.max_iters.expect("resolved"),
        tol: cfg.tolerance("grad", GroundStateOptions::default().tol),
        seed: cfg.seed,
        parallel: cfg.parallel,
    };
    let g = ground_state_search(&j, &opts)?;
    let mut t = Table::new(vec!["restart", "energy_per_spin", "iterations", "converged"]);
    for r in &g.restarts {
        t.push(vec![r.restart.into(), r.energy_per_spin.into(), r.iterations.into(), r.converged.into()]);
    }
    t.push(vec!["best".into(), g.energy_per_spin.into(), Value::Empty, g.converged.into()]);
    let e_star = TapModel::new(cfg.p)?.critical.e_star;
    t.summary = Some(json!({ "best_energy_per_spin": g.energy_per_spin, "e_star": e_star, "converged": g.converged }));
    Ok(t)
}

fn mc_verify(cfg: &RunConfig) -> Result<Table, CliError> {
    let n = cfg.n.expect("resolved");
    let pairs = COVARIANCE_OVERLAPS.iter().map(|&r| pair_with_overlap(n, r)).collect::<pspin::Result<Vec<_>>>()?;
    let rows = covariance_check(n, cfg.p, &pairs, cfg.draws.expect("resolved"), cfg.seed)?;
    let mut t =
        Table::new(vec!["check", "n", "p", "overlap", "target", "estimate", "stderr", "z", "rel_error", "pass"]);
    for r in rows {
        t.push(vec![
            "covariance".into(),
            n.into(),
            cfg.p.into(),
            r.overlap.into(),
            r.target.into(),
            r.mean.into(),
            r.stderr.into(),
            r.z.into(),
            Value::Empty,
            (r.z.abs() <= MAX_Z).into(),
        ]);
    }
    let step = cfg.tolerance("fd_step", 1e-5);
    let limit = cfg.tolerance("gradient", 1e-6);
    for i in 0..cfg.instances.expect("resolved") {
        let g = gradient_check(n, cfg.p, cfg.seed.wrapping_add(i as u64), step)?;
        t.push(vec![
            "gradient".into(),
            n.into(),
            cfg.p.into(),
            Value::Empty,
            Value::Empty,
            Value::Empty,
            Value::Empty,
            Value::Empty,
            g.rel_error.into(),
            (g.rel_error <= limit).into(),
        ]);
    }
    Ok(t)
}

fn tempering(cfg: &RunConfig, ladder: Vec<f64>) -> TemperingConfig {
    TemperingConfig { parallel: cfg.parallel, ..TemperingConfig::new(ladder, cfg.seed) }
}

fn thermo(cfg: &RunConfig) -> Result<Table, CliError> {
    let model = TapModel::new(cfg.p)?;
    let mut ladder = cfg.beta_grid.clone();
    insert_critical(&mut ladder, model.beta_c());
    let j = Arc::new(disorder(cfg)?);
    let opts = ThermoOptions {
        tempering: tempering(cfg, ladder),
        burn_in: cfg.burn_in.expect("resolved"),
        sweeps: cfg.sweeps.expect("resolved"),
    };
    let run = run_thermo(j, &opts)?;
    let mut t =
        Table::new(vec!["beta", "F_N", "stderr", "F_theory", "mean_energy", "acceptance", "swap_rate", "flagged"]);
    for (pt, rung) in run.points.iter().zip(&run.rungs) {
        let theory = model.solution(pt.beta)?.free_energy;
        t.push(vec![
            pt.beta.into(),
            pt.free_energy.into(),
            pt.stderr.into(),
            theory.into(),
            pt.mean_energy_per_spin.into(),
            pt.acceptance_rate.into(),
            rung.swap_rate.into(),
            pt.unequilibrated.into(),
        ]);
    }
    t.summary = Some(json!({
        "beta_c": model.beta_c(),
        "flagged_rungs": run.points.iter().filter(|p| p.unequilibrated).count(),
    }));
    Ok(t)
}

fn probe(cfg: &RunConfig) -> Result<Table, CliError> {
    let model = TapModel::new(cfg.p)?;
    let beta = cfg.beta_grid.first().copied().unwrap_or(2.0 * model.beta_c());
    let rungs = cfg.rungs.expect("resolved");
    let ladder = thermo_ladder(beta, rungs, None)?;
    let q_beta = if beta > model.beta_c() { model.q_beta(beta)? } else { 0.0 };
    let j = Arc::new(disorder(cfg)?);
    let opts = ProbeOptions {
        k: cfg.k.expect("resolved"),
        beta_index: ladder.len() - 1,
        burn_in: cfg.burn_in.expect("resolved"),
        sweeps: cfg.sweeps.expect("resolved"),
        bins: cfg.bins.expect("resolved"),
        target: Some(q_beta),
        epsilon: cfg.epsilon.expect("resolved"),
        replica_seeds: None,
    };
    let report = overlap_probe(j, &tempering(cfg, ladder), &opts)?;
    let h = &report.histogram;
    let mut t = Table::new(vec!["bin_lo", "bin_hi", "count", "fraction"]);
    for (b, &c) in h.counts.iter().enumerate() {
        let fraction = c as f64 / h.pair_count as f64;
        t.push(vec![h.bin_edges[b].into(), h.bin_edges[b + 1].into(), Value::Int(c as i64), fraction.into()]);
    }
    let replicas: Vec<_> = report
        .replica_statistics
        .iter()
        .map(|stats| {
            let at = &stats[opts.beta_index];
            let min_swap = stats.iter().filter_map(|s| s.swap_rate).fold(f64::INFINITY, f64::min);
            json!({
                "mean_energy_per_spin": at.mean_energy_per_spin,
                "stderr": at.stderr,
                "acceptance": at.acceptance_rate,
                "min_acceptance": stats.iter().map(|s| s.acceptance_rate).fold(f64::INFINITY, f64::min),
                "min_swap_rate": if min_swap.is_finite() { Some(min_swap) } else { None },
            })
        })
        .collect();
    t.summary = Some(json!({
        "beta": report.beta,
        "beta_c": model.beta_c(),
        "q_beta": q_beta,
        "epsilon": opts.epsilon,
        "modal_overlap": report.modal_overlap,
        "modal_abs_overlap": report.modal_abs_overlap,
        "mean_abs_overlap": report.mean_abs_overlap,
        "mass_near_q_beta": report.mass_near_target,
        "modal_abs_within_epsilon": (report.modal_abs_overlap - q_beta).abs() <= opts.epsilon,
        "pair_count": h.pair_count,
        "degenerate": report.degenerate,
        "unequilibrated": report.unequilibrated,
        "replicas": replicas,
    }));
    Ok(t)
}
