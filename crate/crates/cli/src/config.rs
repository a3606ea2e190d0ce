//! Command-line flags, TOML config files and the resolved run configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Environment variable consulted for the seed when neither a flag nor the
/// config file sets one.
pub const SEED_ENV: &str = "PSPIN_SEED";

#[derive(Debug, Parser)]
#[command(name = "pspin", version, about = "Thermodynamics of spherical pure p-spin glasses")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Critical overlap, critical inverse temperature and ground-state energy.
    Critical(CriticalArgs),
    /// Free energy and overlap on a grid of inverse temperatures.
    Sweep(SweepArgs),
    /// Ground-state search on sampled disorder.
    Gstate(GstateArgs),
    /// Monte Carlo check of the covariance and finite-difference check of the gradient.
    #[command(name = "mc-verify")]
    McVerify(McVerifyArgs),
    /// Overlap histogram of independent replicas at one inverse temperature.
    Probe(ProbeArgs),
    /// Finite-N free energy by thermodynamic integration.
    Thermo(ThermoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Critical,
    Sweep,
    Gstate,
    McVerify,
    Probe,
    Thermo,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Critical => "critical",
            CommandKind::Sweep => "sweep",
            CommandKind::Gstate => "gstate",
            CommandKind::McVerify => "mc-verify",
            CommandKind::Probe => "probe",
            CommandKind::Thermo => "thermo",
        }
    }

    /// Keys accepted by `--tol`.
    fn tolerance_keys(self) -> &'static [&'static str] {
        match self {
            CommandKind::Critical => &["qc"],
            CommandKind::Gstate => &["grad"],
            CommandKind::McVerify => &["fd_step", "gradient"],
            CommandKind::Sweep | CommandKind::Probe | CommandKind::Thermo => &[],
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML file supplying values for any flag; flags on the command line win
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Base seed of every random stream [default: $PSPIN_SEED, else 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; standard output when omitted
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// Output format [default: csv]
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Tolerance override KEY=VALUE, repeatable (critical: qc; gstate: grad; mc-verify: fd_step, gradient)
    #[arg(long = "tol", value_name = "KEY=VALUE")]
    pub tol: Vec<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct DegreeArg {
    /// Interaction degree p, from 2 to 64 [default: 3]
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..=64))]
    pub p: Option<u32>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SampleArgs {
    /// Number of spins N [default: gstate 64, thermo 32, probe 48]
    #[arg(long)]
    pub n: Option<usize>,
    /// Binary disorder file; read when it exists, written otherwise
    #[arg(long, value_name = "FILE")]
    pub disorder_file: Option<PathBuf>,
    /// Advance chains or restarts on several threads (results are unchanged)
    #[arg(long)]
    pub parallel: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ChainArgs {
    /// Measurement sweeps
    #[arg(long)]
    pub sweeps: Option<usize>,
    /// Burn-in sweeps during which proposal scales adapt [default: sweeps / 4]
    #[arg(long)]
    pub burn_in: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct CriticalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub degree: DegreeArg,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub degree: DegreeArg,
    /// Inverse temperatures, MIN:MAX:STEP with both ends included or a comma list [default: 0:5:0.01]
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct GstateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub degree: DegreeArg,
    #[command(flatten)]
    pub sample: SampleArgs,
    /// Random restarts [default: 10]
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Iteration cap per restart [default: 20000]
    #[arg(long)]
    pub max_iters: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct McVerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub degree: DegreeArg,
    /// Number of spins N [default: 16]
    #[arg(long)]
    pub n: Option<usize>,
    /// Disorder draws for the covariance check, at least 1000 [default: 100000]
    #[arg(long)]
    pub draws: Option<usize>,
    /// Random instances for the gradient check [default: 20]
    #[arg(long)]
    pub instances: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ThermoArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub degree: DegreeArg,
    #[command(flatten)]
    pub sample: SampleArgs,
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Tempering ladder, same syntax as for sweep; 0 is prepended when missing [default: 0:1:0.05]
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ProbeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub degree: DegreeArg,
    #[command(flatten)]
    pub sample: SampleArgs,
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Probed inverse temperature [default: twice the critical value]
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    /// Rungs of the tempering ladder from 0 to beta [default: 16]
    #[arg(long)]
    pub rungs: Option<usize>,
    /// Independent replicas [default: 4]
    #[arg(long)]
    pub k: Option<usize>,
    /// Histogram bins on [-1, 1] [default: 40]
    #[arg(long)]
    pub bins: Option<usize>,
    /// Half-width of the window around the predicted overlap [default: 0.15]
    #[arg(long)]
    pub epsilon: Option<f64>,
}

/// Either a grid spec or an explicit list in a config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum BetaValue {
    Text(String),
    Number(f64),
    List(Vec<f64>),
}

impl BetaValue {
    fn into_spec(self) -> String {
        match self {
            BetaValue::Text(s) => s,
            BetaValue::Number(x) => x.to_string(),
            BetaValue::List(v) => v.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
        }
    }
}

/// Contents of a `--config` file. Every key is optional and mirrors a flag.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub p: Option<u32>,
    pub beta: Option<BetaValue>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<BTreeMap<String, f64>>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub disorder_file: Option<PathBuf>,
    pub parallel: Option<bool>,
    pub restarts: Option<usize>,
    pub max_iters: Option<usize>,
    pub sweeps: Option<usize>,
    pub burn_in: Option<usize>,
    pub draws: Option<usize>,
    pub instances: Option<usize>,
    pub rungs: Option<usize>,
    pub k: Option<usize>,
    pub bins: Option<usize>,
    pub epsilon: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage("config", format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::usage("config", format!("{}: {}", path.display(), e.message())))
    }
}

/// Fully resolved configuration. Serialised into every output file so that a
/// run can be repeated from its header alone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub p: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<String>,
    #[serde(skip)]
    pub beta_grid: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub seed: u64,
    pub tol: BTreeMap<String, f64>,
    #[serde(skip)]
    pub output: Option<PathBuf>,
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disorder_file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweeps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub draws: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instances: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rungs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip)]
    pub parallel: bool,
}

impl RunConfig {
    pub fn tolerance(&self, key: &str, default: f64) -> f64 {
        self.tol.get(key).copied().unwrap_or(default)
    }

    /// Merges the command line with the optional config file and fills defaults.
    pub fn resolve(command: Command) -> Result<Self, CliError> {
        let (kind, common, flags) = flags_of(command);
        let file = match &common.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let pick = |flag: Option<usize>, from_file: Option<usize>| flag.or(from_file);

        let p = flags.p.or(file.p).unwrap_or(3);
        if !(2..=64).contains(&p) {
            return Err(CliError::usage("p", format!("{p} is not in 2..=64")));
        }
        let seed = match common.seed.or(file.seed) {
            Some(s) => s,
            None => match std::env::var(SEED_ENV) {
                Ok(v) => v
                    .trim()
                    .parse()
                    .map_err(|_| CliError::usage("seed", format!("{SEED_ENV}={v} is not an unsigned integer")))?,
                Err(_) => 0,
            },
        };
        let tol = resolve_tolerances(kind, file.tol.clone().unwrap_or_default(), &common.tol)?;
        let mut cfg = RunConfig {
            command: kind,
            p,
            beta: None,
            beta_grid: Vec::new(),
            n: None,
            seed,
            tol,
            output: common.output.clone().or(file.output.clone()),
            format: common.format.or(file.format).unwrap_or(Format::Csv),
            disorder_file: None,
            restarts: None,
            max_iters: None,
            sweeps: None,
            burn_in: None,
            draws: None,
            instances: None,
            rungs: None,
            k: None,
            bins: None,
            epsilon: None,
            parallel: flags.parallel || file.parallel.unwrap_or(false),
        };
        let beta = flags.beta.clone().or(file.beta.clone().map(BetaValue::into_spec));
        let samples = matches!(kind, CommandKind::Gstate | CommandKind::Probe | CommandKind::Thermo);
        if samples {
            cfg.disorder_file = flags.disorder_file.clone().or(file.disorder_file.clone());
        }
        match kind {
            CommandKind::Critical => {}
            CommandKind::Sweep => {
                let spec = beta.unwrap_or_else(|| "0:5:0.01".into());
                cfg.beta_grid = parse_beta_grid(&spec).map_err(|m| CliError::usage("beta", m))?;
                cfg.beta = Some(spec);
            }
            CommandKind::Gstate => {
                cfg.n = Some(positive("n", pick(flags.n, file.n).unwrap_or(64), 2)?);
                cfg.restarts = Some(positive("restarts", pick(flags.restarts, file.restarts).unwrap_or(10), 1)?);
                cfg.max_iters =
                    Some(positive("max-iters", pick(flags.max_iters, file.max_iters).unwrap_or(20_000), 1)?);
            }
            CommandKind::McVerify => {
                cfg.n = Some(positive("n", pick(flags.n, file.n).unwrap_or(16), 2)?);
                cfg.draws = Some(positive("draws", pick(flags.draws, file.draws).unwrap_or(100_000), 1000)?);
                cfg.instances = Some(positive("instances", pick(flags.instances, file.instances).unwrap_or(20), 1)?);
            }
            CommandKind::Thermo => {
                cfg.n = Some(positive("n", pick(flags.n, file.n).unwrap_or(32), 2)?);
                let spec = beta.unwrap_or_else(|| "0:1:0.05".into());
                let mut grid = parse_beta_grid(&spec).map_err(|m| CliError::usage("beta", m))?;
                if grid[0] != 0.0 {
                    grid.insert(0, 0.0);
                }
                if grid.len() < 2 {
                    return Err(CliError::usage("beta", "the ladder needs a rung above 0"));
                }
                cfg.beta_grid = grid;
                cfg.beta = Some(spec);
                resolve_chain(&mut cfg, &flags, &file, 4000)?;
            }
            CommandKind::Probe => {
                cfg.n = Some(positive("n", pick(flags.n, file.n).unwrap_or(48), 2)?);
                if let Some(spec) = beta {
                    let grid = parse_beta_grid(&spec).map_err(|m| CliError::usage("beta", m))?;
                    if grid.len() != 1 || grid[0] <= 0.0 {
                        return Err(CliError::usage("beta", format!("expected one positive value, got `{spec}`")));
                    }
                    cfg.beta_grid = grid;
                    cfg.beta = Some(spec);
                }
                cfg.rungs = Some(positive("rungs", pick(flags.rungs, file.rungs).unwrap_or(16), 2)?);
                cfg.k = Some(positive("k", pick(flags.k, file.k).unwrap_or(4), 2)?);
                cfg.bins = Some(positive("bins", pick(flags.bins, file.bins).unwrap_or(40), 2)?);
                let eps = flags.epsilon.or(file.epsilon).unwrap_or(0.15);
                if !(eps > 0.0 && eps.is_finite()) {
                    return Err(CliError::usage("epsilon", format!("{eps} is not positive")));
                }
                cfg.epsilon = Some(eps);
                resolve_chain(&mut cfg, &flags, &file, 2000)?;
            }
        }
        Ok(cfg)
    }
}

fn resolve_chain(cfg: &mut RunConfig, flags: &Flags, file: &FileConfig, default_sweeps: usize) -> Result<(), CliError> {
    let sweeps = positive("sweeps", flags.sweeps.or(file.sweeps).unwrap_or(default_sweeps), 2)?;
    cfg.sweeps = Some(sweeps);
    cfg.burn_in = Some(flags.burn_in.or(file.burn_in).unwrap_or(sweeps / 4));
    Ok(())
}

fn positive(flag: &str, value: usize, min: usize) -> Result<usize, CliError> {
    if value < min {
        return Err(CliError::usage(flag, format!("{value} is below the minimum {min}")));
    }
    Ok(value)
}

/// Flags that are merged with the config file, flattened across commands.
#[derive(Debug, Default)]
struct Flags {
    p: Option<u32>,
    beta: Option<String>,
    n: Option<usize>,
    disorder_file: Option<PathBuf>,
    parallel: bool,
    restarts: Option<usize>,
    max_iters: Option<usize>,
    sweeps: Option<usize>,
    burn_in: Option<usize>,
    draws: Option<usize>,
    instances: Option<usize>,
    rungs: Option<usize>,
    k: Option<usize>,
    bins: Option<usize>,
    epsilon: Option<f64>,
}

fn with_sample(flags: &mut Flags, s: SampleArgs) {
    flags.n = s.n;
    flags.disorder_file = s.disorder_file;
    flags.parallel = s.parallel;
}

fn flags_of(command: Command) -> (CommandKind, CommonArgs, Flags) {
    let mut f = Flags::default();
    match command {
        Command::Critical(a) => {
            f.p = a.degree.p;
            (CommandKind::Critical, a.common, f)
        }
        Command::Sweep(a) => {
            f.p = a.degree.p;
            f.beta = a.beta;
            (CommandKind::Sweep, a.common, f)
        }
        Command::Gstate(a) => {
            f.p = a.degree.p;
            with_sample(&mut f, a.sample);
            f.restarts = a.restarts;
            f.max_iters = a.max_iters;
            (CommandKind::Gstate, a.common, f)
        }
        Command::McVerify(a) => {
            f.p = a.degree.p;
            f.n = a.n;
            f.draws = a.draws;
            f.instances = a.instances;
            (CommandKind::McVerify, a.common, f)
        }
        Command::Thermo(a) => {
            f.p = a.degree.p;
            with_sample(&mut f, a.sample);
            f.beta = a.beta;
            f.sweeps = a.chain.sweeps;
            f.burn_in = a.chain.burn_in;
            (CommandKind::Thermo, a.common, f)
        }
        Command::Probe(a) => {
            f.p = a.degree.p;
            with_sample(&mut f, a.sample);
            f.beta = a.beta;
            f.sweeps = a.chain.sweeps;
            f.burn_in = a.chain.burn_in;
            f.rungs = a.rungs;
            f.k = a.k;
            f.bins = a.bins;
            f.epsilon = a.epsilon;
            (CommandKind::Probe, a.common, f)
        }
    }
}

fn resolve_tolerances(
    kind: CommandKind,
    mut tol: BTreeMap<String, f64>,
    flags: &[String],
) -> Result<BTreeMap<String, f64>, CliError> {
    for item in flags {
        let (key, value) =
            item.split_once('=').ok_or_else(|| CliError::usage("tol", format!("`{item}` is not KEY=VALUE")))?;
        let value: f64 =
            value.trim().parse().map_err(|_| CliError::usage("tol", format!("`{value}` is not a number")))?;
        tol.insert(key.trim().to_string(), value);
    }
    let allowed = kind.tolerance_keys();
    for (key, &value) in &tol {
        if !allowed.contains(&key.as_str()) {
            let known = if allowed.is_empty() { "none".to_string() } else { allowed.join(", ") };
            return Err(CliError::usage("tol", format!("unknown key `{key}` for {} (known: {known})", kind.name())));
        }
        if !(value > 0.0 && value.is_finite()) {
            return Err(CliError::usage("tol", format!("{key} = {value} is not positive")));
        }
    }
    Ok(tol)
}

/// Parses `MIN:MAX:STEP` (both ends included) or a comma-separated list into
/// a strictly increasing grid of nonnegative values.
pub fn parse_beta_grid(spec: &str) -> Result<Vec<f64>, String> {
    let number = |s: &str| -> Result<f64, String> {
        let x: f64 = s.trim().parse().map_err(|_| format!("`{}` is not a number", s.trim()))?;
        if !x.is_finite() || x < 0.0 {
            return Err(format!("{x} is not a nonnegative number"));
        }
        Ok(x)
    };
    let grid = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [lo, hi, step] = parts.as_slice() else {
            return Err(format!("`{spec}` is not MIN:MAX:STEP"));
        };
        let (lo, hi, step) = (number(lo)?, number(hi)?, number(step)?);
        if hi < lo || step <= 0.0 {
            return Err(format!("`{spec}` needs MIN <= MAX and STEP > 0"));
        }
        let span = (hi - lo) / step;
        let count = (span + 1e-9).floor() as usize;
        if count > 10_000_000 {
            return Err(format!("`{spec}` has more than 10^7 points"));
        }
        let mut grid: Vec<f64> = (0..=count).map(|i| lo + i as f64 * step).collect();
        let last = grid.last_mut().expect("grid has at least one point");
        if (*last - hi).abs() <= 1e-9 * step {
            *last = hi;
        } else {
            grid.push(hi);
        }
        grid
    } else {
        spec.split(',').map(number).collect::<Result<Vec<_>, _>>()?
    };
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(format!("`{spec}` is not strictly increasing"));
    }
    Ok(grid)
}

/// Inserts `beta_c` into a grid whose interior contains it.
pub fn insert_critical(grid: &mut Vec<f64>, beta_c: f64) {
    let (Some(&lo), Some(&hi)) = (grid.first(), grid.last()) else {
        return;
    };
    if lo < beta_c && beta_c < hi && !grid.contains(&beta_c) {
        let at = grid.partition_point(|&b| b < beta_c);
        grid.insert(at, beta_c);
    }
}
