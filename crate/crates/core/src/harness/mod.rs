//! Seeded multi-trial experiments.
//!
//! Trial `t` of a run seeded with `s` draws from ChaCha8 stream `t` of seed
//! `s`, so trials are independent of each other and of execution order.

mod csv_out;
mod svg;

pub use csv_out::{emit_csv, format_float, write_csv, CsvRow};
pub use svg::{emit_svg, render_svg, Series};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mwu::episode::{run_episode, AdversaryPolicy, EpisodeResult, HiddenPolicy};
use crate::mwu::{default_eta, MwuParams};
use crate::solver::SolverConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdversaryKind {
    #[default]
    None,
    NonAdaptive,
    Adaptive,
}

impl AdversaryKind {
    pub fn name(self) -> &'static str {
        match self {
            AdversaryKind::None => "none",
            AdversaryKind::NonAdaptive => "nonadaptive",
            AdversaryKind::Adaptive => "adaptive",
        }
    }
}

impl std::str::FromStr for AdversaryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(AdversaryKind::None),
            "nonadaptive" => Ok(AdversaryKind::NonAdaptive),
            "adaptive" => Ok(AdversaryKind::Adaptive),
            other => Err(Error::InvalidConfig(format!("unknown adversary {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaSetting {
    /// `sqrt(log(n) / n)` in the given base, clamped to 0.49.
    Auto { log_base: f64 },
    Fixed(f64),
}

impl Default for EtaSetting {
    fn default() -> Self {
        EtaSetting::Auto {
            log_base: std::f64::consts::E,
        }
    }
}

/// Adaptive runs above this many experts need `allow_large_adaptive`.
pub const ADAPTIVE_N_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub tau_fraction: f64,
    /// Absolute corruption budget, overriding `tau_fraction`.
    pub tau: Option<usize>,
    pub eta: EtaSetting,
    pub adversary: AdversaryKind,
    pub trials: usize,
    pub seed: u64,
    pub max_rounds: usize,
    pub hidden: HiddenPolicy,
    pub solver: SolverConfig,
    pub enum_budget: u64,
    pub allow_large_adaptive: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n: 100,
            tau_fraction: 0.1,
            tau: None,
            eta: EtaSetting::default(),
            adversary: AdversaryKind::None,
            trials: 20,
            seed: 0,
            max_rounds: MwuParams::DEFAULT_MAX_ROUNDS,
            hidden: HiddenPolicy::Uniform,
            solver: SolverConfig::default(),
            enum_budget: AdversaryPolicy::DEFAULT_ENUM_BUDGET,
            allow_large_adaptive: false,
        }
    }
}

impl SimConfig {
    pub fn new(n: usize, adversary: AdversaryKind) -> Self {
        SimConfig {
            n,
            adversary,
            ..SimConfig::default()
        }
    }

    /// Corruption budget: 0 without an adversary, else the override or
    /// `round(tau_fraction * n)`.
    pub fn tau(&self) -> usize {
        match self.adversary {
            AdversaryKind::None => 0,
            _ => self
                .tau
                .unwrap_or_else(|| (self.tau_fraction * self.n as f64).round() as usize),
        }
    }

    pub fn params(&self) -> Result<MwuParams> {
        let eta = match self.eta {
            EtaSetting::Auto { log_base } => default_eta(self.n, log_base)?,
            EtaSetting::Fixed(eta) => eta,
        };
        MwuParams::new(self.n, eta, self.max_rounds)
    }

    pub fn policy(&self) -> AdversaryPolicy {
        match self.adversary {
            AdversaryKind::None => AdversaryPolicy::None,
            AdversaryKind::NonAdaptive => AdversaryPolicy::NonAdaptive { tau: self.tau() },
            AdversaryKind::Adaptive => AdversaryPolicy::Adaptive {
                tau: self.tau(),
                budget: self.enum_budget,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.tau_fraction) {
            return Err(Error::InvalidConfig(format!(
                "tau fraction {} outside [0, 1)",
                self.tau_fraction
            )));
        }
        if self.tau() >= self.n {
            return Err(Error::InvalidConfig(format!(
                "tau = {} must be below n = {}",
                self.tau(),
                self.n
            )));
        }
        if self.adversary == AdversaryKind::Adaptive && self.n > ADAPTIVE_N_CAP && !self.allow_large_adaptive {
            return Err(Error::InvalidConfig(format!(
                "adaptive runs are capped at n <= {ADAPTIVE_N_CAP}; n = {} needs the override",
                self.n
            )));
        }
        if self.enum_budget == 0 {
            return Err(Error::InvalidConfig("enumeration budget must be positive".into()));
        }
        if let Some(r) = self.solver.resolution {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::InvalidResolution(r));
            }
        }
        Ok(())
    }
}

/// The RNG for trial `trial_id` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial_id);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub n: usize,
    pub tau: usize,
    pub adversary: AdversaryKind,
    pub rounds: usize,
    /// Rounds before the first success.
    pub failed_rounds: usize,
    pub truncated: bool,
    pub final_corrupted_weight: f64,
    pub seed_used: u64,
}

/// Runs one trial and keeps its full episode.
pub fn run_trial_episode(config: &SimConfig, trial_id: u64) -> Result<EpisodeResult> {
    config.validate()?;
    let params = config.params()?;
    let mut adversary = config.policy().build(config.n, config.solver)?;
    let mut rng = trial_rng(config.seed, trial_id);
    run_episode(&params, config.hidden, adversary.as_mut(), &mut rng)
}

pub fn run_trial(config: &SimConfig, trial_id: u64) -> Result<TrialRecord> {
    let ep = run_trial_episode(config, trial_id)?;
    Ok(TrialRecord {
        trial_id,
        n: config.n,
        tau: config.tau(),
        adversary: config.adversary,
        rounds: ep.rounds,
        failed_rounds: ep.failed_rounds(),
        truncated: ep.truncated,
        final_corrupted_weight: ep.final_corrupted_weight(),
        seed_used: config.seed,
    })
}

/// Outcome of every trial of one configuration, in trial order.
pub fn run_trials(config: &SimConfig) -> Result<Vec<Result<TrialRecord>>> {
    config.validate()?;
    Ok((0..config.trials as u64).map(|t| run_trial(config, t)).collect())
}

/// Mean and sample standard deviation (0 for fewer than two values).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub tau: usize,
    pub adversary: AdversaryKind,
    pub trials: usize,
    pub mean_rounds: f64,
    pub std_rounds: f64,
    pub mean_failed_rounds: f64,
    pub errored_trials: usize,
    /// Error messages of errored trials, by trial id.
    pub errors: Vec<(u64, String)>,
    pub budget_exceeded: bool,
    pub seed: u64,
}

pub fn aggregate(config: &SimConfig, outcomes: &[Result<TrialRecord>]) -> SweepRow {
    let done: Vec<&TrialRecord> = outcomes.iter().filter_map(|o| o.as_ref().ok()).collect();
    let rounds: Vec<f64> = done.iter().map(|r| r.rounds as f64).collect();
    let failed: Vec<f64> = done.iter().map(|r| r.failed_rounds as f64).collect();
    let (mean_rounds, std_rounds) = mean_std(&rounds);
    let errors: Vec<(u64, String)> = outcomes
        .iter()
        .enumerate()
        .filter_map(|(t, o)| o.as_ref().err().map(|e| (t as u64, e.to_string())))
        .collect();
    SweepRow {
        n: config.n,
        tau: config.tau(),
        adversary: config.adversary,
        trials: outcomes.len(),
        mean_rounds,
        std_rounds,
        mean_failed_rounds: mean_std(&failed).0,
        errored_trials: errors.len(),
        budget_exceeded: outcomes.iter().any(|o| matches!(o, Err(e) if e.is_budget())),
        errors,
        seed: config.seed,
    }
}

/// One row per configuration. All configurations must share the adversary
/// kind and trial count.
pub fn run_sweep(configs: &[SimConfig]) -> Result<Vec<SweepRow>> {
    if let Some(first) = configs.first() {
        if configs
            .iter()
            .any(|c| c.adversary != first.adversary || c.trials != first.trials)
        {
            return Err(Error::InvalidConfig(
                "sweep configurations must share adversary and trial count".into(),
            ));
        }
    }
    configs
        .iter()
        .map(|c| Ok(aggregate(c, &run_trials(c)?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub round: usize,
    pub mean_corrupted_weight: f64,
    pub mean_good_weight: f64,
    pub contributing_trials: usize,
}

/// Per-round means over the trials still running at that round.
pub fn trajectory_from(episodes: &[EpisodeResult]) -> Vec<TrajectoryRow> {
    let longest = episodes.iter().map(|e| e.trace.len()).max().unwrap_or(0);
    (0..longest)
        .map(|r| {
            let live: Vec<_> = episodes.iter().filter_map(|e| e.trace.get(r)).collect();
            let k = live.len() as f64;
            TrajectoryRow {
                round: r + 1,
                mean_corrupted_weight: live.iter().map(|x| x.corrupted_weight).sum::<f64>() / k,
                mean_good_weight: live.iter().map(|x| x.good_weight).sum::<f64>() / k,
                contributing_trials: live.len(),
            }
        })
        .collect()
}

/// Corrupted and good weight over the rounds for the non-adaptive adversary.
pub fn run_trajectory(config: &SimConfig) -> Result<Vec<TrajectoryRow>> {
    if config.adversary != AdversaryKind::NonAdaptive {
        return Err(Error::InvalidConfig(
            "trajectories are defined for the non-adaptive adversary".into(),
        ));
    }
    config.validate()?;
    let episodes = (0..config.trials as u64)
        .map(|t| run_trial_episode(config, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(trajectory_from(&episodes))
}

impl CsvRow for TrialRecord {
    const HEADER: &'static [&'static str] = &[
        "trial_id",
        "n",
        "tau",
        "adversary",
        "rounds",
        "truncated",
        "final_corrupted_weight",
        "seed_used",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.trial_id.to_string(),
            self.n.to_string(),
            self.tau.to_string(),
            self.adversary.name().to_string(),
            self.rounds.to_string(),
            self.truncated.to_string(),
            format_float(self.final_corrupted_weight),
            self.seed_used.to_string(),
        ]
    }
}

impl CsvRow for SweepRow {
    const HEADER: &'static [&'static str] = &[
        "n",
        "tau",
        "adversary",
        "trials",
        "mean_rounds",
        "std_rounds",
        "errored_trials",
        "seed",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.tau.to_string(),
            self.adversary.name().to_string(),
            self.trials.to_string(),
            format_float(self.mean_rounds),
            format_float(self.std_rounds),
            self.errored_trials.to_string(),
            self.seed.to_string(),
        ]
    }
}

impl CsvRow for TrajectoryRow {
    const HEADER: &'static [&'static str] = &[
        "round",
        "mean_corrupted_weight",
        "mean_good_weight",
        "contributing_trials",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.round.to_string(),
            format_float(self.mean_corrupted_weight),
            format_float(self.mean_good_weight),
            self.contributing_trials.to_string(),
        ]
    }
}
