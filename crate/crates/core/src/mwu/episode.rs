//! The episode loop: rounds are played until the MWU output matches the
//! hidden direction or the round cap is reached.

use rand::Rng;

use super::{run_round, AdviceVector, Direction, MwuParams, WeightVector};
use crate::adaptive::{AdaptiveAdversary, SearchOutcome};
use crate::error::{Error, Result};
use crate::nonadaptive::NonAdaptiveAdversary;
use crate::solver::SolverConfig;

/// How the hidden direction of each round is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HiddenPolicy {
    #[default]
    Uniform,
    Fixed(Direction),
}

/// What an adversary did in one round.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdversaryAction {
    /// The adversary asserts the MWU will output the negated hidden direction.
    pub claimed_flip: bool,
    /// Experts captured this round; they stay corrupted.
    pub captured: Vec<usize>,
    /// Good experts whose advice was set for this round only.
    pub volatile: Vec<usize>,
    pub search: Option<SearchOutcome>,
}

pub trait Adversary {
    /// Overwrites the advice of every expert the adversary controls this
    /// round. `advice` arrives holding the good experts' sampled advice for
    /// all `n` positions.
    fn act(
        &mut self,
        weights: &WeightVector,
        hidden: Direction,
        advice: &mut AdviceVector,
        eta: f64,
    ) -> Result<AdversaryAction>;

    /// The persistent corrupted set, sorted.
    fn corrupted(&self) -> &[usize];
}

/// Leaves every expert honest.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoAdversary;

impl Adversary for NoAdversary {
    fn act(&mut self, _: &WeightVector, _: Direction, _: &mut AdviceVector, _: f64) -> Result<AdversaryAction> {
        Ok(AdversaryAction::default())
    }

    fn corrupted(&self) -> &[usize] {
        &[]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdversaryPolicy {
    #[default]
    None,
    /// Owns experts `0..tau` from the first round on.
    NonAdaptive { tau: usize },
    /// Captures up to `tau` experts over the episode; `budget` caps oracle
    /// calls per round.
    Adaptive { tau: usize, budget: u64 },
}

impl AdversaryPolicy {
    pub const DEFAULT_ENUM_BUDGET: u64 = 10_000_000;

    pub fn name(&self) -> &'static str {
        match self {
            AdversaryPolicy::None => "none",
            AdversaryPolicy::NonAdaptive { .. } => "nonadaptive",
            AdversaryPolicy::Adaptive { .. } => "adaptive",
        }
    }

    pub fn tau(&self) -> usize {
        match *self {
            AdversaryPolicy::None => 0,
            AdversaryPolicy::NonAdaptive { tau } | AdversaryPolicy::Adaptive { tau, .. } => tau,
        }
    }

    pub fn build(&self, n: usize, solver: SolverConfig) -> Result<Box<dyn Adversary>> {
        Ok(match *self {
            AdversaryPolicy::None => Box::new(NoAdversary),
            AdversaryPolicy::NonAdaptive { tau } => {
                Box::new(NonAdaptiveAdversary::new(n, (0..tau).collect(), solver)?)
            }
            AdversaryPolicy::Adaptive { tau, budget } => {
                Box::new(AdaptiveAdversary::new(n, tau, budget, solver)?)
            }
        })
    }
}

/// Per-round log entry; weights are measured after the round's update, in
/// absolute terms (they may underflow to zero in very long episodes).
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    pub hidden: Direction,
    pub output: Direction,
    pub claimed_flip: bool,
    pub corrupted_weight: f64,
    pub good_weight: f64,
    pub corrupted_count: usize,
    pub captured: usize,
    pub volatile: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    /// Rounds played, including the terminal successful one.
    pub rounds: usize,
    pub succeeded: bool,
    pub truncated: bool,
    pub trace: Vec<RoundRecord>,
    /// Final weights divided by `2^weight_scale_log2`.
    pub final_weights: WeightVector,
    pub weight_scale_log2: i64,
}

impl EpisodeResult {
    /// Rounds in which the output missed the hidden direction.
    pub fn failed_rounds(&self) -> usize {
        self.rounds - usize::from(self.succeeded)
    }

    pub fn final_corrupted_weight(&self) -> f64 {
        self.trace.last().map_or(0.0, |r| r.corrupted_weight)
    }
}

/// `x * 2^e`, applied in two halves so intermediate factors stay finite.
pub(crate) fn ldexp(x: f64, e: i64) -> f64 {
    let e = e.clamp(-4000, 4000) as i32;
    x * 2f64.powi(e / 2) * 2f64.powi(e - e / 2)
}

/// Draws the hidden direction (when not fixed), then one advice bit per expert.
pub fn sample_round<R: Rng + ?Sized>(
    n: usize,
    hidden: HiddenPolicy,
    rng: &mut R,
) -> (Direction, AdviceVector) {
    let d = match hidden {
        HiddenPolicy::Uniform => Direction::from_bool(rng.random()),
        HiddenPolicy::Fixed(d) => d,
    };
    let advice = AdviceVector::new((0..n).map(|_| Direction::from_bool(rng.random())).collect());
    (d, advice)
}

/// Splits the total weight into (corrupted, good) given a sorted corrupted set.
pub(crate) fn weight_split(weights: &WeightVector, corrupted: &[usize]) -> (f64, f64) {
    let mut bad = 0.0;
    let mut good = 0.0;
    let mut k = corrupted.iter().peekable();
    for (i, &w) in weights.as_slice().iter().enumerate() {
        if k.peek() == Some(&&i) {
            k.next();
            bad += w;
        } else {
            good += w;
        }
    }
    (bad, good)
}

/// Plays rounds until success or `params.max_rounds`.
///
/// The result is a pure function of the parameters, the adversary's initial
/// state and the RNG state.
pub fn run_episode<R: Rng + ?Sized>(
    params: &MwuParams,
    hidden: HiddenPolicy,
    adversary: &mut dyn Adversary,
    rng: &mut R,
) -> Result<EpisodeResult> {
    let mut weights = WeightVector::ones(params.n);
    let mut scale_log2: i64 = 0;
    let mut trace = Vec::new();
    for round in 1..=params.max_rounds {
        let (d, mut advice) = sample_round(params.n, hidden, rng);
        let action = adversary.act(&weights, d, &mut advice, params.eta)?;
        let outcome = run_round(&weights, &advice, d, params.eta)?;
        if action.claimed_flip && outcome.output != -d {
            return Err(Error::InvalidConfig(format!(
                "round {round}: adversary claimed a flip the MWU did not produce"
            )));
        }
        weights = outcome.weights_after;
        let corrupted = adversary.corrupted();
        let (corrupted_weight, good_weight) = weight_split(&weights, corrupted);
        let (corrupted_weight, good_weight) =
            (ldexp(corrupted_weight, scale_log2), ldexp(good_weight, scale_log2));
        scale_log2 -= i64::from(weights.renormalize());
        trace.push(RoundRecord {
            round,
            hidden: d,
            output: outcome.output,
            claimed_flip: action.claimed_flip,
            corrupted_weight,
            good_weight,
            corrupted_count: corrupted.len(),
            captured: action.captured.len(),
            volatile: action.volatile.len(),
        });
        if outcome.success {
            return Ok(EpisodeResult {
                rounds: round,
                succeeded: true,
                truncated: false,
                trace,
                final_weights: weights,
                weight_scale_log2: scale_log2,
            });
        }
    }
    Ok(EpisodeResult {
        rounds: params.max_rounds,
        succeeded: false,
        truncated: true,
        trace,
        final_weights: weights,
        weight_scale_log2: scale_log2,
    })
}
