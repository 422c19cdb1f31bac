//! A generic MWU-versus-adversary game.
//!
//! `n` experts advise values from a domain each round; the MWU aggregates the
//! weighted advice into an output; a payoff rule scores every expert in
//! `[-1, 1]` and weights are multiplied by `1 + eta * payoff`. The game runs
//! until a termination formula over the round history holds. The adversary's
//! generic objective is [`dual_oracle`]: the corrupted experts' weight after
//! the round if the formula still fails, 0 otherwise.
//!
//! [`global_coin_instance`] expresses the coin-flipping MWU in these terms and
//! reproduces [`run_episode`](crate::mwu::episode::run_episode) round for round.

use std::fmt::Debug;

use rand::Rng;

use crate::error::{Error, Result};
use crate::mwu::episode::{
    sample_round, weight_split, Adversary, AdversaryAction, AdversaryPolicy, HiddenPolicy,
};
use crate::mwu::{mwu_output, AdviceVector, Direction, MwuParams, WeightVector};
use crate::solver::SolverConfig;

/// The advice set and the per-round environment.
pub trait AdviceDomain {
    type Advice: Clone + Debug + PartialEq;
    /// Information revealed after the output (the hidden direction for the coin).
    type Signal: Clone + Debug + PartialEq;
    type Output: Clone + Debug + PartialEq;

    /// Draws the round's signal and every expert's honest advice.
    fn draw<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> (Self::Signal, Vec<Self::Advice>);

    fn aggregate(&self, weights: &WeightVector, advice: &[Self::Advice]) -> Result<Self::Output>;
}

pub trait PayoffRule<D: AdviceDomain> {
    /// Payoff in `[-1, 1]` for one expert.
    fn payoff(&self, advice: &D::Advice, signal: &D::Signal, output: &D::Output) -> f64;
}

pub trait TerminationFormula<D: AdviceDomain> {
    fn holds(&self, history: &[RoundEntry<D>]) -> bool;
}

pub trait GameAdversary<D: AdviceDomain> {
    /// Overwrites the advice of the experts it controls this round.
    fn act(
        &mut self,
        weights: &WeightVector,
        signal: &D::Signal,
        advice: &mut [D::Advice],
        eta: f64,
    ) -> Result<AdversaryAction>;

    fn corrupted(&self) -> &[usize];
}

#[derive(Debug, PartialEq)]
pub struct RoundEntry<D: AdviceDomain> {
    pub signal: D::Signal,
    pub advice: Vec<D::Advice>,
    pub output: D::Output,
    pub action: AdversaryAction,
    /// Weights after the update, divided by `2^scale_log2` of the state.
    pub weights_after: WeightVector,
    pub corrupted_weight: f64,
}

impl<D: AdviceDomain> Clone for RoundEntry<D> {
    fn clone(&self) -> Self {
        RoundEntry {
            signal: self.signal.clone(),
            advice: self.advice.clone(),
            output: self.output.clone(),
            action: self.action.clone(),
            weights_after: self.weights_after.clone(),
            corrupted_weight: self.corrupted_weight,
        }
    }
}

pub struct GameInstance<D, P, F, A> {
    pub domain: D,
    pub payoff: P,
    pub termination: F,
    pub adversary: A,
    pub n: usize,
    pub eta: f64,
    pub max_rounds: usize,
}

#[derive(Debug, PartialEq)]
pub struct GameState<D: AdviceDomain> {
    pub weights: WeightVector,
    pub scale_log2: i64,
    pub history: Vec<RoundEntry<D>>,
    pub terminated: bool,
}

impl<D: AdviceDomain> GameState<D> {
    pub fn new(n: usize) -> Self {
        GameState {
            weights: WeightVector::ones(n),
            scale_log2: 0,
            history: Vec::new(),
            terminated: false,
        }
    }

    pub fn rounds(&self) -> usize {
        self.history.len()
    }
}

fn apply_payoffs<D: AdviceDomain, P: PayoffRule<D>>(
    payoff: &P,
    weights: &WeightVector,
    advice: &[D::Advice],
    signal: &D::Signal,
    output: &D::Output,
    eta: f64,
) -> Result<WeightVector> {
    let mut next = Vec::with_capacity(advice.len());
    for (w, a) in weights.as_slice().iter().zip(advice) {
        let p = payoff.payoff(a, signal, output);
        if !(-1.0..=1.0).contains(&p) {
            return Err(Error::InvalidConfig(format!("payoff {p} outside [-1, 1]")));
        }
        next.push(w * (1.0 + eta * p));
    }
    WeightVector::new(next)
}

/// Plays one round. Returns whether the termination formula now holds.
pub fn step_game<D, P, F, A, R>(
    game: &mut GameInstance<D, P, F, A>,
    state: &mut GameState<D>,
    rng: &mut R,
) -> Result<bool>
where
    D: AdviceDomain,
    P: PayoffRule<D>,
    F: TerminationFormula<D>,
    A: GameAdversary<D>,
    R: Rng + ?Sized,
{
    if state.terminated {
        return Err(Error::InvalidConfig("game already terminated".into()));
    }
    if state.weights.len() != game.n {
        return Err(Error::LengthMismatch {
            expected: game.n,
            found: state.weights.len(),
        });
    }
    let (signal, mut advice) = game.domain.draw(game.n, rng);
    let action = game.adversary.act(&state.weights, &signal, &mut advice, game.eta)?;
    let output = game.domain.aggregate(&state.weights, &advice)?;
    let weights_after = apply_payoffs(&game.payoff, &state.weights, &advice, &signal, &output, game.eta)?;
    let (bad, _) = weight_split(&weights_after, game.adversary.corrupted());
    state.history.push(RoundEntry {
        signal,
        advice,
        output,
        action,
        weights_after: weights_after.clone(),
        corrupted_weight: crate::mwu::episode::ldexp(bad, state.scale_log2),
    });
    state.weights = weights_after;
    state.scale_log2 -= i64::from(state.weights.renormalize());
    state.terminated = game.termination.holds(&state.history);
    Ok(state.terminated)
}

/// Steps until the formula holds or `max_rounds` rounds have been played.
pub fn run_game<D, P, F, A, R>(game: &mut GameInstance<D, P, F, A>, rng: &mut R) -> Result<GameState<D>>
where
    D: AdviceDomain,
    P: PayoffRule<D>,
    F: TerminationFormula<D>,
    A: GameAdversary<D>,
    R: Rng + ?Sized,
{
    let mut state = GameState::new(game.n);
    while state.rounds() < game.max_rounds {
        if step_game(game, &mut state, rng)? {
            break;
        }
    }
    Ok(state)
}

/// The adversary's generic objective for candidate advice: total weight of
/// `corrupted` after the round when the formula still fails, 0 when it holds.
#[allow(clippy::too_many_arguments)]
pub fn dual_oracle<D, P, F>(
    domain: &D,
    payoff: &P,
    termination: &F,
    history: &[RoundEntry<D>],
    weights: &WeightVector,
    signal: &D::Signal,
    advice: &[D::Advice],
    corrupted: &[usize],
    eta: f64,
) -> Result<f64>
where
    D: AdviceDomain,
    P: PayoffRule<D>,
    F: TerminationFormula<D>,
{
    let output = domain.aggregate(weights, advice)?;
    let after = apply_payoffs(payoff, weights, advice, signal, &output, eta)?;
    let mut extended = history.to_vec();
    extended.push(RoundEntry {
        signal: signal.clone(),
        advice: advice.to_vec(),
        output,
        action: AdversaryAction::default(),
        weights_after: after.clone(),
        corrupted_weight: 0.0,
    });
    if termination.holds(&extended) {
        Ok(0.0)
    } else {
        Ok(after.sum_over(corrupted))
    }
}

/// The coin: advice and outputs are directions, the signal is the hidden direction.
#[derive(Debug, Clone, Copy, Default)]
pub struct CoinDomain {
    pub hidden: HiddenPolicy,
}

impl AdviceDomain for CoinDomain {
    type Advice = Direction;
    type Signal = Direction;
    type Output = Direction;

    fn draw<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> (Direction, Vec<Direction>) {
        let (d, advice) = sample_round(n, self.hidden, rng);
        (d, advice.as_slice().to_vec())
    }

    fn aggregate(&self, weights: &WeightVector, advice: &[Direction]) -> Result<Direction> {
        mwu_output(weights, &AdviceVector::new(advice.to_vec()))
    }
}

/// `+1` when the advice matches the hidden direction, `-1` otherwise.
#[derive(Debug, Clone, Copy, Default)]
pub struct AgreementPayoff;

impl PayoffRule<CoinDomain> for AgreementPayoff {
    fn payoff(&self, advice: &Direction, signal: &Direction, _: &Direction) -> f64 {
        if advice == signal {
            1.0
        } else {
            -1.0
        }
    }
}

/// Holds once the latest output equals the latest hidden direction.
#[derive(Debug, Clone, Copy, Default)]
pub struct OutputMatchesHidden;

impl TerminationFormula<CoinDomain> for OutputMatchesHidden {
    fn holds(&self, history: &[RoundEntry<CoinDomain>]) -> bool {
        history.last().is_some_and(|r| r.output == r.signal)
    }
}

/// Formula with a constant truth value.
#[derive(Debug, Clone, Copy)]
pub struct Constant(pub bool);

impl<D: AdviceDomain> TerminationFormula<D> for Constant {
    fn holds(&self, _: &[RoundEntry<D>]) -> bool {
        self.0
    }
}

/// Runs one of the coin adversaries inside the generic game.
pub struct CoinAdversary(pub Box<dyn Adversary>);

impl GameAdversary<CoinDomain> for CoinAdversary {
    fn act(
        &mut self,
        weights: &WeightVector,
        signal: &Direction,
        advice: &mut [Direction],
        eta: f64,
    ) -> Result<AdversaryAction> {
        let mut vector = AdviceVector::new(advice.to_vec());
        let action = self.0.act(weights, *signal, &mut vector, eta)?;
        advice.copy_from_slice(vector.as_slice());
        Ok(action)
    }

    fn corrupted(&self) -> &[usize] {
        self.0.corrupted()
    }
}

pub type CoinGame = GameInstance<CoinDomain, AgreementPayoff, OutputMatchesHidden, CoinAdversary>;

pub fn global_coin_instance(
    params: &MwuParams,
    hidden: HiddenPolicy,
    policy: &AdversaryPolicy,
    solver: SolverConfig,
) -> Result<CoinGame> {
    Ok(GameInstance {
        domain: CoinDomain { hidden },
        payoff: AgreementPayoff,
        termination: OutputMatchesHidden,
        adversary: CoinAdversary(policy.build(params.n, solver)?),
        n: params.n,
        eta: params.eta,
        max_rounds: params.max_rounds,
    })
}
