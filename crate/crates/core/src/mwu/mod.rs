//! The global-coin MWU engine.
//!
//! Every round the `n` experts each advise a direction in `{-1, +1}`. The
//! algorithm outputs the sign of the weighted advice, the hidden direction is
//! revealed, and every expert's weight is multiplied by `1 + eta` when its
//! advice matched the hidden direction and by `1 - eta` otherwise.

pub mod episode;

use std::ops::{Index, Neg};

use crate::error::{Error, Result};

/// A signed unit, used both for directions and for per-expert advice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Minus,
    Plus,
}

impl Direction {
    pub fn value(self) -> f64 {
        match self {
            Direction::Plus => 1.0,
            Direction::Minus => -1.0,
        }
    }

    pub fn from_bool(plus: bool) -> Self {
        if plus {
            Direction::Plus
        } else {
            Direction::Minus
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Direction::Plus => 1,
            Direction::Minus => -1,
        }
    }
}

impl Neg for Direction {
    type Output = Direction;

    fn neg(self) -> Direction {
        match self {
            Direction::Plus => Direction::Minus,
            Direction::Minus => Direction::Plus,
        }
    }
}

/// `+1` when `x >= 0`, `-1` otherwise. Zero maps to `+1`.
pub fn sgn(x: f64) -> Result<Direction> {
    if !x.is_finite() {
        return Err(Error::NonFinite(x));
    }
    Ok(Direction::from_bool(x >= 0.0))
}

/// One round of advice, one entry per expert.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdviceVector(Vec<Direction>);

impl AdviceVector {
    pub fn new(entries: Vec<Direction>) -> Self {
        AdviceVector(entries)
    }

    pub fn uniform(n: usize, value: Direction) -> Self {
        AdviceVector(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn set(&mut self, i: usize, value: Direction) {
        self.0[i] = value;
    }

    pub fn as_slice(&self) -> &[Direction] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = Direction> + '_ {
        self.0.iter().copied()
    }
}

impl Index<usize> for AdviceVector {
    type Output = Direction;

    fn index(&self, i: usize) -> &Direction {
        &self.0[i]
    }
}

impl From<Vec<i8>> for AdviceVector {
    /// Non-negative entries become `+1`, negative ones `-1`.
    fn from(v: Vec<i8>) -> Self {
        AdviceVector(v.into_iter().map(|x| Direction::from_bool(x >= 0)).collect())
    }
}

const RENORM_LOW: f64 = 8.636168555094445e-78; // 2^-256
const RENORM_HIGH: f64 = 1.157920892373162e77; // 2^256

/// Per-expert weights. Every entry is strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    /// All-ones starting weights.
    pub fn ones(n: usize) -> Self {
        WeightVector(vec![1.0; n])
    }

    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if let Some(&w) = entries.iter().find(|w| !w.is_finite() || **w <= 0.0) {
            return Err(Error::NonPositiveWeight(w));
        }
        Ok(WeightVector(entries))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Sum of the weights at `indices`, in the order given.
    pub fn sum_over(&self, indices: &[usize]) -> f64 {
        indices.iter().map(|&i| self.0[i]).sum()
    }

    /// Rescales by a power of two when the largest weight leaves
    /// `[2^-256, 2^256]` and returns the exponent applied. Power-of-two
    /// scaling is exact and leaves every sign decision unchanged.
    pub fn renormalize(&mut self) -> i32 {
        let max = self.0.iter().copied().fold(0.0, f64::max);
        if max > 0.0 && !(RENORM_LOW..=RENORM_HIGH).contains(&max) {
            let shift = -max.log2().floor() as i32;
            let factor = 2f64.powi(shift);
            for w in &mut self.0 {
                *w *= factor;
            }
            shift
        } else {
            0
        }
    }

    /// Returns the weights scaled by a positive factor.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        WeightVector::new(self.0.iter().map(|w| w * factor).collect())
    }
}

impl Index<usize> for WeightVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Per-expert gains: `Plus` when the advice matched the hidden direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GainVector(Vec<Direction>);

impl GainVector {
    pub fn as_slice(&self) -> &[Direction] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<i8>> for GainVector {
    fn from(v: Vec<i8>) -> Self {
        GainVector(v.into_iter().map(|x| Direction::from_bool(x >= 0)).collect())
    }
}

/// `sqrt(log(n) / n)` in the given logarithm base, clamped to `0.49` when the
/// formula reaches `1/2`.
pub fn default_eta(n: usize, log_base: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "automatic eta needs at least 2 experts, got {n}"
        )));
    }
    if !(log_base.is_finite() && log_base > 1.0) {
        return Err(Error::InvalidConfig(format!("log base {log_base} must exceed 1")));
    }
    let nf = n as f64;
    let eta = (nf.ln() / log_base.ln() / nf).sqrt();
    Ok(if eta >= 0.5 { 0.49 } else { eta })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MwuParams {
    pub n: usize,
    pub eta: f64,
    pub max_rounds: usize,
}

impl MwuParams {
    pub const DEFAULT_MAX_ROUNDS: usize = 100_000;

    pub fn new(n: usize, eta: f64, max_rounds: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("expert count must be positive".into()));
        }
        if !(eta > 0.0 && eta < 0.5) {
            return Err(Error::InvalidEta(eta));
        }
        if max_rounds == 0 {
            return Err(Error::InvalidConfig("max_rounds must be positive".into()));
        }
        Ok(MwuParams { n, eta, max_rounds })
    }

    /// Natural-log default update factor and the default round cap.
    pub fn with_defaults(n: usize) -> Result<Self> {
        MwuParams::new(n, default_eta(n, std::f64::consts::E)?, Self::DEFAULT_MAX_ROUNDS)
    }
}

/// Result of a single round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub output: Direction,
    pub hidden: Direction,
    pub success: bool,
    pub weights_after: WeightVector,
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::LengthMismatch { expected, found });
    }
    Ok(())
}

/// Sign of the weighted advice, summed in expert order.
pub fn mwu_output(weights: &WeightVector, advice: &AdviceVector) -> Result<Direction> {
    check_len(weights.len(), advice.len())?;
    sgn(vote_sum(&weights.0, advice.0.iter().map(|a| a.value())))
}

/// `sum a_i w_i` in expert order. Every evaluation of the vote goes through
/// here so that all of them round identically.
pub(crate) fn vote_sum(weights: &[f64], signs: impl Iterator<Item = f64>) -> f64 {
    weights.iter().zip(signs).map(|(w, a)| a * w).sum()
}

pub fn compute_gains(advice: &AdviceVector, hidden: Direction) -> GainVector {
    GainVector(advice.iter().map(|a| Direction::from_bool(a == hidden)).collect())
}

/// Multiplies each weight by `1 + eta * gain`.
///
/// `eta = 0` is accepted so the identity update can be exercised; episode
/// parameters reject it.
pub fn update_weights(weights: &WeightVector, gains: &GainVector, eta: f64) -> Result<WeightVector> {
    if !(0.0..0.5).contains(&eta) {
        return Err(Error::InvalidEta(eta));
    }
    check_len(weights.len(), gains.len())?;
    Ok(WeightVector(
        weights
            .0
            .iter()
            .zip(&gains.0)
            .map(|(w, g)| w * (1.0 + eta * g.value()))
            .collect(),
    ))
}

/// One deterministic round on fully resolved advice.
pub fn run_round(
    weights: &WeightVector,
    advice: &AdviceVector,
    hidden: Direction,
    eta: f64,
) -> Result<RoundOutcome> {
    let output = mwu_output(weights, advice)?;
    let gains = compute_gains(advice, hidden);
    let weights_after = update_weights(weights, &gains, eta)?;
    Ok(RoundOutcome {
        output,
        hidden,
        success: output == hidden,
        weights_after,
    })
}
