//! The greedy non-adaptive adversary.
//!
//! It owns a fixed set `K` of experts. Each round, after seeing the good
//! experts' advice, it picks `J` within `K` to advise the hidden direction `d`
//! (the rest of `K` advises `-d`) so the MWU outputs `-d` while the total
//! weight of `K` after the update is as large as possible.
//!
//! With `G` the good experts' weighted advice and `W_K` the total weight of
//! `K`, the weighted advice is `d (2g - W_K) + G` where `g` is the weight of
//! `J`. Forcing the sign to `-d` gives
//!
//! - `d = +1`: `g < (W_K - G) / 2`
//! - `d = -1`: `g <= (W_K + G) / 2` (non-strict, because `sgn(0) = +1`)
//!
//! and the post-round weight of `K` is `(1 - eta) W_K + 2 eta g`, so the
//! adversary maximises `g` under the cap.

use crate::error::{Error, Result};
use crate::mwu::episode::{Adversary, AdversaryAction};
use crate::mwu::{mwu_output, AdviceVector, Direction, WeightVector};
use crate::solver::{SolverConfig, SolverInstance, SolverSolution};

/// Re-solves with a slightly lowered cap when floating-point rounding makes a
/// boundary selection fail the re-simulated output check.
const ROUNDING_RETRIES: i32 = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapResult {
    pub cap: f64,
    pub strict: bool,
    /// `G`: weighted advice of the experts outside the controlled set.
    pub good_sum: f64,
    /// `W_K`: total weight of the controlled set.
    pub corrupted_total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundPlan {
    /// Advice for each controlled expert, in the controlled set's order.
    pub advice_for_corrupted: Vec<(usize, Direction)>,
    pub claimed_flip: bool,
    /// `g`, the weight of the experts advising `d`.
    pub solver_value: f64,
    /// `X` over the controlled set; all-zero when infeasible.
    pub selection: Vec<bool>,
}

impl RoundPlan {
    /// Whether the plan flips the output with at least one expert advising `d`.
    pub fn flips_with_support(&self) -> bool {
        self.claimed_flip && self.selection.iter().any(|&x| x)
    }

    pub fn apply(&self, advice: &mut AdviceVector) {
        for &(i, a) in &self.advice_for_corrupted {
            advice.set(i, a);
        }
    }
}

/// Checks that `set` is strictly increasing and within `0..n`.
pub(crate) fn check_index_set(set: &[usize], n: usize) -> Result<()> {
    if let Some(&last) = set.last() {
        if last >= n {
            return Err(Error::IndexSet(format!("index {last} out of range for {n} experts")));
        }
    }
    if set.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::IndexSet("indices must be strictly increasing".into()));
    }
    Ok(())
}

/// The round's cap on `g` for controlled set `set`. Entries of `advice` at
/// positions in `set` are ignored.
pub fn compute_cap(
    weights: &WeightVector,
    advice: &AdviceVector,
    set: &[usize],
    d: Direction,
) -> Result<CapResult> {
    let n = weights.len();
    if advice.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: advice.len(),
        });
    }
    check_index_set(set, n)?;
    let mut good_sum = 0.0;
    let mut controlled = set.iter().peekable();
    for i in 0..n {
        if controlled.peek() == Some(&&i) {
            controlled.next();
        } else {
            good_sum += advice[i].value() * weights[i];
        }
    }
    let corrupted_total = weights.sum_over(set);
    Ok(match d {
        Direction::Plus => CapResult {
            cap: (corrupted_total - good_sum) / 2.0,
            strict: true,
            good_sum,
            corrupted_total,
        },
        Direction::Minus => CapResult {
            cap: (corrupted_total + good_sum) / 2.0,
            strict: false,
            good_sum,
            corrupted_total,
        },
    })
}

fn plan_from(set: &[usize], sol: &SolverSolution, d: Direction) -> RoundPlan {
    let advice_for_corrupted = set
        .iter()
        .zip(&sol.selection)
        .map(|(&i, &x)| (i, if x { d } else { -d }))
        .collect();
    RoundPlan {
        advice_for_corrupted,
        claimed_flip: true,
        solver_value: sol.value,
        selection: sol.selection.clone(),
    }
}

fn fallback(set: &[usize], d: Direction) -> RoundPlan {
    RoundPlan {
        advice_for_corrupted: set.iter().map(|&i| (i, d)).collect(),
        claimed_flip: false,
        solver_value: 0.0,
        selection: vec![false; set.len()],
    }
}

/// The greedy plan for controlled set `set`.
///
/// When no selection can flip the output every controlled expert advises `d`:
/// the round is lost anyway, so the adversary takes the gain.
pub fn plan_advice(
    weights: &WeightVector,
    advice: &AdviceVector,
    set: &[usize],
    d: Direction,
    solver: &SolverConfig,
) -> Result<RoundPlan> {
    let cap = compute_cap(weights, advice, set, d)?;
    let items: Vec<f64> = set.iter().map(|&i| weights[i]).collect();
    let scale = cap.corrupted_total + cap.good_sum.abs();
    let mut signs: Vec<f64> = advice.iter().map(Direction::value).collect();
    for &i in set {
        signs[i] = -d.value();
    }
    let mut trial = advice.clone();
    for attempt in 0..ROUNDING_RETRIES {
        let inst = if attempt == 0 {
            SolverInstance::new(items.clone(), cap.cap, cap.strict)?.with_vote(
                weights.as_slice(),
                signs.clone(),
                set.to_vec(),
                d.value(),
            )
        } else {
            let shave = scale * f64::EPSILON * 2f64.powi(2 * attempt);
            SolverInstance::new(items.clone(), cap.cap - shave, cap.strict)?
        };
        let sol = solver.solve(&inst)?;
        if !sol.feasible {
            break;
        }
        let plan = plan_from(set, &sol, d);
        plan.apply(&mut trial);
        if mwu_output(weights, &trial)? == -d {
            return Ok(plan);
        }
    }
    Ok(fallback(set, d))
}

/// Total weight of the controlled set after the round, when the plan flips
/// the output with at least one controlled expert advising `d`; 0 otherwise.
pub fn non_adaptive_value(
    weights: &WeightVector,
    advice: &AdviceVector,
    set: &[usize],
    d: Direction,
    eta: f64,
    solver: &SolverConfig,
) -> Result<f64> {
    let plan = plan_advice(weights, advice, set, d, solver)?;
    Ok(plan_value(weights, &plan, eta))
}

/// Oracle value of an already computed plan.
pub(crate) fn plan_value(weights: &WeightVector, plan: &RoundPlan, eta: f64) -> f64 {
    if !plan.flips_with_support() {
        return 0.0;
    }
    plan.advice_for_corrupted
        .iter()
        .zip(&plan.selection)
        .map(|(&(i, _), &x)| weights[i] * if x { 1.0 + eta } else { 1.0 - eta })
        .sum()
}

#[derive(Debug, Clone)]
pub struct NonAdaptiveAdversary {
    corrupted: Vec<usize>,
    solver: SolverConfig,
}

impl NonAdaptiveAdversary {
    /// `corrupted` must be sorted, unique and smaller than `n`.
    pub fn new(n: usize, corrupted: Vec<usize>, solver: SolverConfig) -> Result<Self> {
        check_index_set(&corrupted, n)?;
        if corrupted.len() >= n {
            return Err(Error::InvalidConfig(format!(
                "tau = {} must be below n = {n}",
                corrupted.len()
            )));
        }
        Ok(NonAdaptiveAdversary { corrupted, solver })
    }
}

impl Adversary for NonAdaptiveAdversary {
    fn act(
        &mut self,
        weights: &WeightVector,
        hidden: Direction,
        advice: &mut AdviceVector,
        _eta: f64,
    ) -> Result<AdversaryAction> {
        let plan = plan_advice(weights, advice, &self.corrupted, hidden, &self.solver)?;
        plan.apply(advice);
        Ok(AdversaryAction {
            claimed_flip: plan.claimed_flip,
            ..Default::default()
        })
    }

    fn corrupted(&self) -> &[usize] {
        &self.corrupted
    }
}
