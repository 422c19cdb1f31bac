//! The greedy adaptive adversary.
//!
//! It starts with no corrupted experts and may capture up to `tau` of them
//! over the episode. In each round it may also set the advice of up to
//! `floor(sqrt(n))` good experts for that round only (volatile experts).
//!
//! Each round it first asks the non-adaptive oracle whether its current set
//! `K` can flip the output with at least one expert advising `d`. If not, it
//! searches levels `(m, v)` in lexicographic order (fewest captures first,
//! then fewest volatile experts) and stops at the first level where some
//! capture set `J` and volatile set `V` give a nonzero oracle value for
//! `K ∪ J ∪ V`; within that level the highest oracle value wins.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::mwu::episode::{Adversary, AdversaryAction};
use crate::mwu::{AdviceVector, Direction, WeightVector};
use crate::nonadaptive::{check_index_set, plan_advice, plan_value, RoundPlan};
use crate::solver::SolverConfig;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdaptiveState {
    /// `K^(r)`, sorted.
    pub corrupted: Vec<usize>,
    /// `tau`: the most experts that may ever be captured.
    pub budget: usize,
    pub volatile_limit: usize,
    pub rounds_elapsed: usize,
}

impl AdaptiveState {
    pub fn new(n: usize, tau: usize) -> Result<Self> {
        if tau >= n {
            return Err(Error::InvalidConfig(format!("tau = {tau} must be below n = {n}")));
        }
        Ok(AdaptiveState {
            corrupted: Vec::new(),
            budget: tau,
            volatile_limit: n.isqrt(),
            rounds_elapsed: 0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SearchOutcome {
    NoActionNeeded,
    Captured,
    VolatileOnly,
    GaveUp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub new_captures: Vec<usize>,
    pub volatile: Vec<usize>,
    pub oracle_value: f64,
    pub outcome: SearchOutcome,
    /// Accepted `(m, v)`; `None` unless experts were captured or flipped.
    pub level: Option<(usize, usize)>,
    /// Plan over the controlled experts `K ∪ J ∪ V` (just `K` when no search
    /// succeeded).
    pub plan: RoundPlan,
    pub oracle_calls: u64,
}

fn union_sorted(a: &[usize], b: &[usize], c: &[usize]) -> Vec<usize> {
    let mut u: Vec<usize> = a.iter().chain(b).chain(c).copied().collect();
    u.sort_unstable();
    u
}

/// Oracle value of the current corrupted set.
pub fn assess_current(
    state: &AdaptiveState,
    weights: &WeightVector,
    advice: &AdviceVector,
    d: Direction,
    eta: f64,
    solver: &SolverConfig,
) -> Result<f64> {
    let plan = plan_advice(weights, advice, &state.corrupted, d, solver)?;
    Ok(plan_value(weights, &plan, eta))
}

/// Runs the capture / volatile search for one round.
///
/// Fails with [`Error::BudgetExceeded`] once more than `budget` oracle calls
/// would be needed.
pub fn search_plan(
    state: &AdaptiveState,
    weights: &WeightVector,
    advice: &AdviceVector,
    d: Direction,
    eta: f64,
    solver: &SolverConfig,
    budget: u64,
) -> Result<SearchResult> {
    let n = weights.len();
    check_index_set(&state.corrupted, n)?;
    let current = plan_advice(weights, advice, &state.corrupted, d, solver)?;
    let current_value = plan_value(weights, &current, eta);
    if current_value > 0.0 {
        return Ok(SearchResult {
            new_captures: Vec::new(),
            volatile: Vec::new(),
            oracle_value: current_value,
            outcome: SearchOutcome::NoActionNeeded,
            level: None,
            plan: current,
            oracle_calls: 1,
        });
    }

    let free: Vec<usize> = (0..n).filter(|i| state.corrupted.binary_search(i).is_err()).collect();
    let max_captures = state.budget.saturating_sub(state.corrupted.len());
    let mut calls: u64 = 1;

    for m in 0..=max_captures.min(free.len()) {
        for v in 0..=state.volatile_limit {
            if (m == 0 && v == 0) || m + v > free.len() {
                continue;
            }
            let mut best: Option<(f64, Vec<usize>, Vec<usize>, RoundPlan)> = None;
            for captures in free.iter().copied().combinations(m) {
                let rest: Vec<usize> = free.iter().copied().filter(|i| !captures.contains(i)).collect();
                for flips in rest.into_iter().combinations(v) {
                    calls += 1;
                    if calls > budget {
                        return Err(Error::BudgetExceeded { budget });
                    }
                    let controlled = union_sorted(&state.corrupted, &captures, &flips);
                    let plan = plan_advice(weights, advice, &controlled, d, solver)?;
                    let value = plan_value(weights, &plan, eta);
                    // Strict improvement keeps the lexicographically first (J, V).
                    if value > 0.0 && best.as_ref().is_none_or(|b| value > b.0) {
                        best = Some((value, captures.clone(), flips, plan));
                    }
                }
            }
            if let Some((value, captures, flips, plan)) = best {
                return Ok(SearchResult {
                    new_captures: captures,
                    volatile: flips,
                    oracle_value: value,
                    outcome: if m > 0 {
                        SearchOutcome::Captured
                    } else {
                        SearchOutcome::VolatileOnly
                    },
                    level: Some((m, v)),
                    plan,
                    oracle_calls: calls,
                });
            }
        }
    }

    Ok(SearchResult {
        new_captures: Vec::new(),
        volatile: Vec::new(),
        oracle_value: 0.0,
        outcome: SearchOutcome::GaveUp,
        level: None,
        plan: RoundPlan {
            advice_for_corrupted: state.corrupted.iter().map(|&i| (i, d)).collect(),
            claimed_flip: false,
            solver_value: 0.0,
            selection: vec![false; state.corrupted.len()],
        },
        oracle_calls: calls,
    })
}

/// Commits a search result: captures join the corrupted set, volatile
/// experts do not. Returns the next state and the round's full advice.
pub fn apply_plan(
    state: &AdaptiveState,
    result: &SearchResult,
    advice: &AdviceVector,
) -> (AdaptiveState, AdviceVector) {
    let mut next = state.clone();
    next.corrupted.extend_from_slice(&result.new_captures);
    next.corrupted.sort_unstable();
    next.rounds_elapsed += 1;
    let mut full = advice.clone();
    result.plan.apply(&mut full);
    (next, full)
}

#[derive(Debug, Clone)]
pub struct AdaptiveAdversary {
    state: AdaptiveState,
    enum_budget: u64,
    solver: SolverConfig,
    last: Option<SearchResult>,
}

impl AdaptiveAdversary {
    pub fn new(n: usize, tau: usize, enum_budget: u64, solver: SolverConfig) -> Result<Self> {
        Ok(AdaptiveAdversary {
            state: AdaptiveState::new(n, tau)?,
            enum_budget,
            solver,
            last: None,
        })
    }

    pub fn state(&self) -> &AdaptiveState {
        &self.state
    }

    /// The search result of the most recent round.
    pub fn last_search(&self) -> Option<&SearchResult> {
        self.last.as_ref()
    }
}

impl Adversary for AdaptiveAdversary {
    fn act(
        &mut self,
        weights: &WeightVector,
        hidden: Direction,
        advice: &mut AdviceVector,
        eta: f64,
    ) -> Result<AdversaryAction> {
        let result = search_plan(&self.state, weights, advice, hidden, eta, &self.solver, self.enum_budget)?;
        let (next, full) = apply_plan(&self.state, &result, advice);
        *advice = full;
        self.state = next;
        let action = AdversaryAction {
            claimed_flip: result.outcome != SearchOutcome::GaveUp,
            captured: result.new_captures.clone(),
            volatile: result.volatile.clone(),
            search: Some(result.outcome),
        };
        self.last = Some(result);
        Ok(action)
    }

    fn corrupted(&self) -> &[usize] {
        &self.state.corrupted
    }
}
