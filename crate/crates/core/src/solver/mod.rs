//! Capped subset-sum: choose `X in {0,1}^k` maximising `sum X_i w_i` while
//! keeping that sum below a cap (`< cap` when strict, `<= cap` otherwise).
//!
//! Infeasibility is a regular result (`feasible == false`), because callers
//! branch on it.

mod bruteforce;
mod dp;

pub use bruteforce::{solve_bruteforce, solve_bruteforce_with_limit, BRUTEFORCE_LIMIT};
pub use dp::{solve_dp, solve_dp_with_budget, DpTable, DEFAULT_TABLE_BUDGET};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverInstance {
    item_weights: Vec<f64>,
    cap: f64,
    strict: bool,
    vote: Option<VoteCheck>,
}

/// The round a cap was derived from. Near the cap, admission is decided by
/// re-evaluating the weighted vote the cap stands for.
#[derive(Debug, Clone, PartialEq)]
struct VoteCheck {
    weights: Vec<f64>,
    /// Advice signs with every item position set against `hidden`.
    signs: Vec<f64>,
    positions: Vec<usize>,
    hidden: f64,
    magnitude: f64,
}

impl SolverInstance {
    pub fn new(item_weights: Vec<f64>, cap: f64, strict: bool) -> Result<Self> {
        if let Some(&w) = item_weights.iter().find(|w| !w.is_finite() || **w <= 0.0) {
            return Err(Error::NonPositiveWeight(w));
        }
        if !cap.is_finite() {
            return Err(Error::NonFinite(cap));
        }
        Ok(SolverInstance {
            item_weights,
            cap,
            strict,
            vote: None,
        })
    }

    /// Attaches the round behind the cap: item `j` is expert `positions[j]`,
    /// selected items advise `hidden` and the others advise against it, and a
    /// selection is admissible when the vote comes out against `hidden`.
    /// Within rounding distance of the cap the vote itself decides.
    pub(crate) fn with_vote(
        mut self,
        weights: &[f64],
        signs: Vec<f64>,
        positions: Vec<usize>,
        hidden: f64,
    ) -> Self {
        self.vote = Some(VoteCheck {
            weights: weights.to_vec(),
            magnitude: weights.iter().sum(),
            signs,
            positions,
            hidden,
        });
        self
    }

    pub fn item_weights(&self) -> &[f64] {
        &self.item_weights
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn strict(&self) -> bool {
        self.strict
    }

    pub fn len(&self) -> usize {
        self.item_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.item_weights.is_empty()
    }

    /// Whether a subset sum `g` satisfies the cap constraint.
    pub fn admits(&self, g: f64) -> bool {
        if self.strict {
            g < self.cap
        } else {
            g <= self.cap
        }
    }

    /// Whether the selection built by `selection`, whose float sum is `g`,
    /// is admissible. Equals `admits(g)` unless a vote is attached and `g`
    /// is within rounding distance of the cap.
    pub fn admits_selection(&self, g: f64, selection: impl FnOnce() -> Vec<bool>) -> bool {
        let Some(vote) = &self.vote else {
            return self.admits(g);
        };
        // Generous bound on the rounding in both `g` and `cap`.
        let band = 4.0 * (vote.weights.len() + 4) as f64 * f64::EPSILON * vote.magnitude;
        if (g - self.cap).abs() > band {
            return self.admits(g);
        }
        let mut signs = vote.signs.clone();
        for (&p, x) in vote.positions.iter().zip(selection()) {
            if x {
                signs[p] = vote.hidden;
            }
        }
        let s = crate::mwu::vote_sum(&vote.weights, signs.into_iter());
        // The vote must land on `-hidden`, with zero counting as `+1`.
        if vote.hidden > 0.0 {
            s < 0.0
        } else {
            s >= 0.0
        }
    }

    /// Sum of the selected weights, accumulated in item order.
    pub fn value_of(&self, selection: &[bool]) -> f64 {
        self.item_weights
            .iter()
            .zip(selection)
            .filter(|(_, &x)| x)
            .map(|(w, _)| *w)
            .fold(0.0, |acc, w| acc + w)
    }

    pub fn max_weight(&self) -> f64 {
        self.item_weights.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSolution {
    pub selection: Vec<bool>,
    pub value: f64,
    pub feasible: bool,
}

impl SolverSolution {
    pub(crate) fn infeasible(k: usize) -> Self {
        SolverSolution {
            selection: vec![false; k],
            value: 0.0,
            feasible: false,
        }
    }

    pub fn selected_count(&self) -> usize {
        self.selection.iter().filter(|&&x| x).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverBackend {
    /// Exhaustive search up to `bruteforce_threshold` items, DP beyond.
    #[default]
    Auto,
    BruteForce,
    Dp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub backend: SolverBackend,
    pub bruteforce_threshold: usize,
    /// Fixed DP grid step. `None` picks one per instance, see [`SolverConfig::resolution_for`].
    pub resolution: Option<f64>,
    /// Grid cells spanned by the cap when the resolution is picked automatically.
    pub auto_cells: u64,
    pub table_budget: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            backend: SolverBackend::Auto,
            bruteforce_threshold: 20,
            resolution: None,
            auto_cells: 1 << 14,
            table_budget: DEFAULT_TABLE_BUDGET,
        }
    }
}

impl SolverConfig {
    /// Grid step used by the DP backend for `inst`.
    ///
    /// Without an explicit resolution this is `1e-9 * max weight`, coarsened so
    /// the cap spans at most `auto_cells` cells.
    pub fn resolution_for(&self, inst: &SolverInstance) -> f64 {
        if let Some(r) = self.resolution {
            return r;
        }
        let fine = 1e-9 * inst.max_weight();
        let coarse = inst.cap().max(0.0) / self.auto_cells as f64;
        let r = fine.max(coarse);
        if r > 0.0 {
            r
        } else {
            1.0
        }
    }

    pub fn solve(&self, inst: &SolverInstance) -> Result<SolverSolution> {
        match self.backend {
            SolverBackend::BruteForce => solve_bruteforce(inst),
            SolverBackend::Dp => solve_dp_with_budget(inst, self.resolution_for(inst), self.table_budget),
            SolverBackend::Auto if inst.len() <= self.bruteforce_threshold => {
                solve_bruteforce_with_limit(inst, self.bruteforce_threshold.max(BRUTEFORCE_LIMIT))
            }
            SolverBackend::Auto => {
                solve_dp_with_budget(inst, self.resolution_for(inst), self.table_budget)
            }
        }
    }
}

/// Solves with the default configuration.
pub fn solve(inst: &SolverInstance) -> Result<SolverSolution> {
    SolverConfig::default().solve(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inst(w: &[f64], cap: f64, strict: bool) -> SolverInstance {
        SolverInstance::new(w.to_vec(), cap, strict).unwrap()
    }

    #[test]
    fn instance_validation() {
        assert!(SolverInstance::new(vec![1.0, 0.0], 1.0, true).is_err());
        assert!(SolverInstance::new(vec![-1.0], 1.0, true).is_err());
        assert!(SolverInstance::new(vec![1.0], f64::NAN, true).is_err());
        assert!(SolverInstance::new(vec![], -3.0, true).is_ok());
    }

    #[test]
    fn dispatch_small_matches_bruteforce() {
        let i = inst(&[0.9, 1.0, 1.1], 1.0, true);
        assert_eq!(solve(&i).unwrap(), solve_bruteforce(&i).unwrap());
    }

    #[test]
    fn dispatch_empty_instance() {
        let s = solve(&inst(&[], 1.0, true)).unwrap();
        assert!(s.feasible);
        assert!(s.selection.is_empty());
        assert_eq!(s.value, 0.0);
    }

    #[test]
    fn dispatch_large_uses_dp_within_bound() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let weights: Vec<f64> = (0..25).map(|_| rng.random_range(0.05..2.0)).collect();
        let total: f64 = weights.iter().sum();
        let i = inst(&weights, total * 0.43, true);
        let cfg = SolverConfig::default();
        let res = cfg.resolution_for(&i);
        let got = cfg.solve(&i).unwrap();
        let exact = solve_bruteforce_with_limit(&i, 25).unwrap();
        assert!(got.feasible && i.admits(i.value_of(&got.selection)));
        assert!(got.value <= exact.value);
        assert!(got.value >= exact.value - 25.0 * res, "{} vs {}", got.value, exact.value);
    }

    #[test]
    fn forced_backends() {
        let i = inst(&[1.0, 2.0, 3.0], 4.5, false);
        for backend in [SolverBackend::BruteForce, SolverBackend::Dp] {
            let cfg = SolverConfig {
                backend,
                ..SolverConfig::default()
            };
            let s = cfg.solve(&i).unwrap();
            assert_eq!(s.value, 4.0);
        }
    }

    fn instance_strategy() -> impl Strategy<Value = (Vec<f64>, f64, bool)> {
        (
            proptest::collection::vec(0.01f64..2.0, 0..12),
            -1.0f64..1.2,
            any::<bool>(),
        )
            .prop_map(|(w, frac, strict)| {
                let total: f64 = w.iter().sum();
                (w, frac * total.max(1.0), strict)
            })
    }

    proptest! {
        #[test]
        fn raising_cap_never_hurts((w, cap, strict) in instance_strategy(), bump in 0.0f64..3.0) {
            let lo = solve_bruteforce(&inst(&w, cap, strict)).unwrap();
            let hi = solve_bruteforce(&inst(&w, cap + bump, strict)).unwrap();
            if lo.feasible {
                prop_assert!(hi.feasible);
                prop_assert!(hi.value >= lo.value);
            }
        }

        #[test]
        fn adding_item_never_hurts((w, cap, strict) in instance_strategy(), extra in 0.01f64..2.0) {
            let base = solve_bruteforce(&inst(&w, cap, strict)).unwrap();
            let mut w2 = w.clone();
            w2.push(extra);
            let more = solve_bruteforce(&inst(&w2, cap, strict)).unwrap();
            prop_assert_eq!(base.feasible, more.feasible);
            prop_assert!(more.value >= base.value);
        }

        #[test]
        fn feasible_flag_matches_empty_selection((w, cap, strict) in instance_strategy()) {
            let i = inst(&w, cap, strict);
            let expected = if strict { cap > 0.0 } else { cap >= 0.0 };
            prop_assert_eq!(solve_bruteforce(&i).unwrap().feasible, expected);
            prop_assert_eq!(solve_dp(&i, 1e-3).unwrap().feasible, expected);
        }
    }
}
