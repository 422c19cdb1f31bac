use super::{SolverInstance, SolverSolution};
use crate::error::{Error, Result};

/// Enumeration guard for [`solve_bruteforce`].
pub const BRUTEFORCE_LIMIT: usize = 30;

/// Exhaustive search over all `2^k` selections.
///
/// Among selections of equal value the lexicographically smallest `X` wins.
pub fn solve_bruteforce(inst: &SolverInstance) -> Result<SolverSolution> {
    solve_bruteforce_with_limit(inst, BRUTEFORCE_LIMIT)
}

pub fn solve_bruteforce_with_limit(inst: &SolverInstance, limit: usize) -> Result<SolverSolution> {
    let k = inst.len();
    if k > limit {
        return Err(Error::TooManyItems { items: k, limit });
    }
    if !inst.admits_selection(0.0, || vec![false; k]) {
        return Ok(SolverSolution::infeasible(k));
    }

    let weights = inst.item_weights();
    let mut suffix = vec![0.0; k + 1];
    for i in (0..k).rev() {
        suffix[i] = suffix[i + 1] + weights[i];
    }

    let mut search = Search {
        inst,
        weights,
        suffix,
        // Rounding slack on the optimistic bound; far above k * ulp for k <= 64.
        bound_factor: 1.0 + 1e-12,
        current: vec![false; k],
        best: vec![false; k],
        best_value: 0.0,
    };
    // The empty selection is feasible and is the lexicographically smallest
    // candidate, so it seeds the incumbent.
    search.descend(0, 0.0);

    Ok(SolverSolution {
        selection: search.best,
        value: search.best_value,
        feasible: true,
    })
}

struct Search<'a> {
    inst: &'a SolverInstance,
    weights: &'a [f64],
    suffix: Vec<f64>,
    bound_factor: f64,
    current: Vec<bool>,
    best: Vec<bool>,
    best_value: f64,
}

impl Search<'_> {
    // Visits selections in lexicographic order (exclude before include) and
    // only replaces the incumbent on strict improvement.
    fn descend(&mut self, i: usize, partial: f64) {
        if i == self.weights.len() {
            if partial > self.best_value {
                self.best_value = partial;
                self.best.copy_from_slice(&self.current);
            }
            return;
        }
        if (partial + self.suffix[i]) * self.bound_factor <= self.best_value {
            return;
        }
        self.descend(i + 1, partial);
        let with = partial + self.weights[i];
        self.current[i] = true;
        // Sums only grow along a branch, so an inadmissible prefix prunes it.
        if self.inst.admits_selection(with, || self.current.clone()) {
            self.descend(i + 1, with);
        }
        self.current[i] = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(w: &[f64], cap: f64, strict: bool) -> SolverInstance {
        SolverInstance::new(w.to_vec(), cap, strict).unwrap()
    }

    /// Plain mask enumeration, no pruning.
    fn enumerate(i: &SolverInstance) -> Option<(Vec<bool>, f64)> {
        let k = i.len();
        let mut best: Option<(Vec<bool>, f64)> = None;
        // Item 0 is the most significant bit so numeric order is lexicographic.
        for code in 0u64..(1 << k) {
            let sel: Vec<bool> = (0..k).map(|j| code >> (k - 1 - j) & 1 == 1).collect();
            let v = i.value_of(&sel);
            if i.admits(v) && best.as_ref().is_none_or(|(_, b)| v > *b) {
                best = Some((sel, v));
            }
        }
        best
    }

    #[test]
    fn examples() {
        let s = solve_bruteforce(&inst(&[0.9, 1.0, 1.1], 1.0, true)).unwrap();
        assert_eq!(s.selection, vec![true, false, false]);
        assert_eq!(s.value, 0.9);

        let s = solve_bruteforce(&inst(&[1.0, 1.0], 0.5, true)).unwrap();
        assert!(s.feasible);
        assert_eq!(s.selection, vec![false, false]);
        assert_eq!(s.value, 0.0);

        let s = solve_bruteforce(&inst(&[1.0, 1.0], 0.0, true)).unwrap();
        assert!(!s.feasible);
        assert_eq!(s.selection, vec![false, false]);

        let s = solve_bruteforce(&inst(&[0.5, 0.8, 1.1], 1.5, true)).unwrap();
        assert_eq!(s.selection, vec![true, true, false]);
        assert!((s.value - 1.3).abs() < 1e-15);
    }

    #[test]
    fn non_strict_zero_cap_is_feasible() {
        let s = solve_bruteforce(&inst(&[1.0], 0.0, false)).unwrap();
        assert!(s.feasible);
        assert_eq!(s.value, 0.0);
    }

    #[test]
    fn ties_pick_lexicographically_smallest() {
        let s = solve_bruteforce(&inst(&[1.0, 1.0, 1.0], 2.0, false)).unwrap();
        assert_eq!(s.selection, vec![false, true, true]);
        let s = solve_bruteforce(&inst(&[1.0, 1.0], 1.5, true)).unwrap();
        assert_eq!(s.selection, vec![false, true]);
    }

    #[test]
    fn guard() {
        let i = inst(&[1.0; 31], 3.0, true);
        assert!(matches!(
            solve_bruteforce(&i),
            Err(Error::TooManyItems { items: 31, limit: 30 })
        ));
        assert!(solve_bruteforce_with_limit(&i, 31).is_ok());
    }

    #[test]
    fn agrees_with_mask_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let k = rng.random_range(0..10);
            // Quantised weights create plenty of exact ties.
            let w: Vec<f64> = (0..k).map(|_| rng.random_range(1..6) as f64 * 0.25).collect();
            let total: f64 = w.iter().sum();
            let cap = rng.random_range(-0.5..1.1) * total.max(1.0);
            let i = inst(&w, cap, rng.random());
            let got = solve_bruteforce(&i).unwrap();
            match enumerate(&i) {
                None => assert!(!got.feasible),
                Some((sel, v)) => {
                    assert!(got.feasible);
                    assert_eq!(got.selection, sel);
                    assert_eq!(got.value, v);
                }
            }
        }
    }
}
