//! Fixed-point dynamic program for capped subset-sum.
//!
//! Weights are rounded down to multiples of `resolution` (grid units `u_i`)
//! and the cap to `S = floor(cap / resolution)` units. Over items taken in
//! order, the table follows
//!
//! ```text
//! M(m, c) = max { M(m-1, c - u_m) + u_m, M(m-1, c) },   M(m, c) = -inf for c < 0
//! ```
//!
//! but instead of a single best value per capacity it keeps, for every
//! reachable grid sum `s <= S`, the smallest real-valued subset sum that
//! rounds to it. Picking the best admissible witness gives a selection that
//! satisfies the real constraint exactly and is within `k * resolution` of
//! the true optimum.

use super::{SolverInstance, SolverSolution};
use crate::error::{Error, Result};

/// Upper bound on table cells (reachable grid sums) per instance.
pub const DEFAULT_TABLE_BUDGET: u64 = 1 << 22;

const NIL: u32 = u32::MAX;

pub fn solve_dp(inst: &SolverInstance, resolution: f64) -> Result<SolverSolution> {
    solve_dp_with_budget(inst, resolution, DEFAULT_TABLE_BUDGET)
}

pub fn solve_dp_with_budget(
    inst: &SolverInstance,
    resolution: f64,
    budget: u64,
) -> Result<SolverSolution> {
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(Error::InvalidResolution(resolution));
    }
    let k = inst.len();
    if !inst.admits_selection(0.0, || vec![false; k]) {
        return Ok(SolverSolution::infeasible(k));
    }
    let all = vec![true; k];
    let total = inst.value_of(&all);
    if inst.admits_selection(total, || all.clone()) {
        return Ok(SolverSolution {
            selection: all,
            value: total,
            feasible: true,
        });
    }

    let table = DpTable::build(inst, resolution, budget)?;
    let (s, value) = table
        .best_admissible(inst)
        .expect("the empty selection is admissible");
    let selection = table.selection(s);
    debug_assert_eq!(inst.value_of(&selection), value);
    Ok(SolverSolution {
        selection,
        value,
        feasible: true,
    })
}

/// Witness table over grid sums, built item by item.
#[derive(Debug, Clone)]
pub struct DpTable {
    resolution: f64,
    units: Vec<u64>,
    cap_units: u64,
    /// Reachable grid sums in increasing order, each with its smallest real sum.
    states: Vec<(u64, f64)>,
    trace: Trace,
}

#[derive(Debug, Clone)]
enum Trace {
    /// `took[m]` marks the cells whose witness was improved by item `m`.
    Dense { took: Vec<Vec<u64>> },
    /// Selections as linked lists `(item, parent)`; `heads[j]` belongs to `states[j]`.
    Sparse { nodes: Vec<(u32, u32)>, heads: Vec<u32> },
}

impl DpTable {
    pub fn build(inst: &SolverInstance, resolution: f64, budget: u64) -> Result<DpTable> {
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::InvalidResolution(resolution));
        }
        let weights = inst.item_weights();
        let k = weights.len();
        let scaled_cap = (inst.cap().max(0.0) / resolution).floor();
        if scaled_cap >= u64::MAX as f64 / 4.0 {
            return Err(Error::TableTooLarge {
                cells: u64::MAX,
                budget,
            });
        }
        let cap_units = scaled_cap as u64;
        let units: Vec<u64> = weights
            .iter()
            .map(|w| (w / resolution).floor().min(u64::MAX as f64 / 4.0) as u64)
            .collect();

        let dense_cells = cap_units.saturating_add(1);
        let subset_bound = if k >= 63 { u64::MAX } else { 1u64 << k };
        let cells = dense_cells.min(subset_bound);
        if cells > budget {
            return Err(Error::TableTooLarge { cells, budget });
        }

        let table = if dense_cells <= subset_bound {
            Self::build_dense(weights, units, cap_units)
        } else {
            Self::build_sparse(weights, units, cap_units)
        };
        Ok(DpTable { resolution, ..table })
    }

    fn build_dense(weights: &[f64], units: Vec<u64>, cap_units: u64) -> DpTable {
        let len = cap_units as usize + 1;
        let words = len.div_ceil(64);
        let mut row = vec![f64::INFINITY; len];
        row[0] = 0.0;
        let mut took = Vec::with_capacity(weights.len());
        let mut reach = 0usize;
        for (&w, &u) in weights.iter().zip(&units) {
            let mut bits = vec![0u64; words];
            // Zero-unit items never lower a witness; oversized ones never fit.
            if u > 0 && u <= cap_units {
                let u = u as usize;
                let hi = (reach + u).min(len - 1);
                for s in (u..=hi).rev() {
                    let cand = row[s - u] + w;
                    if cand < row[s] {
                        row[s] = cand;
                        bits[s / 64] |= 1 << (s % 64);
                    }
                }
                reach = hi;
            }
            took.push(bits);
        }
        let states = row
            .iter()
            .enumerate()
            .filter(|(_, r)| r.is_finite())
            .map(|(s, &r)| (s as u64, r))
            .collect();
        DpTable {
            resolution: 0.0,
            units,
            cap_units,
            states,
            trace: Trace::Dense { took },
        }
    }

    fn build_sparse(weights: &[f64], units: Vec<u64>, cap_units: u64) -> DpTable {
        let mut states: Vec<(u64, f64)> = vec![(0, 0.0)];
        let mut heads: Vec<u32> = vec![NIL];
        let mut nodes: Vec<(u32, u32)> = Vec::new();
        for (m, (&w, &u)) in weights.iter().zip(&units).enumerate() {
            if u == 0 || u > cap_units {
                continue;
            }
            let mut next = Vec::with_capacity(states.len() * 2);
            let mut next_heads = Vec::with_capacity(states.len() * 2);
            let limit = states.partition_point(|&(s, _)| s + u <= cap_units);
            let (mut i, mut j) = (0, 0);
            while i < states.len() || j < limit {
                let keep = states.get(i).copied();
                let take = if j < limit {
                    Some((states[j].0 + u, states[j].1 + w))
                } else {
                    None
                };
                let from_take = match (keep, take) {
                    (Some(a), Some(b)) if a.0 == b.0 => {
                        i += 1;
                        j += 1;
                        if b.1 < a.1 {
                            Some((b, j - 1))
                        } else {
                            next.push(a);
                            next_heads.push(heads[i - 1]);
                            None
                        }
                    }
                    (Some(a), Some(b)) if a.0 < b.0 => {
                        i += 1;
                        next.push(a);
                        next_heads.push(heads[i - 1]);
                        None
                    }
                    (Some(a), None) => {
                        i += 1;
                        next.push(a);
                        next_heads.push(heads[i - 1]);
                        None
                    }
                    (_, Some(b)) => {
                        j += 1;
                        Some((b, j - 1))
                    }
                    (None, None) => unreachable!(),
                };
                if let Some((state, parent)) = from_take {
                    nodes.push((m as u32, heads[parent]));
                    next.push(state);
                    next_heads.push((nodes.len() - 1) as u32);
                }
            }
            states = next;
            heads = next_heads;
        }
        DpTable {
            resolution: 0.0,
            units,
            cap_units,
            states,
            trace: Trace::Sparse { nodes, heads },
        }
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// Grid units of each item, `floor(w_i / resolution)`.
    pub fn units(&self) -> &[u64] {
        &self.units
    }

    pub fn cap_units(&self) -> u64 {
        self.cap_units
    }

    /// Number of reachable grid sums.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Smallest real subset sum among selections whose grid sum is `s`.
    pub fn min_real(&self, s: u64) -> Option<f64> {
        self.states
            .binary_search_by_key(&s, |&(x, _)| x)
            .ok()
            .map(|j| self.states[j].1)
    }

    /// `M(k, c)`: the largest reachable grid sum strictly below `c` units,
    /// `None` (minus infinity) when no selection qualifies.
    pub fn best_below(&self, c: i64) -> Option<u64> {
        if c <= 0 {
            return None;
        }
        let j = self.states.partition_point(|&(s, _)| (s as i64) < c);
        Some(self.states[j - 1].0)
    }

    /// Grid sum and value of the heaviest witness admitted by `inst`.
    pub fn best_admissible(&self, inst: &SolverInstance) -> Option<(u64, f64)> {
        self.states
            .iter()
            .rev()
            .filter(|&&(s, r)| inst.admits_selection(r, || self.selection(s)))
            .fold(None, |best: Option<(u64, f64)>, &(s, r)| match best {
                Some((_, b)) if b >= r => best,
                _ => Some((s, r)),
            })
    }

    /// The witness selection stored for grid sum `s`.
    pub fn selection(&self, s: u64) -> Vec<bool> {
        let k = self.units.len();
        let mut sel = vec![false; k];
        match &self.trace {
            Trace::Dense { took } => {
                let mut s = s as usize;
                for m in (0..k).rev() {
                    if took[m][s / 64] >> (s % 64) & 1 == 1 {
                        sel[m] = true;
                        s -= self.units[m] as usize;
                    }
                }
                debug_assert_eq!(s, 0);
            }
            Trace::Sparse { nodes, heads } => {
                let j = self
                    .states
                    .binary_search_by_key(&s, |&(x, _)| x)
                    .expect("grid sum is reachable");
                let mut node = heads[j];
                while node != NIL {
                    let (item, parent) = nodes[node as usize];
                    sel[item as usize] = true;
                    node = parent;
                }
            }
        }
        sel
    }
}

#[cfg(test)]
mod tests {
    use super::super::solve_bruteforce;
    use super::*;
    use proptest::prelude::*;

    fn inst(w: &[f64], cap: f64, strict: bool) -> SolverInstance {
        SolverInstance::new(w.to_vec(), cap, strict).unwrap()
    }

    #[test]
    fn examples() {
        let s = solve_dp(&inst(&[0.9, 1.0, 1.1], 1.0, true), 0.001).unwrap();
        assert_eq!(s.selection, vec![true, false, false]);
        assert_eq!(s.value, 0.9);

        let s = solve_dp(&inst(&[1.0, 2.0, 3.0], 10.0, false), 1.0).unwrap();
        assert_eq!(s.selection, vec![true, true, true]);
        assert_eq!(s.value, 6.0);

        let s = solve_dp(&inst(&[1.0, 1.0, 1.0], 2.0, false), 1.0).unwrap();
        assert_eq!(s.value, 2.0);
        assert_eq!(s.selected_count(), 2);
    }

    #[test]
    fn infeasible_and_errors() {
        let s = solve_dp(&inst(&[1.0, 1.0], 0.0, true), 0.1).unwrap();
        assert!(!s.feasible);
        assert!(matches!(
            solve_dp(&inst(&[1.0], 0.5, true), 0.0),
            Err(Error::InvalidResolution(_))
        ));
        let big = inst(&[0.3; 40], 5.0, true);
        assert!(matches!(
            solve_dp_with_budget(&big, 1e-6, 1 << 20),
            Err(Error::TableTooLarge { .. })
        ));
    }

    #[test]
    fn rounding_never_breaks_the_real_constraint() {
        // 0.9999999 rounds to 999 units at resolution 1e-3; the real cap must
        // still be checked against the unrounded sum.
        let i = inst(&[0.9999999, 0.0004, 0.0007], 1.0, true);
        let s = solve_dp(&i, 1e-3).unwrap();
        assert!(i.admits(s.value));
        let exact = solve_bruteforce(&i).unwrap();
        assert!(s.value >= exact.value - 3.0 * 1e-3);
    }

    #[test]
    fn recurrence_base_and_step() {
        // Integer weights at resolution 1: the table is the textbook subset-sum.
        let i = inst(&[3.0, 5.0, 7.0], 100.0, true);
        let t = DpTable::build(&i, 1.0, 1 << 20).unwrap();
        let reachable: Vec<u64> = t.states.iter().map(|s| s.0).collect();
        assert_eq!(reachable, vec![0, 3, 5, 7, 8, 10, 12, 15]);
        assert_eq!(t.best_below(0), None);
        assert_eq!(t.best_below(-4), None);
        assert_eq!(t.best_below(1), Some(0));
        assert_eq!(t.best_below(12), Some(10));
        assert_eq!(t.best_below(13), Some(12));

        let single = DpTable::build(&inst(&[4.0], 100.0, true), 1.0, 1 << 20).unwrap();
        assert_eq!(single.best_below(4), Some(0));
        assert_eq!(single.best_below(5), Some(4));
    }

    /// M(m, c) by direct recursion over the first m items.
    fn m_ref(units: &[u64], m: usize, c: i64) -> Option<i64> {
        if c <= 0 {
            return None;
        }
        if m == 0 {
            return Some(0);
        }
        let u = units[m - 1] as i64;
        let skip = m_ref(units, m - 1, c);
        let take = m_ref(units, m - 1, c - u).map(|v| v + u);
        skip.max(take)
    }

    proptest! {
        #[test]
        fn best_below_matches_recurrence(
            units in proptest::collection::vec(1u64..9, 1..7),
            c in -3i64..40,
        ) {
            let w: Vec<f64> = units.iter().map(|&u| u as f64).collect();
            let i = inst(&w, 1000.0, true);
            for sparse in [false, true] {
                let t = if sparse {
                    DpTable::build_sparse(&w, units.clone(), 1000)
                } else {
                    DpTable::build_dense(&w, units.clone(), 1000)
                };
                prop_assert_eq!(t.best_below(c).map(|x| x as i64), m_ref(&units, units.len(), c));
            }
            prop_assert!(DpTable::build(&i, 1.0, 1 << 20).is_ok());
        }

        #[test]
        fn dense_and_sparse_agree(
            w in proptest::collection::vec(0.01f64..2.0, 1..10),
            frac in 0.0f64..1.0,
            res_exp in 1i32..4,
        ) {
            let total: f64 = w.iter().sum();
            let cap = frac * total;
            let res = 10f64.powi(-res_exp);
            let units: Vec<u64> = w.iter().map(|x| (x / res).floor() as u64).collect();
            let cap_units = (cap / res).floor() as u64;
            let dense = DpTable::build_dense(&w, units.clone(), cap_units);
            let sparse = DpTable::build_sparse(&w, units, cap_units);
            prop_assert_eq!(&dense.states, &sparse.states);
            for &(s, r) in &dense.states {
                let i = inst(&w, cap, false);
                prop_assert_eq!(i.value_of(&dense.selection(s)), r);
                prop_assert_eq!(i.value_of(&sparse.selection(s)), r);
            }
        }

        #[test]
        fn within_bound_of_bruteforce(
            w in proptest::collection::vec(0.001f64..2.0, 0..15),
            frac in -0.2f64..1.1,
            strict in any::<bool>(),
            res_exp in 2i32..7,
        ) {
            let total: f64 = w.iter().sum();
            let i = inst(&w, frac * total.max(1.0), strict);
            let res = 10f64.powi(-res_exp);
            let exact = solve_bruteforce(&i).unwrap();
            let got = solve_dp(&i, res).unwrap();
            prop_assert_eq!(got.feasible, exact.feasible);
            if got.feasible {
                prop_assert!(i.admits(i.value_of(&got.selection)));
                prop_assert_eq!(i.value_of(&got.selection), got.value);
                prop_assert!(got.value <= exact.value);
                prop_assert!(got.value >= exact.value - w.len() as f64 * res);
            }
        }
    }
}
