//! Exact welfare maximization by dynamic programming over capacity states.
//!
//! A feasible set `F` is summarized by its state vector `H(F)`, the
//! per-window increments of `lambda^C(F)` on the instance's deadline grid.
//! Whether `F` plus another task is feasible, and the resulting state, depend
//! only on `H(F)` and that task, so among sets with equal state only one of
//! maximal value needs to survive. The list size is bounded by
//! `prod_m (C * (tau_{L-m+1} - tau_{L-m}) + 1)`.

use std::collections::HashMap;

use num_traits::Zero;

use crate::capacity::{lambda_capped, Workload};
use crate::error::{Error, Result};
use crate::ldf::{ldf_schedule, LdfOutcome};
use crate::matrix::AllocationMatrix;
use crate::model::{DeadlineProfile, Instance, Value};

/// Refuse to run when `(C * d + 1)^L` exceeds this many states.
pub const DEFAULT_STATE_BUDGET: u64 = 10_000_000;

/// `H(F)`: `h_m = lambda^C_m(F) - lambda^C_{m-1}(F)` for `m = 1..=L`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateVector(pub Vec<u64>);

impl StateVector {
    /// `lambda^C_0..=lambda^C_L` recovered from the increments.
    pub fn cumulative(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.0.len() + 1);
        out.push(0);
        for h in &self.0 {
            out.push(out.last().unwrap() + h);
        }
        out
    }

    fn from_cumulative(g: &[u64]) -> Self {
        StateVector(g.windows(2).map(|w| w[1] - w[0]).collect())
    }
}

/// `H(F)` of `tasks` on the grid `profile`.
pub fn state_vector(profile: &DeadlineProfile, tasks: &[Workload], machines: u64) -> StateVector {
    StateVector::from_cumulative(&lambda_capped(profile, tasks, machines).1)
}

/// A surviving `(set, value)` pair of the final list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DpPair {
    pub state: StateVector,
    pub value: Value,
    /// Task indices in increasing order.
    pub subset: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DpStats {
    /// `|A(j)|` after each task `j`.
    pub list_sizes: Vec<usize>,
    /// `prod_m (c_m + 1)`, saturating.
    pub state_bound: u128,
}

#[derive(Debug, Clone)]
pub struct DpSelection {
    pub subset: Vec<usize>,
    pub welfare: Value,
    pub stats: DpStats,
    /// Every pair of the final list, in insertion order.
    pub pairs: Vec<DpPair>,
}

#[derive(Debug, Clone)]
pub struct DpSolution {
    pub subset: Vec<usize>,
    pub welfare: Value,
    pub matrix: AllocationMatrix,
    pub stats: DpStats,
}

/// `(C * d + 1)^L`, saturating at `u128::MAX`.
pub fn state_space_bound(machines: u64, horizon: usize, grid_len: usize) -> u128 {
    let base = machines as u128 * horizon as u128 + 1;
    let exp = u32::try_from(grid_len).unwrap_or(u32::MAX);
    base.checked_pow(exp).unwrap_or(u128::MAX)
}

pub fn dp_select(inst: &Instance) -> Result<DpSelection> {
    dp_select_with_budget(inst, DEFAULT_STATE_BUDGET)
}

struct Entry {
    g: Vec<u64>,
    value: Value,
    link: Option<usize>,
}

/// Runs the DP over tasks in input order. Refuses with
/// [`Error::StateBudget`] when `(C * d + 1)^L > budget`.
pub fn dp_select_with_budget(inst: &Instance, budget: u64) -> Result<DpSelection> {
    let c = inst.machines();
    let profile = DeadlineProfile::from_deadlines(inst.tasks().iter().map(|t| t.deadline));
    let l = profile.len();
    let bound = state_space_bound(c, profile.horizon(), l);
    if bound > budget as u128 {
        return Err(Error::StateBudget { bound: bound.to_string(), budget });
    }
    let seg: Vec<u64> = (1..=l).map(|m| c * (profile.tau(l - m + 1) - profile.tau(l - m)) as u64).collect();
    let state_bound = seg.iter().fold(1u128, |acc, s| acc.saturating_mul(*s as u128 + 1));

    // predecessor links: (task, previous link)
    let mut arena: Vec<(usize, Option<usize>)> = Vec::new();
    let mut list = vec![Entry { g: vec![0; l + 1], value: Value::zero(), link: None }];
    let mut index: HashMap<Vec<u64>, usize> = HashMap::from([(vec![0; l + 1], 0)]);
    let mut list_sizes = Vec::with_capacity(inst.len());

    for (j, task) in inst.tasks().iter().enumerate() {
        let w = Workload::from(task);
        let a: Vec<u64> = (0..=l).map(|m| if m == 0 { 0 } else { w.after(profile.tau(l - m)) }).collect();
        // extend A(j-1) as it stood before task j, then merge
        let extensions: Vec<(Vec<u64>, Value, Option<usize>)> = list
            .iter()
            .filter_map(|e| {
                let g = extend(&e.g, &a, &seg, w.demand, &profile, c)?;
                Some((g, &e.value + &task.value, e.link))
            })
            .collect();
        for (g, value, parent) in extensions {
            match index.get(&g) {
                Some(&q) if list[q].value >= value => {}
                found => {
                    arena.push((j, parent));
                    let entry = Entry { g: g.clone(), value, link: Some(arena.len() - 1) };
                    match found {
                        Some(&q) => list[q] = entry,
                        None => {
                            index.insert(g, list.len());
                            list.push(entry);
                        }
                    }
                }
            }
        }
        list_sizes.push(list.len());
    }

    let subset_of = |mut link: Option<usize>| {
        let mut s = Vec::new();
        while let Some(n) = link {
            s.push(arena[n].0);
            link = arena[n].1;
        }
        s.reverse();
        s
    };
    let best = list
        .iter()
        .enumerate()
        .fold(0, |b, (i, e)| if e.value > list[b].value { i } else { b });
    let pairs: Vec<DpPair> = list
        .iter()
        .map(|e| DpPair { state: StateVector::from_cumulative(&e.g), value: e.value.clone(), subset: subset_of(e.link) })
        .collect();
    Ok(DpSelection {
        subset: pairs[best].subset.clone(),
        welfare: list[best].value.clone(),
        stats: DpStats { list_sizes, state_bound },
        pairs,
    })
}

/// `lambda^C` of `F + task` from `lambda^C(F)` and the task's per-window
/// maxima `a`, or `None` when the union breaks the boundary condition.
fn extend(g: &[u64], a: &[u64], seg: &[u64], demand: u64, profile: &DeadlineProfile, c: u64) -> Option<Vec<u64>> {
    let l = g.len() - 1;
    let mut next = vec![0u64; l + 1];
    for m in 1..=l {
        next[m] = (g[m] + a[m]).min(next[m - 1] + seg[m - 1]);
    }
    let total = g[l] + demand;
    (0..=l).all(|m| total - next[l - m] <= c * profile.tau(m) as u64).then_some(next)
}

/// [`dp_select`] followed by the optimal scheduler on the chosen set.
pub fn dp_solve(inst: &Instance) -> Result<DpSolution> {
    dp_solve_with_budget(inst, DEFAULT_STATE_BUDGET)
}

pub fn dp_solve_with_budget(inst: &Instance, budget: u64) -> Result<DpSolution> {
    let sel = dp_select_with_budget(inst, budget)?;
    match ldf_schedule(inst, &sel.subset)? {
        LdfOutcome::Feasible(s) => Ok(DpSolution { subset: sel.subset, welfare: sel.welfare, matrix: s.matrix, stats: sel.stats }),
        LdfOutcome::Infeasible(_) => Err(Error::Invariant("the selected set fails the optimal scheduler".into())),
    }
}
