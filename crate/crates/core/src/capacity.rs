//! Capacity calculus over suffix windows of the deadline grid.
//!
//! For a task set `S` and grid `0 = tau_0 < tau_1 < ... < tau_L`, window `m`
//! is the slot range `[tau_{L-m} + 1, tau_L]`:
//!
//! * `lambda_m(S)`: most workload `S` can place in window `m` with unlimited
//!   machines, `sum_j min(D_j, k_j * max(0, d_j - tau_{L-m}))`.
//! * `lambda^C_m(S)`: the same on `C` machines, built window by window by
//!   capping each new segment at `C * (tau_{L-m+1} - tau_{L-m})`.
//! * `mu^C_m(S) = sum_j D_j - lambda^C_{L-m}(S)`: work left for `[1, tau_m]`.
//!
//! `S` is schedulable on `C` machines iff `mu^C_m(S) <= C * tau_m` for every
//! `m` in `0..=L` (the boundary condition).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DeadlineProfile, Instance, Task};

/// The scheduling-relevant shape of a task: demand, deadline and parallelism.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Workload {
    pub demand: u64,
    pub deadline: usize,
    pub parallelism: u64,
}

impl Workload {
    /// Most of this task that fits in the slots after `start`.
    #[inline]
    pub fn after(&self, start: usize) -> u64 {
        let window = self.deadline.saturating_sub(start) as u64;
        self.demand.min(self.parallelism.saturating_mul(window))
    }
}

impl From<&Task> for Workload {
    fn from(t: &Task) -> Self {
        Workload { demand: t.demand, deadline: t.deadline, parallelism: t.parallelism }
    }
}

/// Task id to replacement deadline.
pub type DeadlineOverrides = HashMap<String, usize>;

/// Workloads of `subset`, with deadlines replaced where `overrides` says so.
pub fn subset_workloads(inst: &Instance, subset: &[usize], overrides: Option<&DeadlineOverrides>) -> Vec<Workload> {
    subset
        .iter()
        .map(|&i| {
            let t = inst.task(i);
            let mut w = Workload::from(t);
            if let Some(d) = overrides.and_then(|o| o.get(&t.id)) {
                w.deadline = *d;
            }
            w
        })
        .collect()
}

/// Result of evaluating the capacity formulas on one task set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapacityReport {
    /// `lambda_0 ..= lambda_L`.
    pub lambda: Vec<u64>,
    /// `lambda^C_0 ..= lambda^C_L`.
    pub lambda_capped: Vec<u64>,
    /// `mu^C_0 ..= mu^C_L`.
    pub residual: Vec<u64>,
    pub feasible: bool,
    /// Smallest `m` with `mu^C_m > C * tau_m`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_violation: Option<usize>,
}

/// `lambda_m(S)` for a single `m` in `0..=L`.
pub fn lambda_unbounded(profile: &DeadlineProfile, tasks: &[Workload], m: usize) -> Result<u64> {
    let l = profile.len();
    if m > l {
        return Err(Error::IndexOutOfRange { index: m, max: l });
    }
    if m == 0 {
        return Ok(0);
    }
    let start = profile.tau(l - m);
    Ok(tasks.iter().map(|w| w.after(start)).sum())
}

/// `(lambda_0..=lambda_L, lambda^C_0..=lambda^C_L)`.
pub fn lambda_capped(profile: &DeadlineProfile, tasks: &[Workload], machines: u64) -> (Vec<u64>, Vec<u64>) {
    let l = profile.len();
    let mut lambda = vec![0u64; l + 1];
    let mut capped = vec![0u64; l + 1];
    for m in 1..=l {
        let start = profile.tau(l - m);
        lambda[m] = tasks.iter().map(|w| w.after(start)).sum();
        let segment = machines * (profile.tau(l - m + 1) - start) as u64;
        capped[m] = capped[m - 1] + lambda[m].saturating_sub(capped[m - 1]).min(segment);
    }
    (lambda, capped)
}

/// Evaluates the boundary condition of `tasks` on `machines` machines over
/// the grid `profile`. The grid must contain every task deadline; extra grid
/// points are allowed.
pub fn boundary_condition(profile: &DeadlineProfile, tasks: &[Workload], machines: u64) -> CapacityReport {
    let l = profile.len();
    let (lambda, lambda_capped) = lambda_capped(profile, tasks, machines);
    let total: u64 = tasks.iter().map(|w| w.demand).sum();
    let residual: Vec<u64> = (0..=l).map(|m| total - lambda_capped[l - m]).collect();
    let first_violation = (0..=l).find(|&m| residual[m] > machines * profile.tau(m) as u64);
    CapacityReport { lambda, lambda_capped, residual, feasible: first_violation.is_none(), first_violation }
}

/// Boundary condition of a task subset of `inst` on its own deadline grid.
pub fn check_subset(inst: &Instance, subset: &[usize], overrides: Option<&DeadlineOverrides>) -> CapacityReport {
    check_workloads(&subset_workloads(inst, subset, overrides), inst.machines())
}

/// Boundary condition of bare workloads on their own deadline grid.
pub fn check_workloads(tasks: &[Workload], machines: u64) -> CapacityReport {
    let profile = DeadlineProfile::from_deadlines(tasks.iter().map(|w| w.deadline));
    boundary_condition(&profile, tasks, machines)
}

/// Whether `tasks` can be completed on `machines` machines.
pub fn is_feasible(tasks: &[Workload], machines: u64) -> bool {
    if tasks.iter().any(|w| w.deadline == 0) {
        return false;
    }
    check_workloads(tasks, machines).feasible
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(demand: u64, deadline: usize, parallelism: u64) -> Workload {
        Workload { demand, deadline, parallelism }
    }

    #[test]
    fn unbounded_examples() {
        let tasks = [w(4, 4, 2), w(2, 2, 1)];
        let p = DeadlineProfile::from_deadlines([2, 4]);
        assert_eq!(lambda_unbounded(&p, &[], 1).unwrap(), 0);
        assert_eq!(lambda_unbounded(&p, &tasks, 0).unwrap(), 0);
        assert_eq!(lambda_unbounded(&p, &tasks, 1).unwrap(), 4);
        assert_eq!(lambda_unbounded(&p, &tasks, 2).unwrap(), 6);
        assert_eq!(lambda_unbounded(&p, &tasks, 3), Err(Error::IndexOutOfRange { index: 3, max: 2 }));
    }

    #[test]
    fn capped_examples() {
        let p = DeadlineProfile::from_deadlines([2, 4]);
        let (_, capped) = lambda_capped(&p, &[w(4, 4, 2), w(2, 2, 1)], 2);
        assert_eq!(capped, vec![0, 4, 6]);

        let p = DeadlineProfile::from_deadlines([2]);
        let (lambda, capped) = lambda_capped(&p, &[w(4, 2, 2), w(2, 2, 1)], 2);
        assert_eq!(lambda, vec![0, 6]);
        assert_eq!(capped, vec![0, 4]);

        // capacity never binds
        let tasks = [w(3, 3, 2), w(2, 5, 1), w(5, 5, 3)];
        let p = DeadlineProfile::from_deadlines([3, 5]);
        let big = tasks.iter().map(|t| t.parallelism * t.deadline as u64).sum();
        let (lambda, capped) = lambda_capped(&p, &tasks, big);
        assert_eq!(lambda, capped);
    }

    #[test]
    fn boundary_examples() {
        let r = check_workloads(&[w(4, 4, 2), w(2, 2, 1)], 2);
        assert!(r.feasible);
        assert_eq!(r.residual, vec![0, 2, 6]);

        let r = check_workloads(&[w(4, 2, 2), w(2, 2, 1)], 2);
        assert!(!r.feasible);
        assert_eq!(r.first_violation, Some(0));
        assert_eq!(r.residual[0], 2);

        let r = check_workloads(&[], 3);
        assert!(r.feasible);
        assert_eq!(r.residual, vec![0]);
    }

    #[test]
    fn extra_grid_points_do_not_change_the_verdict() {
        let tasks = [w(4, 4, 2), w(2, 2, 1), w(3, 6, 1)];
        for c in 1..4 {
            let own = check_workloads(&tasks, c).feasible;
            let fine = DeadlineProfile::from_deadlines(1..=7);
            assert_eq!(boundary_condition(&fine, &tasks, c).feasible, own);
        }
    }

    #[test]
    fn individually_infeasible_task_fails() {
        assert!(!check_workloads(&[w(4, 3, 1)], 10).feasible);
        assert!(!is_feasible(&[w(1, 0, 1)], 10));
    }
}
