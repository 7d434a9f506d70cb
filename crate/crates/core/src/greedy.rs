//! Greedy welfare maximization with phase thresholds.
//!
//! Tasks are considered by non-increasing marginal value. A task is accepted
//! when the free capacity it could grab covers its demand and is then placed
//! with `allocate_a`. Each maximal run of rejected tasks closes a phase and
//! fixes a threshold slot; later phases never move earlier tasks' load into
//! slots at or below it. With instance slackness `s`, the accepted value is
//! at least `(s - 1) / s` of the optimum.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::ldf::{Scheduler, TraceEvent};
use crate::matrix::AllocationMatrix;
use crate::model::{derive_metrics, Instance, Value};

/// One phase: a run of accepted tasks followed by a run of rejected ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phase {
    /// Phase number `m`. Numbering starts at 1; a rejection run before any
    /// acceptance is recorded as phase 0 with no accepted tasks.
    pub index: usize,
    pub accepted: Vec<usize>,
    pub rejected: Vec<usize>,
    /// Largest deadline among all tasks rejected so far.
    pub c: usize,
    /// Largest deadline among all tasks accepted so far.
    pub c_prime: usize,
    /// `None` for a final phase that ended without a rejection.
    pub threshold: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseLog {
    pub phases: Vec<Phase>,
}

impl PhaseLog {
    /// Number of phases with at least one accepted task, `K`.
    pub fn phase_count(&self) -> usize {
        self.phases.iter().filter(|p| p.index > 0).count()
    }

    /// Defined thresholds in phase order, as `(m, t_m)`.
    pub fn thresholds(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.phases.iter().filter_map(|p| p.threshold.map(|t| (p.index, t)))
    }

    pub fn has_rejections(&self) -> bool {
        self.phases.iter().any(|p| !p.rejected.is_empty())
    }
}

#[derive(Debug, Clone)]
pub struct GreedyResult {
    pub matrix: AllocationMatrix,
    /// Accepted task indices in acceptance order.
    pub accepted: Vec<usize>,
    pub welfare: Value,
    pub phases: PhaseLog,
    /// Instance slackness `s` (minimum task slackness); `None` when empty.
    pub slackness: Option<Value>,
    /// Guaranteed fraction of the optimum, `(s - 1) / s`, floored at zero.
    pub ratio_bound: Value,
    pub trace: Vec<TraceEvent>,
}

/// Consideration order: non-increasing marginal value, then larger value,
/// then input order.
pub fn greedy_order(inst: &Instance) -> Vec<usize> {
    let marginal: Vec<Value> = inst.tasks().iter().map(|t| derive_metrics(t).marginal_value).collect();
    let mut order: Vec<usize> = (0..inst.len()).collect();
    order.sort_by(|&a, &b| {
        marginal[b]
            .cmp(&marginal[a])
            .then_with(|| inst.task(b).value.cmp(&inst.task(a).value))
            .then(a.cmp(&b))
    });
    order
}

/// `(s - 1) / s`, or zero when `s <= 1`.
pub fn ratio_bound(slackness: Option<&Value>) -> Value {
    match slackness {
        Some(s) if *s > Value::one() => (s - Value::one()) / s,
        _ => Value::zero(),
    }
}

/// Runs the greedy solver.
pub fn greedy_rlm(inst: &Instance) -> Result<GreedyResult> {
    run(inst, false)
}

/// [`greedy_rlm`] recording the change trace.
pub fn greedy_rlm_traced(inst: &Instance) -> Result<GreedyResult> {
    run(inst, true)
}

fn run(inst: &Instance, traced: bool) -> Result<GreedyResult> {
    let order = greedy_order(inst);
    let mut sched = if traced { Scheduler::traced(inst) } else { Scheduler::new(inst) };
    let mut phases = Vec::new();
    let mut accepted = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    let (mut c, mut c_prime) = (0usize, 0usize);
    let mut numbered = 0;
    let mut pos = 0;
    while pos < order.len() {
        let i = order[pos];
        pos += 1;
        if sched.admits(i) {
            sched.allocate_a(i)?;
            accepted.push(i);
            current.push(i);
            c_prime = c_prime.max(inst.task(i).deadline);
            continue;
        }
        let mut rejected = vec![i];
        while pos < order.len() && !sched.admits(order[pos]) {
            rejected.push(order[pos]);
            pos += 1;
        }
        c = rejected.iter().map(|&j| inst.task(j).deadline).fold(c, usize::max);
        let threshold = if c >= c_prime {
            c
        } else {
            let m = sched.matrix();
            (c + 1..=c_prime).find(|&t| m.free(t) > 0).map_or(c_prime, |t| t - 1)
        };
        sched.set_threshold(threshold);
        let index = if current.is_empty() { 0 } else { numbered += 1; numbered };
        phases.push(Phase {
            index,
            accepted: std::mem::take(&mut current),
            rejected,
            c,
            c_prime,
            threshold: Some(threshold),
        });
    }
    if !current.is_empty() {
        phases.push(Phase { index: numbered + 1, accepted: current, rejected: Vec::new(), c, c_prime, threshold: None });
    }
    let welfare = inst.value_of(&accepted);
    let slackness = inst.slackness();
    let ratio_bound = ratio_bound(slackness.as_ref());
    let (matrix, trace) = sched.into_parts();
    Ok(GreedyResult { matrix, accepted, welfare, phases: PhaseLog { phases }, slackness, ratio_bound, trace })
}

/// Utilization check: for every phase `m >= 1` that set a threshold `t_m`,
/// the tasks accepted in phases `1..=m` hold at least `r * C * t_m`
/// machine-slots of `[1, t_m]` in the final matrix. Vacuously true without
/// rejections.
pub fn check_feature1(inst: &Instance, result: &GreedyResult, r: &Value) -> bool {
    let m = &result.matrix;
    let c = Value::from_integer(BigInt::from(inst.machines()));
    let mut so_far: Vec<usize> = Vec::new();
    for phase in &result.phases.phases {
        so_far.extend(&phase.accepted);
        let (Some(t), true) = (phase.threshold, phase.index > 0) else {
            continue;
        };
        let used: u64 = so_far.iter().map(|&i| m.prefix(i, t)).sum();
        let used = Value::from_integer(BigInt::from(used));
        let need = r * &c * Value::from_integer(BigInt::from(t));
        if used.cmp(&need) == Ordering::Less {
            return false;
        }
    }
    true
}

/// Suffix-optimality check: every task accepted in phase `m` uses, after
/// each threshold `t_j` with `j >= m` (and after slot 0), as much as it
/// possibly could: `sum_{t > t_j} y_i(t) = min(D_i, k_i * max(0, d_i - t_j))`.
pub fn check_feature2(inst: &Instance, result: &GreedyResult) -> bool {
    feature2_violations(inst, result).is_empty()
}

/// Violations of [`check_feature2`] as `(task, threshold)` pairs.
pub fn feature2_violations(inst: &Instance, result: &GreedyResult) -> Vec<(usize, usize)> {
    let m = &result.matrix;
    let phases = &result.phases.phases;
    let mut out = Vec::new();
    for (pos, phase) in phases.iter().enumerate() {
        let later = phases[pos..].iter().filter_map(|p| p.threshold);
        let cuts: Vec<usize> = std::iter::once(0).chain(later).collect();
        for &i in &phase.accepted {
            let task = inst.task(i);
            for &t_hat in &cuts {
                let best = task.max_in_window(task.deadline.saturating_sub(t_hat));
                if m.suffix(i, t_hat) != best {
                    out.push((i, t_hat));
                }
            }
        }
    }
    out
}

/// Changes made after a threshold was set to earlier-accepted tasks at slots
/// at or below it, as `(task, slot)`. Needs a traced result; an untraced one
/// yields nothing.
pub fn barrier_violations(result: &GreedyResult) -> Vec<(usize, usize)> {
    use crate::ldf::TraceOp;
    // (number of completed tasks when the threshold took effect, threshold)
    let mut barriers = Vec::new();
    let mut done = 0;
    for phase in &result.phases.phases {
        done += phase.accepted.len();
        if let Some(t) = phase.threshold {
            barriers.push((done, t));
        }
    }
    let mut finished = vec![false; result.matrix.tasks()];
    let mut done = 0;
    let mut out = Vec::new();
    for e in &result.trace {
        if e.op == TraceOp::Done {
            finished[e.task] = true;
            done += 1;
            continue;
        }
        let Some(&(_, t)) = barriers.iter().rev().find(|(at, _)| *at <= done) else {
            continue;
        };
        if !finished[e.task] {
            continue;
        }
        for slot in [e.from_slot, e.to_slot] {
            if slot != 0 && slot <= t {
                out.push((e.task, slot));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::adversarial_instance;
    use crate::model::{int_value, parse_decimal, Task};

    fn q(s: &str) -> Value {
        parse_decimal(s).unwrap()
    }

    #[test]
    fn order_ties() {
        let inst = Instance::new(
            1,
            vec![Task::int("a", 2, 2, 3, 1), Task::int("b", 4, 4, 3, 1), Task::int("c", 3, 1, 3, 1), Task::int("d", 2, 2, 3, 1)],
        )
        .unwrap();
        assert_eq!(greedy_order(&inst), vec![2, 1, 0, 3]);
    }

    #[test]
    fn admission_examples() {
        let inst = Instance::new(2, vec![Task::int("a", 1, 3, 2, 2), Task::int("b", 1, 4, 3, 1)]).unwrap();
        let s = Scheduler::new(&inst);
        assert!(s.admits(0));
        assert!(!s.admits(1), "slackness below one");
    }

    #[test]
    fn adversarial_family_trace() {
        let inst = adversarial_instance(2, 2, 4, &q("0.1")).unwrap();
        let r = greedy_rlm(&inst).unwrap();
        assert_eq!(r.welfare, q("4.4"));
        assert_eq!(r.accepted.len(), 4);
        let phase = &r.phases.phases[0];
        assert_eq!(phase.index, 1);
        assert_eq!(phase.rejected, vec![4, 5]);
        assert_eq!((phase.c, phase.c_prime, phase.threshold), (4, 2, Some(4)));
        assert_eq!(r.slackness, Some(Value::new(4.into(), 3.into())));
        assert_eq!(r.ratio_bound, Value::new(1.into(), 4.into()));

        // D2 task after the units filled [1, 2]: only slots 3 and 4 remain
        let mut s = Scheduler::new(&inst);
        for i in 0..4 {
            s.allocate_a(i).unwrap();
        }
        assert!(!s.admits(4));

        assert!(check_feature1(&inst, &r, &q("0.25")));
        assert!(!check_feature1(&inst, &r, &int_value(1)));
        assert!(check_feature2(&inst, &r));
    }

    #[test]
    fn everything_fits() {
        let inst = Instance::new(10, vec![Task::int("a", 3, 4, 2, 2), Task::int("b", 5, 3, 3, 1), Task::int("c", 1, 6, 3, 3)]).unwrap();
        let r = greedy_rlm(&inst).unwrap();
        assert_eq!(r.welfare, int_value(9));
        assert!(!r.phases.has_rejections());
        assert!(check_feature1(&inst, &r, &int_value(1)));
        assert!(check_feature2(&inst, &r));
    }

    #[test]
    fn leading_rejection_is_phase_zero() {
        // parallelism above the machine count: rejected on empty machines
        let inst = Instance::new(1, vec![Task::int("big", 100, 4, 2, 2), Task::int("ok", 1, 1, 1, 1)]).unwrap();
        let r = greedy_rlm(&inst).unwrap();
        assert_eq!(r.phases.phases[0].index, 0);
        assert!(r.phases.phases[0].accepted.is_empty());
        assert_eq!(r.phases.phases[0].threshold, Some(2));
        assert_eq!(r.accepted, vec![1]);
        assert_eq!(r.phases.phase_count(), 1);
    }

    #[test]
    fn single_task_is_right_packed() {
        let inst = Instance::new(3, vec![Task::int("a", 1, 5, 4, 2)]).unwrap();
        let r = greedy_rlm(&inst).unwrap();
        assert_eq!(r.matrix.row(0), &[0, 1, 2, 2]);
        assert!(check_feature2(&inst, &r));
    }
}
