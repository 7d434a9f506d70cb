//! Objectives reduced to the feasibility test: fewest machines, and smallest
//! maximum weighted lateness or completion time.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::capacity::{is_feasible, Workload};
use crate::error::{Error, Result};
use crate::ldf::{ldf_schedule_all, LdfOutcome};
use crate::matrix::AllocationMatrix;
use crate::model::{Instance, Value};

#[derive(Debug, Clone)]
pub struct MachineMinimum {
    /// Smallest feasible machine count; 0 for an empty instance.
    pub machines: u64,
    /// Optimal schedule on that many machines (empty for an empty instance).
    pub matrix: AllocationMatrix,
}

fn workloads(inst: &Instance) -> Vec<Workload> {
    inst.tasks().iter().map(Workload::from).collect()
}

/// Smallest `C` for which the whole task set is schedulable, by binary
/// search between `max_i ceil(D_i / d_i)` and `sum_i k_i`.
pub fn minimize_machines(inst: &Instance) -> Result<MachineMinimum> {
    if inst.is_empty() {
        return Ok(MachineMinimum { machines: 0, matrix: AllocationMatrix::new(0, 0, 0) });
    }
    if let Some(t) = inst.tasks().iter().find(|t| !t.individually_feasible()) {
        return Err(Error::InfeasibleAtAnyMachineCount { task: t.id.clone() });
    }
    let tasks = workloads(inst);
    let mut lo = tasks.iter().map(|w| w.demand.div_ceil(w.deadline as u64)).max().unwrap_or(1).max(1);
    // every task at full parallelism at once always fits
    let mut hi = tasks.iter().map(|w| w.parallelism).sum::<u64>().max(lo);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if is_feasible(&tasks, mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let at = inst.with_machines(lo)?;
    match ldf_schedule_all(&at)? {
        LdfOutcome::Feasible(s) => Ok(MachineMinimum { machines: lo, matrix: s.matrix }),
        LdfOutcome::Infeasible(_) => Err(Error::Invariant(format!("no schedule on {lo} machines after a feasible probe"))),
    }
}

/// Which weighted objective to minimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightedMode {
    /// `max_i v_i * (completion_i - d_i)`.
    Lateness,
    /// `max_i v_i * completion_i`.
    Completion,
}

impl FromStr for WeightedMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lateness" => Ok(WeightedMode::Lateness),
            "completion" => Ok(WeightedMode::Completion),
            other => Err(Error::Parameter(format!("unknown mode {other:?}, expected lateness or completion"))),
        }
    }
}

impl fmt::Display for WeightedMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightedMode::Lateness => "lateness",
            WeightedMode::Completion => "completion",
        })
    }
}

/// Search window for the weighted objectives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatenessQuery {
    pub mode: WeightedMode,
    /// Every task can complete by this slot: `max(max_i d_i, sum_i len_i)`,
    /// where `len_i` uses `min(k_i, C)` machines.
    pub horizon: usize,
}

impl LatenessQuery {
    pub fn new(inst: &Instance, mode: WeightedMode) -> Self {
        let c = inst.machines();
        let serial: u64 = inst.tasks().iter().map(|t| t.demand.div_ceil(t.parallelism.min(c))).sum();
        LatenessQuery { mode, horizon: inst.horizon().max(serial as usize) }
    }

    /// Objective value of task `i` completing at slot `t`.
    pub fn cost(&self, inst: &Instance, i: usize, t: usize) -> Value {
        let task = inst.task(i);
        let t = t as i64;
        let offset = match self.mode {
            WeightedMode::Lateness => t - task.deadline as i64,
            WeightedMode::Completion => t,
        };
        &task.value * Value::from_integer(BigInt::from(offset))
    }

    /// Every value `cost(i, t)` for `t` in `1..=horizon`, sorted and deduplicated.
    pub fn candidates(&self, inst: &Instance) -> Vec<Value> {
        let mut out: Vec<Value> =
            (0..inst.len()).flat_map(|i| (1..=self.horizon).map(move |t| (i, t))).map(|(i, t)| self.cost(inst, i, t)).collect();
        out.sort();
        out.dedup();
        out
    }

    /// Latest completion slot of task `i` keeping its cost at most `bound`,
    /// or `None` when no slot `>= 1` does.
    pub fn deadline_for(&self, inst: &Instance, i: usize, bound: &Value) -> Option<usize> {
        let task = inst.task(i);
        let slack = (bound / &task.value).floor().to_integer().to_i64()?;
        let d = match self.mode {
            WeightedMode::Lateness => task.deadline as i64 + slack,
            WeightedMode::Completion => slack,
        };
        (d >= 1).then_some(d as usize)
    }

    /// Per-task deadlines for `bound`, or `None` if some task cannot finish.
    pub fn deadlines(&self, inst: &Instance, bound: &Value) -> Option<Vec<usize>> {
        (0..inst.len()).map(|i| self.deadline_for(inst, i, bound)).collect()
    }

    /// Whether every task can keep its cost at most `bound`.
    pub fn feasible(&self, inst: &Instance, bound: &Value) -> bool {
        let Some(deadlines) = self.deadlines(inst, bound) else {
            return false;
        };
        let tasks: Vec<Workload> =
            inst.tasks().iter().zip(&deadlines).map(|(t, &d)| Workload { deadline: d, ..Workload::from(t) }).collect();
        is_feasible(&tasks, inst.machines())
    }
}

#[derive(Debug, Clone)]
pub struct WeightedOptimum {
    /// The optimal bound `lambda*`.
    pub objective: Value,
    /// Deadlines the schedule was built against.
    pub deadlines: Vec<usize>,
    pub matrix: AllocationMatrix,
    /// Objective value the schedule actually reaches (`<= objective`).
    pub achieved: Value,
}

/// Objective value of a complete schedule.
pub fn evaluate(inst: &Instance, query: &LatenessQuery, matrix: &AllocationMatrix) -> Option<Value> {
    (0..inst.len()).map(|i| matrix.completion(i).map(|t| query.cost(inst, i, t))).collect::<Option<Vec<_>>>()?.into_iter().max()
}

/// Smallest candidate bound on the maximum weighted lateness (or completion
/// time) that the machines can meet, by binary search over the candidates.
pub fn minimize_max_weighted(inst: &Instance, mode: WeightedMode) -> Result<WeightedOptimum> {
    if let Some(t) = inst.tasks().iter().find(|t| t.value.is_zero()) {
        return Err(Error::ZeroValue { task: t.id.clone() });
    }
    if inst.is_empty() {
        return Err(Error::EmptyInstance);
    }
    let query = LatenessQuery::new(inst, mode);
    let candidates = query.candidates(inst);
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    if !query.feasible(inst, &candidates[hi]) {
        return Err(Error::Invariant("the largest candidate bound is infeasible".into()));
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if query.feasible(inst, &candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let objective = candidates[lo].clone();
    let relaxed = query.deadlines(inst, &objective).expect("feasible bound");
    // Deadlines can lie far beyond the horizon; schedule against the
    // smallest doubled cap that is still feasible to keep the matrix small.
    let far = relaxed.iter().copied().max().unwrap_or(0);
    let mut cap = query.horizon.max(1);
    let (deadlines, matrix) = loop {
        let capped: Vec<usize> = relaxed.iter().map(|&d| d.min(cap)).collect();
        if let LdfOutcome::Feasible(s) = ldf_schedule_all(&inst.with_deadlines(&capped)?)? {
            break (capped, s.matrix);
        }
        if cap >= far {
            return Err(Error::Invariant("no schedule under the optimal deadlines".into()));
        }
        cap = (cap * 2).min(far);
    };
    let achieved = evaluate(inst, &query, &matrix).ok_or_else(|| Error::Invariant("incomplete schedule".into()))?;
    if achieved > objective {
        return Err(Error::Invariant(format!("schedule reaches {achieved}, above the bound {objective}")));
    }
    Ok(WeightedOptimum { objective, deadlines, matrix, achieved })
}
