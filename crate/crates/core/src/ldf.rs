//! Latest-Deadline-First scheduling.
//!
//! [`Scheduler`] owns an [`AllocationMatrix`] and implements the allocation
//! primitives shared by the optimal scheduler and the greedy welfare solver:
//!
//! * `fully_utilize` packs a new task into the free capacity nearest its deadline;
//! * `routine` frees machines at one slot by pushing other tasks one unit at a
//!   time to the latest earlier slot with spare capacity;
//! * `fully_allocate` uses `routine` to finish a task `fully_utilize` could not;
//! * `allocate_rlm` shifts a task's own early allocation towards its deadline
//!   so that the right-most slots carry the most load.
//!
//! [`ldf_schedule`] runs `allocate_b` on the tasks in non-increasing deadline
//! order and succeeds exactly when the boundary condition holds.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::capacity::{self, CapacityReport, Workload};
use crate::error::{Error, Result};
use crate::matrix::AllocationMatrix;
use crate::model::Instance;

/// Kind of a [`TraceEvent`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceOp {
    /// New machines given to `task` at `to_slot`.
    Grant,
    /// One unit of another task moved from `from_slot` to the earlier `to_slot`.
    Transfer,
    /// Part of `task`'s own allocation moved from `from_slot` to the later `to_slot`.
    Shift,
    /// `task` finished its allocation call.
    Done,
}

/// One change to the allocation matrix. Slot 0 means "none".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEvent {
    pub op: TraceOp,
    pub task: usize,
    pub from_slot: usize,
    pub to_slot: usize,
    pub amount: u64,
}

#[derive(Serialize, Deserialize)]
struct TraceRecord<'a> {
    op: TraceOp,
    task: &'a str,
    from_slot: usize,
    to_slot: usize,
    amount: u64,
}

/// Writes events as line-delimited JSON, naming tasks by id.
pub fn write_trace<W: Write>(mut out: W, inst: &Instance, events: &[TraceEvent]) -> Result<()> {
    for e in events {
        let rec = TraceRecord {
            op: e.op,
            task: &inst.task(e.task).id,
            from_slot: e.from_slot,
            to_slot: e.to_slot,
            amount: e.amount,
        };
        let line = serde_json::to_string(&rec).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Parses a trace written by [`write_trace`].
pub fn read_trace(text: &str, inst: &Instance) -> Result<Vec<TraceEvent>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let rec: TraceRecord = serde_json::from_str(line).map_err(|e| Error::Parse(e.to_string()))?;
            let task = inst.index_of(rec.task).ok_or_else(|| Error::Parse(format!("unknown task {:?}", rec.task)))?;
            Ok(TraceEvent { op: rec.op, task, from_slot: rec.from_slot, to_slot: rec.to_slot, amount: rec.amount })
        })
        .collect()
}

/// Mutable state of one scheduling run.
#[derive(Debug, Clone)]
pub struct Scheduler<'a> {
    inst: &'a Instance,
    matrix: AllocationMatrix,
    threshold: usize,
    trace: Option<Vec<TraceEvent>>,
}

impl<'a> Scheduler<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        Scheduler { inst, matrix: AllocationMatrix::for_instance(inst), threshold: 0, trace: None }
    }

    /// Like [`Scheduler::new`] but recording every change of the matrix.
    pub fn traced(inst: &'a Instance) -> Self {
        Scheduler { trace: Some(Vec::new()), ..Self::new(inst) }
    }

    /// Starts from an existing matrix (which must match the instance shape).
    pub fn with_matrix(inst: &'a Instance, matrix: AllocationMatrix) -> Self {
        Scheduler { inst, matrix, threshold: 0, trace: None }
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    pub fn matrix(&self) -> &AllocationMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> AllocationMatrix {
        self.matrix
    }

    pub fn trace(&self) -> &[TraceEvent] {
        self.trace.as_deref().unwrap_or(&[])
    }

    pub fn into_parts(self) -> (AllocationMatrix, Vec<TraceEvent>) {
        (self.matrix, self.trace.unwrap_or_default())
    }

    /// Current phase threshold: with `eta1 = false`, `routine` never moves
    /// load into slots at or below it.
    pub fn threshold(&self) -> usize {
        self.threshold
    }

    pub fn set_threshold(&mut self, t: usize) {
        self.threshold = t;
    }

    fn record(&mut self, op: TraceOp, task: usize, from_slot: usize, to_slot: usize, amount: u64) {
        if let Some(trace) = &mut self.trace {
            trace.push(TraceEvent { op, task, from_slot, to_slot, amount });
        }
    }

    fn grant(&mut self, i: usize, t: usize, amount: u64) {
        if amount > 0 {
            self.matrix.add(i, t, amount);
            self.record(TraceOp::Grant, i, 0, t, amount);
        }
    }

    /// Allocates task `i` right to left, taking at each slot as much as the
    /// parallelism bound, the remaining demand and the free capacity allow.
    pub fn fully_utilize(&mut self, i: usize) {
        let task = self.inst.task(i);
        let mut remaining = task.demand;
        for t in (1..=task.deadline).rev() {
            if remaining == 0 {
                break;
            }
            let y = task.parallelism.min(remaining).min(self.matrix.free(t));
            self.grant(i, t, y);
            remaining -= y;
        }
    }

    /// Tries to raise the free capacity at slot `t` to `delta` by moving other
    /// tasks, one unit at a time, to the latest earlier slot with spare room.
    ///
    /// Stops when no such slot exists; with `eta1 = false` also when that slot
    /// is at or below the threshold; with `eta2 = true` also when task `i` has
    /// at most `free(t)` allocated before that slot.
    pub fn routine(&mut self, i: usize, t: usize, delta: u64, eta1: bool, eta2: bool) -> Result<()> {
        while self.matrix.free(t) < delta {
            let Some(earlier) = (1..t).rev().find(|&s| self.matrix.free(s) > 0) else {
                break;
            };
            if !eta1 && earlier <= self.threshold {
                break;
            }
            if eta2 && self.matrix.prefix(i, earlier - 1) <= self.matrix.free(t) {
                break;
            }
            let donor = (0..self.matrix.tasks())
                .find(|&j| j != i && self.matrix.get(j, t) > self.matrix.get(j, earlier))
                .ok_or_else(|| {
                    Error::Invariant(format!(
                        "routine: no task can move from slot {t} to slot {earlier} while allocating {}",
                        self.inst.task(i).id
                    ))
                })?;
            self.matrix.remove(donor, t, 1);
            self.matrix.add(donor, earlier, 1);
            self.record(TraceOp::Transfer, donor, t, earlier, 1);
        }
        Ok(())
    }

    /// Completes the allocation of task `i` after `fully_utilize`, walking
    /// from its deadline backwards and clearing room with `routine`.
    pub fn fully_allocate(&mut self, i: usize) -> Result<()> {
        let task = self.inst.task(i);
        let mut missing = task.demand - self.matrix.total(i);
        let mut t = task.deadline;
        while missing > 0 {
            if t == 0 {
                return Err(Error::InfeasibleResidual { task: task.id.clone(), missing });
            }
            let delta = (task.parallelism - self.matrix.get(i, t)).min(missing);
            if delta > 0 {
                debug_assert_eq!(self.matrix.free(t), 0, "slot {t} has spare room after fully_utilize");
                self.routine(i, t, delta, true, false)?;
            }
            let g = self.matrix.free(t).min(delta);
            debug_assert!(delta == 0 || g == self.matrix.free(t));
            self.grant(i, t, g);
            missing -= g;
            t -= 1;
        }
        Ok(())
    }

    /// Moves task `i`'s earliest allocation to later slots, slot by slot from
    /// its deadline, as far as `routine` can make room. The total allocation
    /// of `i` is unchanged.
    pub fn allocate_rlm(&mut self, i: usize, eta1: bool) -> Result<()> {
        let task = self.inst.task(i);
        let mut t = task.deadline;
        while t >= 1 {
            let earlier = self.matrix.prefix(i, t - 1);
            if earlier == 0 {
                break;
            }
            let delta = (task.parallelism - self.matrix.get(i, t)).min(earlier);
            if delta > 0 {
                self.routine(i, t, delta, eta1, true)?;
            }
            let theta = self.matrix.free(t).min(delta);
            debug_assert!(delta == 0 || theta == self.matrix.free(t));
            if theta > 0 {
                let mut left = theta;
                for s in 1..t {
                    if left == 0 {
                        break;
                    }
                    let take = self.matrix.get(i, s).min(left);
                    if take > 0 {
                        self.matrix.remove(i, s, take);
                        self.matrix.add(i, t, take);
                        self.record(TraceOp::Shift, i, s, t, take);
                        left -= take;
                    }
                }
            }
            t -= 1;
        }
        Ok(())
    }

    /// `sum_{t <= d_i} min(free(t), k_i) >= D_i`: whether `fully_utilize`
    /// alone would complete task `i` on the current matrix.
    pub fn admits(&self, i: usize) -> bool {
        let task = self.inst.task(i);
        let mut room = 0u64;
        for t in 1..=task.deadline {
            room += self.matrix.free(t).min(task.parallelism);
            if room >= task.demand {
                return true;
            }
        }
        false
    }

    /// Allocation step of the optimal scheduler. Fails with
    /// [`Error::InfeasibleResidual`] when the already allocated tasks plus
    /// `i` violate the boundary condition.
    pub fn allocate_b(&mut self, i: usize) -> Result<()> {
        debug_assert_eq!(self.matrix.total(i), 0);
        self.fully_utilize(i);
        self.fully_allocate(i)?;
        self.allocate_rlm(i, true)?;
        self.record(TraceOp::Done, i, 0, 0, 0);
        Ok(())
    }

    /// Allocation step of the greedy solver; the caller has checked
    /// [`Scheduler::admits`]. Respects the current threshold.
    pub fn allocate_a(&mut self, i: usize) -> Result<()> {
        debug_assert_eq!(self.matrix.total(i), 0);
        self.fully_utilize(i);
        self.allocate_rlm(i, false)?;
        let task = self.inst.task(i);
        let total = self.matrix.total(i);
        if total != task.demand {
            return Err(Error::Invariant(format!(
                "allocate_a: {} holds {total} of {} after admission",
                task.id, task.demand
            )));
        }
        self.record(TraceOp::Done, i, 0, 0, 0);
        Ok(())
    }
}

/// A complete feasible schedule produced by [`ldf_schedule`].
#[derive(Debug, Clone)]
pub struct LdfSchedule {
    pub matrix: AllocationMatrix,
    /// Scheduled task indices in processing order.
    pub order: Vec<usize>,
    pub report: CapacityReport,
    pub trace: Vec<TraceEvent>,
}

/// Why a subset cannot be scheduled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Infeasible {
    pub report: CapacityReport,
    /// First task in processing order whose addition breaks the boundary condition.
    pub task: usize,
    /// Smallest violated `m` of the whole subset.
    pub violation: usize,
}

#[derive(Debug, Clone)]
pub enum LdfOutcome {
    Feasible(LdfSchedule),
    Infeasible(Infeasible),
}

impl LdfOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LdfOutcome::Feasible(_))
    }

    pub fn schedule(&self) -> Option<&LdfSchedule> {
        match self {
            LdfOutcome::Feasible(s) => Some(s),
            LdfOutcome::Infeasible(_) => None,
        }
    }

    pub fn into_schedule(self) -> Option<LdfSchedule> {
        match self {
            LdfOutcome::Feasible(s) => Some(s),
            LdfOutcome::Infeasible(_) => None,
        }
    }
}

/// Processing order: non-increasing deadline, input order within a deadline.
pub fn ldf_order(inst: &Instance, subset: &[usize]) -> Vec<usize> {
    let mut order: Vec<usize> = subset.to_vec();
    order.sort_unstable();
    order.dedup();
    order.sort_by_key(|&i| std::cmp::Reverse(inst.task(i).deadline));
    order
}

/// Schedules `subset` of `inst`, or explains why no schedule exists.
pub fn ldf_schedule(inst: &Instance, subset: &[usize]) -> Result<LdfOutcome> {
    run_ldf(inst, subset, false)
}

/// [`ldf_schedule`] with the change trace recorded.
pub fn ldf_schedule_traced(inst: &Instance, subset: &[usize]) -> Result<LdfOutcome> {
    run_ldf(inst, subset, true)
}

/// Schedules every task of the instance.
pub fn ldf_schedule_all(inst: &Instance) -> Result<LdfOutcome> {
    let all: Vec<usize> = (0..inst.len()).collect();
    ldf_schedule(inst, &all)
}

fn run_ldf(inst: &Instance, subset: &[usize], traced: bool) -> Result<LdfOutcome> {
    let order = ldf_order(inst, subset);
    let report = capacity::check_subset(inst, &order, None);
    if let Some(violation) = report.first_violation {
        let mut prefix: Vec<Workload> = Vec::with_capacity(order.len());
        let mut task = *order.last().expect("an empty subset is always feasible");
        for &i in &order {
            prefix.push(inst.task(i).into());
            if !capacity::check_workloads(&prefix, inst.machines()).feasible {
                task = i;
                break;
            }
        }
        return Ok(LdfOutcome::Infeasible(Infeasible { report, task, violation }));
    }
    let mut sched = if traced { Scheduler::traced(inst) } else { Scheduler::new(inst) };
    for &i in &order {
        sched.allocate_b(i).map_err(|e| match e {
            Error::InfeasibleResidual { task, missing } => Error::Invariant(format!(
                "boundary condition holds but {task} is short by {missing}"
            )),
            other => other,
        })?;
    }
    let (matrix, trace) = sched.into_parts();
    Ok(LdfOutcome::Feasible(LdfSchedule { matrix, order, report, trace }))
}

/// Replays a trace on an empty matrix, checking capacity conservation after
/// every event, the staircase shape of free capacity up to the task's
/// deadline after every `Done` event of the optimal scheduler, and that no
/// allocation call lowers the load of any slot.
pub fn audit_trace(inst: &Instance, events: &[TraceEvent], check_staircase: bool) -> Vec<String> {
    let mut m = AllocationMatrix::for_instance(inst);
    let mut errors = Vec::new();
    let mut last_loads = m.loads().to_vec();
    for (k, e) in events.iter().enumerate() {
        match e.op {
            TraceOp::Grant => m.add(e.task, e.to_slot, e.amount),
            TraceOp::Transfer | TraceOp::Shift => {
                if m.get(e.task, e.from_slot) < e.amount {
                    errors.push(format!("event {k}: moving {} from an allocation of {}", e.amount, m.get(e.task, e.from_slot)));
                    return errors;
                }
                m.remove(e.task, e.from_slot, e.amount);
                m.add(e.task, e.to_slot, e.amount);
            }
            TraceOp::Done => {
                let loads = m.loads().to_vec();
                if let Some(t) = loads.iter().zip(&last_loads).position(|(now, before)| now < before) {
                    errors.push(format!("event {k}: load of slot {} dropped during allocation", t + 1));
                }
                last_loads = loads;
                if check_staircase {
                    let d = inst.task(e.task).deadline;
                    if let Some(t) = (1..d).find(|&t| m.free(t) < m.free(t + 1)) {
                        errors.push(format!("event {k}: free capacity rises from slot {t} to {}", t + 1));
                    }
                }
            }
        }
        for t in [e.from_slot, e.to_slot] {
            if t > 0 && m.load(t) + m.free(t) != m.machines() {
                errors.push(format!("event {k}: slot {t} over capacity"));
            }
        }
        if e.op != TraceOp::Done {
            let k_i = inst.task(e.task).parallelism;
            if m.get(e.task, e.to_slot) > k_i {
                errors.push(format!("event {k}: parallelism bound broken at slot {}", e.to_slot));
            }
        }
    }
    errors
}
