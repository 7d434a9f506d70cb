//! Tasks, instances and the quantities derived from them.
//!
//! Time is slotted: slot `t` runs from `t-1` to `t`, slots are numbered from 1
//! and a task with deadline `d` may only use slots `1..=d`. Task values are
//! exact rationals so that every comparison made by the schedulers is exact.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact task value (and anything derived from values: welfare, objectives).
pub type Value = BigRational;

/// Maximum number of fractional digits accepted in a decimal value string.
pub const MAX_FRACTION_DIGITS: usize = 9;

/// Parses a decimal string such as `"3"`, `"1.1"` or `"-0.25"` into an exact
/// rational. At most [`MAX_FRACTION_DIGITS`] fractional digits are accepted.
pub fn parse_decimal(s: &str) -> Result<Value> {
    let err = |why: &str| Error::Parse(format!("value {s:?}: {why}"));
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err("no digits"));
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(err("not a decimal number"));
    }
    if body.contains('.') && frac_part.is_empty() {
        return Err(err("missing fractional digits"));
    }
    if frac_part.len() > MAX_FRACTION_DIGITS {
        return Err(err("more than 9 fractional digits"));
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| err("not a decimal number"))? };
    let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
    let v = BigRational::new(numer, denom);
    Ok(if negative { -v } else { v })
}

/// Parses either a decimal string or an exact fraction `"p/q"`.
pub fn parse_value(s: &str) -> Result<Value> {
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| Error::Parse(format!("value {s:?}: bad numerator")))?;
            let q: BigInt = q.trim().parse().map_err(|_| Error::Parse(format!("value {s:?}: bad denominator")))?;
            if q.is_zero() {
                return Err(Error::Parse(format!("value {s:?}: zero denominator")));
            }
            Ok(BigRational::new(p, q))
        }
        None => parse_decimal(s),
    }
}

/// Formats a value as a terminating decimal when possible, otherwise as `p/q`.
pub fn format_value(v: &Value) -> String {
    let mut den = v.denom().clone();
    let two = BigInt::from(2u32);
    let five = BigInt::from(5u32);
    let (mut twos, mut fives) = (0usize, 0usize);
    while den.is_even() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format!("{}/{}", v.numer(), v.denom());
    }
    let places = twos.max(fives);
    let scale = num_traits::pow(BigInt::from(10u32), places);
    let scaled = (v * BigRational::from_integer(scale)).to_integer();
    let negative = scaled.is_negative();
    let digits = scaled.abs().to_string();
    let out = if places == 0 {
        digits
    } else {
        let padded = format!("{digits:0>width$}", width = places + 1);
        let (i, f) = padded.split_at(padded.len() - places);
        let f = f.trim_end_matches('0');
        if f.is_empty() {
            i.to_string()
        } else {
            format!("{i}.{f}")
        }
    };
    if negative {
        format!("-{out}")
    } else {
        out
    }
}

/// Converts an integer to an exact value.
pub fn int_value(x: i64) -> Value {
    BigRational::from_integer(BigInt::from(x))
}

/// One malleable batch task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Task {
    pub id: String,
    /// Value earned when the task is fully processed by its deadline.
    pub value: Value,
    /// Total workload in machine-slots.
    pub demand: u64,
    /// Last slot the task may use.
    pub deadline: usize,
    /// Maximum number of machines the task can use in a single slot.
    pub parallelism: u64,
}

impl Task {
    pub fn new(id: impl Into<String>, value: Value, demand: u64, deadline: usize, parallelism: u64) -> Self {
        Task { id: id.into(), value, demand, deadline, parallelism }
    }

    /// Shorthand for integer-valued tasks, mostly used by tests and examples.
    pub fn int(id: impl Into<String>, value: i64, demand: u64, deadline: usize, parallelism: u64) -> Self {
        Task::new(id, int_value(value), demand, deadline, parallelism)
    }

    /// Minimum number of slots the task needs: `ceil(demand / parallelism)`.
    pub fn min_length(&self) -> u64 {
        self.demand.div_ceil(self.parallelism)
    }

    /// True when the task fits inside `[1, deadline]` on its own.
    pub fn individually_feasible(&self) -> bool {
        self.min_length() <= self.deadline as u64
    }

    /// Most workload the task can place in the last `window` slots before its deadline.
    pub fn max_in_window(&self, window: usize) -> u64 {
        self.demand.min(self.parallelism.saturating_mul(window as u64))
    }

    pub fn metrics(&self) -> DerivedMetrics {
        derive_metrics(self)
    }
}

/// Per-task quantities derived from demand, deadline, parallelism and value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedMetrics {
    pub min_length: u64,
    pub slackness: Value,
    pub marginal_value: Value,
}

pub fn derive_metrics(task: &Task) -> DerivedMetrics {
    let min_length = task.min_length();
    DerivedMetrics {
        min_length,
        slackness: BigRational::new(BigInt::from(task.deadline), BigInt::from(min_length.max(1))),
        marginal_value: &task.value / BigRational::from_integer(BigInt::from(task.demand.max(1))),
    }
}

/// A problem instance: `machines` identical machines and an ordered task list.
///
/// The task order is the canonical input order, used as the last tie-breaker
/// by every algorithm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    machines: u64,
    tasks: Vec<Task>,
}

/// A problem found by [`validate_instance`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoMachines,
    /// Each task variant carries the task's position and id.
    DuplicateId(usize, String),
    ZeroDemand(usize, String),
    ZeroDeadline(usize, String),
    ZeroParallelism(usize, String),
    NegativeValue(usize, String),
    /// Not a format error: the task is legal input but can never be completed.
    IndividuallyInfeasible(usize, String),
}

impl Violation {
    /// Whether the violation makes the input malformed, as opposed to merely
    /// flagging an unschedulable task.
    pub fn is_format_error(&self) -> bool {
        !matches!(self, Violation::IndividuallyInfeasible(..))
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoMachines => write!(f, "machines: must be >= 1"),
            Violation::DuplicateId(i, id) => write!(f, "tasks[{i}].id: duplicate id {id:?}"),
            Violation::ZeroDemand(i, id) => write!(f, "tasks[{i}].demand: must be >= 1 (task {id:?})"),
            Violation::ZeroDeadline(i, id) => write!(f, "tasks[{i}].deadline: must be >= 1 (task {id:?})"),
            Violation::ZeroParallelism(i, id) => write!(f, "tasks[{i}].parallelism: must be >= 1 (task {id:?})"),
            Violation::NegativeValue(i, id) => write!(f, "tasks[{i}].value: must be >= 0 (task {id:?})"),
            Violation::IndividuallyInfeasible(i, id) => {
                write!(f, "tasks[{i}]: task {id:?} is individually infeasible (min length exceeds deadline)")
            }
        }
    }
}

fn collect_violations(machines: u64, tasks: &[Task]) -> Vec<Violation> {
    let mut out = Vec::new();
    if machines == 0 {
        out.push(Violation::NoMachines);
    }
    let mut seen = HashSet::new();
    for (i, t) in tasks.iter().enumerate() {
        if !seen.insert(t.id.as_str()) {
            out.push(Violation::DuplicateId(i, t.id.clone()));
        }
        if t.demand == 0 {
            out.push(Violation::ZeroDemand(i, t.id.clone()));
        }
        if t.deadline == 0 {
            out.push(Violation::ZeroDeadline(i, t.id.clone()));
        }
        if t.parallelism == 0 {
            out.push(Violation::ZeroParallelism(i, t.id.clone()));
        }
        if t.value.is_negative() {
            out.push(Violation::NegativeValue(i, t.id.clone()));
        }
        if t.demand > 0 && t.deadline > 0 && t.parallelism > 0 && !t.individually_feasible() {
            out.push(Violation::IndividuallyInfeasible(i, t.id.clone()));
        }
    }
    out
}

/// Lists every violated invariant of `inst`, including tasks that are
/// individually infeasible. An empty list means the instance is clean.
pub fn validate_instance(inst: &Instance) -> Vec<Violation> {
    collect_violations(inst.machines, &inst.tasks)
}

impl Instance {
    /// Builds an instance, rejecting malformed input. Individually infeasible
    /// tasks are accepted.
    pub fn new(machines: u64, tasks: Vec<Task>) -> Result<Self> {
        let errors: Vec<String> = collect_violations(machines, &tasks)
            .into_iter()
            .filter(Violation::is_format_error)
            .map(|v| v.to_string())
            .collect();
        if !errors.is_empty() {
            return Err(Error::Invalid(errors));
        }
        Ok(Instance { machines, tasks })
    }

    pub fn machines(&self) -> u64 {
        self.machines
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn task(&self, i: usize) -> &Task {
        &self.tasks[i]
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    /// Largest deadline, 0 for an empty instance.
    pub fn horizon(&self) -> usize {
        self.tasks.iter().map(|t| t.deadline).max().unwrap_or(0)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.tasks.iter().position(|t| t.id == id)
    }

    /// Same tasks on a different number of machines.
    pub fn with_machines(&self, machines: u64) -> Result<Self> {
        Instance::new(machines, self.tasks.clone())
    }

    /// Same machines, deadlines replaced task by task.
    pub fn with_deadlines(&self, deadlines: &[usize]) -> Result<Self> {
        let tasks = self
            .tasks
            .iter()
            .zip(deadlines)
            .map(|(t, &d)| Task { deadline: d, ..t.clone() })
            .collect();
        Instance::new(self.machines, tasks)
    }

    /// Instance slackness: the minimum task slackness. `None` when empty.
    pub fn slackness(&self) -> Option<Value> {
        self.tasks.iter().map(|t| derive_metrics(t).slackness).min()
    }

    /// Total value of the tasks at the given indices.
    pub fn value_of(&self, subset: &[usize]) -> Value {
        subset.iter().fold(Value::zero(), |acc, &i| acc + &self.tasks[i].value)
    }
}

/// Sorted distinct deadlines and the tasks grouped under each one.
///
/// `taus[0]` is the implicit `tau_0 = 0`; `taus[1..=L]` are the distinct
/// deadlines in increasing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeadlineProfile {
    taus: Vec<usize>,
    groups: BTreeMap<usize, Vec<usize>>,
}

impl DeadlineProfile {
    /// Number of distinct deadlines, `L`.
    pub fn len(&self) -> usize {
        self.taus.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `tau_m` for `m` in `0..=L`.
    pub fn tau(&self, m: usize) -> usize {
        self.taus[m]
    }

    /// Distinct deadlines `tau_1 < ... < tau_L`.
    pub fn taus(&self) -> &[usize] {
        &self.taus[1..]
    }

    /// The horizon `d = tau_L` (0 for an empty grid).
    pub fn horizon(&self) -> usize {
        *self.taus.last().unwrap_or(&0)
    }

    /// Task indices grouped by deadline, in input order within a group.
    pub fn groups(&self) -> &BTreeMap<usize, Vec<usize>> {
        &self.groups
    }

    /// A bare deadline grid with no task groups.
    pub fn from_deadlines(deadlines: impl IntoIterator<Item = usize>) -> Self {
        let mut taus: Vec<usize> = deadlines.into_iter().filter(|&d| d > 0).collect();
        taus.sort_unstable();
        taus.dedup();
        taus.insert(0, 0);
        DeadlineProfile { taus, groups: BTreeMap::new() }
    }
}

/// Builds the deadline profile of a task list. Group members are indices into
/// `tasks`.
pub fn build_profile(tasks: &[Task]) -> Result<DeadlineProfile> {
    if tasks.is_empty() {
        return Err(Error::EmptyInstance);
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, t) in tasks.iter().enumerate() {
        groups.entry(t.deadline).or_default().push(i);
    }
    let mut taus = vec![0];
    taus.extend(groups.keys().copied());
    Ok(DeadlineProfile { taus, groups })
}
