//! JSON instance and result files.
//!
//! Values are written as decimal strings (`"1.1"`); a value that has no
//! terminating decimal expansion is written as an exact fraction `"p/q"`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::capacity::CapacityReport;
use crate::error::{Error, Result};
use crate::greedy::PhaseLog;
use crate::matrix::AllocationMatrix;
use crate::model::{format_value, parse_decimal, parse_value, Instance, Task, Value};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskRecord {
    pub id: String,
    pub value: String,
    pub demand: u64,
    pub deadline: usize,
    pub parallelism: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub machines: u64,
    pub tasks: Vec<TaskRecord>,
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance) -> Self {
        let tasks = inst
            .tasks()
            .iter()
            .map(|t| TaskRecord {
                id: t.id.clone(),
                value: format_value(&t.value),
                demand: t.demand,
                deadline: t.deadline,
                parallelism: t.parallelism,
            })
            .collect();
        InstanceFile { machines: inst.machines(), tasks }
    }

    /// Converts to a validated instance; errors name the offending field.
    pub fn into_instance(self) -> Result<Instance> {
        let mut tasks = Vec::with_capacity(self.tasks.len());
        let mut errors = Vec::new();
        for (i, r) in self.tasks.into_iter().enumerate() {
            match parse_decimal(&r.value) {
                Ok(value) => tasks.push(Task::new(r.id, value, r.demand, r.deadline, r.parallelism)),
                Err(e) => errors.push(format!("tasks[{i}].value: {e}")),
            }
        }
        if !errors.is_empty() {
            return Err(Error::Invalid(errors));
        }
        Instance::new(self.machines, tasks)
    }
}

pub fn parse_instance_str(text: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_instance()
}

/// Reads and validates an instance file.
pub fn parse_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_instance_str(&text)
}

pub fn instance_to_json(inst: &Instance) -> String {
    serde_json::to_string_pretty(&InstanceFile::from_instance(inst)).expect("instance serializes")
}

/// A greedy phase with tasks named by id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseRecord {
    pub index: usize,
    pub accepted: Vec<String>,
    pub rejected: Vec<String>,
    pub c: usize,
    pub c_prime: usize,
    pub threshold: Option<usize>,
}

pub fn phase_records(inst: &Instance, log: &PhaseLog) -> Vec<PhaseRecord> {
    let ids = |v: &[usize]| v.iter().map(|&i| inst.task(i).id.clone()).collect();
    log.phases
        .iter()
        .map(|p| PhaseRecord {
            index: p.index,
            accepted: ids(&p.accepted),
            rejected: ids(&p.rejected),
            c: p.c,
            c_prime: p.c_prime,
            threshold: p.threshold,
        })
        .collect()
}

/// Output of every solving command.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultFile {
    pub command: String,
    pub feasible: bool,
    /// Machine count the allocation is laid out on.
    pub machines: u64,
    pub welfare: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<String>,
    /// Task id to its machine counts in slots `1..=horizon`, zero-padded.
    pub allocation: BTreeMap<String, Vec<u64>>,
    /// Deadlines the allocation honours when they differ from the instance's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deadlines: Option<BTreeMap<String, usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<PhaseRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity_report: Option<CapacityReport>,
}

impl ResultFile {
    /// A result carrying `matrix` (rows in instance order) on `machines`.
    pub fn new(command: &str, inst: &Instance, feasible: bool, machines: u64, matrix: Option<&AllocationMatrix>, welfare: &Value) -> Self {
        let allocation = match matrix {
            Some(m) => inst.tasks().iter().enumerate().map(|(i, t)| (t.id.clone(), m.row(i).to_vec())).collect(),
            None => BTreeMap::new(),
        };
        ResultFile {
            command: command.to_string(),
            feasible,
            machines,
            welfare: format_value(welfare),
            objective: None,
            allocation,
            deadlines: None,
            phases: None,
            capacity_report: None,
        }
    }

    /// Pretty-printed JSON with every allocation row on one line.
    pub fn to_json(&self) -> String {
        compact_number_arrays(&serde_json::to_string_pretty(self).expect("result serializes"))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Checks the allocation against `inst`: matrix invariants under the
    /// recorded machine count and deadlines, and a welfare equal to the
    /// value of the fully allocated tasks.
    pub fn verify(&self, inst: &Instance) -> Vec<String> {
        let mut problems = Vec::new();
        let deadlines: Vec<usize> = inst
            .tasks()
            .iter()
            .map(|t| self.deadlines.as_ref().and_then(|d| d.get(&t.id).copied()).unwrap_or(t.deadline))
            .collect();
        let target = match inst.with_deadlines(&deadlines).and_then(|i| i.with_machines(self.machines.max(1))) {
            Ok(t) => t,
            Err(e) => return vec![e.to_string()],
        };
        let mut rows = Vec::with_capacity(inst.len());
        let horizon = self.allocation.values().map(Vec::len).max().unwrap_or(0);
        for t in inst.tasks() {
            let mut row = self.allocation.get(&t.id).cloned().unwrap_or_default();
            row.resize(horizon, 0);
            rows.push(row);
        }
        if let Some(extra) = self.allocation.keys().find(|id| inst.index_of(id).is_none()) {
            problems.push(format!("allocation names unknown task {extra}"));
        }
        let matrix = AllocationMatrix::from_rows(&rows, horizon, self.machines);
        problems.extend(matrix.check(&target));
        let complete: Vec<usize> = (0..inst.len()).filter(|&i| matrix.total(i) == inst.task(i).demand).collect();
        match parse_value(&self.welfare) {
            Ok(w) if w == inst.value_of(&complete) => {}
            Ok(w) => problems.push(format!("welfare {} but completed tasks are worth {}", format_value(&w), format_value(&inst.value_of(&complete)))),
            Err(e) => problems.push(e.to_string()),
        }
        problems
    }
}

/// Rewrites pretty-printed arrays of plain numbers onto a single line.
fn compact_number_arrays(json: &str) -> String {
    let mut out = String::with_capacity(json.len());
    let mut rest = json;
    while let Some(open) = rest.find('[') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let close = after.find(']');
        let body = close.map(|c| &after[..c]);
        match body {
            // pretty arrays span lines; string contents never hold a raw newline
            Some(b) if b.contains('\n') && b.chars().all(|ch| ch.is_ascii_digit() || ch == ',' || ch == '-' || ch.is_whitespace()) => {
                let items: Vec<&str> = b.split(',').map(str::trim).filter(|x| !x.is_empty()).collect();
                out.push('[');
                out.push_str(&items.join(", "));
                out.push(']');
                rest = &after[close.unwrap() + 1..];
            }
            _ => {
                out.push('[');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

/// Rounds every deadline down to the nearest listed grid point. Fails when a
/// deadline lies below the smallest grid point.
pub fn round_deadlines(inst: &Instance, grid: &[usize]) -> Result<Instance> {
    let mut grid = grid.to_vec();
    grid.sort_unstable();
    let deadlines = inst
        .tasks()
        .iter()
        .map(|t| {
            grid.iter()
                .rev()
                .find(|&&g| g >= 1 && g <= t.deadline)
                .copied()
                .ok_or_else(|| Error::Parameter(format!("no rounding point at or below the deadline {} of {}", t.deadline, t.id)))
        })
        .collect::<Result<Vec<_>>>()?;
    inst.with_deadlines(&deadlines)
}
