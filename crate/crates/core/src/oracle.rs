//! Independent ground truth for the capacity formulas and the solvers.
//!
//! Feasibility is decided by a max-flow on the transportation network
//! `source -(D_i)-> task -(k_i)-> slot -(C)-> sink`, with task-to-slot arcs
//! only for slots the task may use. Welfare, machine count and weighted
//! lateness are then found by brute force on top of that test.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::capacity::Workload;
use crate::error::{Error, Result};
use crate::matrix::AllocationMatrix;
use crate::model::{Instance, Value};

/// Default bound on the number of tasks for [`exhaustive_welfare`].
pub const EXHAUSTIVE_LIMIT: usize = 16;

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: u64,
}

/// A small Dinic max-flow solver.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
    level: Vec<i64>,
    iter: Vec<usize>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork { edges: Vec::new(), adj: vec![Vec::new(); nodes], level: vec![0; nodes], iter: vec![0; nodes] }
    }

    /// Adds an arc and returns its id (the reverse arc is `id ^ 1`).
    pub fn add_edge(&mut self, from: usize, to: usize, cap: u64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap });
        self.adj[from].push(id);
        self.edges.push(Edge { to: from, cap: 0 });
        self.adj[to].push(id + 1);
        id
    }

    /// Flow pushed through arc `id`.
    pub fn flow(&self, id: usize) -> u64 {
        self.edges[id ^ 1].cap
    }

    fn bfs(&mut self, s: usize) {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.adj[v] {
                let Edge { to, cap } = self.edges[e];
                if cap > 0 && self.level[to] < 0 {
                    self.level[to] = self.level[v] + 1;
                    queue.push_back(to);
                }
            }
        }
    }

    fn dfs(&mut self, v: usize, t: usize, f: u64) -> u64 {
        if v == t {
            return f;
        }
        while self.iter[v] < self.adj[v].len() {
            let e = self.adj[v][self.iter[v]];
            let Edge { to, cap } = self.edges[e];
            if cap > 0 && self.level[v] < self.level[to] {
                let d = self.dfs(to, t, f.min(cap));
                if d > 0 {
                    self.edges[e].cap -= d;
                    self.edges[e ^ 1].cap += d;
                    return d;
                }
            }
            self.iter[v] += 1;
        }
        0
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> u64 {
        let mut flow = 0;
        loop {
            self.bfs(s);
            if self.level[t] < 0 {
                return flow;
            }
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, u64::MAX);
                if f == 0 {
                    break;
                }
                flow += f;
            }
        }
    }
}

/// Outcome of the flow test.
#[derive(Debug, Clone)]
pub struct FlowResult {
    pub max_flow: u64,
    pub total_demand: u64,
    pub feasible: bool,
    /// Flow decomposition, one row per input workload, slots `1..=horizon`.
    pub matrix: AllocationMatrix,
}

/// Max-flow test for `tasks` on `machines` machines, optionally restricted to
/// slots `window_start..=horizon` (slots before `window_start` are closed).
///
/// `feasible` is true when every demand is routed. Inside a restricted window
/// the flow value is the most work the tasks can process there.
pub fn flow_feasible(tasks: &[Workload], machines: u64, window_start: Option<usize>) -> FlowResult {
    let n = tasks.len();
    let horizon = tasks.iter().map(|w| w.deadline).max().unwrap_or(0);
    let first = window_start.unwrap_or(1).max(1);
    let source = 0;
    let sink = n + horizon + 1;
    let slot_node = |t: usize| n + t;
    let mut net = FlowNetwork::new(n + horizon + 2);
    let mut arcs = Vec::new();
    for (i, w) in tasks.iter().enumerate() {
        net.add_edge(source, i + 1, w.demand);
        for t in first..=w.deadline {
            arcs.push((i, t, net.add_edge(i + 1, slot_node(t), w.parallelism)));
        }
    }
    for t in first..=horizon {
        net.add_edge(slot_node(t), sink, machines);
    }
    let max_flow = net.max_flow(source, sink);
    let mut matrix = AllocationMatrix::new(n, horizon, machines);
    for (i, t, e) in arcs {
        let f = net.flow(e);
        if f > 0 {
            matrix.add(i, t, f);
        }
    }
    let total_demand = tasks.iter().map(|w| w.demand).sum();
    FlowResult { max_flow, total_demand, feasible: max_flow == total_demand, matrix }
}

/// Most work `tasks` can process in slots `[start + 1, horizon]`.
pub fn window_capacity(tasks: &[Workload], machines: u64, start: usize) -> u64 {
    flow_feasible(tasks, machines, Some(start + 1)).max_flow
}

pub fn flow_feasible_subset(inst: &Instance, subset: &[usize]) -> bool {
    let tasks: Vec<Workload> = subset.iter().map(|&i| inst.task(i).into()).collect();
    flow_feasible(&tasks, inst.machines(), None).feasible
}

/// Optimal welfare by enumerating every subset and testing it with the flow.
/// Returns the best value and the first subset (in enumeration order) reaching it.
pub fn exhaustive_welfare(inst: &Instance) -> Result<(Value, Vec<usize>)> {
    exhaustive_welfare_with_limit(inst, EXHAUSTIVE_LIMIT)
}

pub fn exhaustive_welfare_with_limit(inst: &Instance, limit: usize) -> Result<(Value, Vec<usize>)> {
    let n = inst.len();
    if n > limit {
        return Err(Error::TooLarge { n, limit });
    }
    let mut best = (Value::zero(), Vec::new());
    for mask in 0u64..(1u64 << n) {
        let subset: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let value = inst.value_of(&subset);
        if value > best.0 && flow_feasible_subset(inst, &subset) {
            best = (value, subset);
        }
    }
    Ok(best)
}

/// Smallest machine count making the whole instance flow-feasible, by linear
/// scan upward from `max_i ceil(D_i / d_i)`. Zero for an empty instance.
pub fn scan_machine_min(tasks: &[Workload]) -> Result<u64> {
    if tasks.is_empty() {
        return Ok(0);
    }
    if let Some(pos) = tasks.iter().position(|w| w.parallelism * (w.deadline as u64) < w.demand) {
        return Err(Error::InfeasibleAtAnyMachineCount { task: format!("#{pos}") });
    }
    let mut c = tasks.iter().map(|w| w.demand.div_ceil(w.deadline as u64)).max().unwrap_or(1).max(1);
    while !flow_feasible(tasks, c, None).feasible {
        c += 1;
    }
    Ok(c)
}

/// Smallest achievable maximum of `v_i * (completion_i - d_i)` (or of
/// `v_i * completion_i` when `completion` is set), by testing every value
/// `v_i * (t - d_i)` (resp. `v_i * t`), `t <= max(d, sum ceil(D_i / min(k_i, C)))`,
/// in increasing order with the flow test.
pub fn enumerate_max_weighted(inst: &Instance, completion: bool) -> Option<Value> {
    let c = inst.machines();
    let serial: u64 = inst.tasks().iter().map(|t| t.demand.div_ceil(t.parallelism.min(c))).sum();
    let horizon = (serial as usize).max(inst.horizon());
    let shift = |i: usize| if completion { 0 } else { inst.task(i).deadline as i64 };
    let mut values: Vec<Value> = Vec::new();
    for (i, task) in inst.tasks().iter().enumerate() {
        for t in 1..=horizon as i64 {
            values.push(&task.value * Value::from_integer(BigInt::from(t - shift(i))));
        }
    }
    values.sort();
    values.dedup();
    'next: for bound in values {
        let mut tasks = Vec::with_capacity(inst.len());
        for (i, task) in inst.tasks().iter().enumerate() {
            // latest t with v * (t - shift) <= bound, i.e. t <= shift + bound / v
            let num = bound.numer() * task.value.denom();
            let den = bound.denom() * task.value.numer();
            let latest = shift(i) + num.div_floor(&den).to_i64()?;
            if latest < 1 {
                continue 'next;
            }
            tasks.push(Workload { deadline: latest as usize, ..Workload::from(task) });
        }
        if flow_feasible(&tasks, c, None).feasible {
            return Some(bound);
        }
    }
    None
}
