//! Dense per-task, per-slot machine counts.

use crate::model::Instance;

/// `y_i(t)`: machines given to task `i` in slot `t`, for `t` in `1..=horizon`.
///
/// Rows are stored with an unused slot 0 so that slot numbers index directly.
/// The per-slot load `W(t)` is cached and kept in sync by every mutator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationMatrix {
    machines: u64,
    horizon: usize,
    rows: Vec<Vec<u64>>,
    load: Vec<u64>,
}

impl AllocationMatrix {
    pub fn new(tasks: usize, horizon: usize, machines: u64) -> Self {
        AllocationMatrix {
            machines,
            horizon,
            rows: vec![vec![0; horizon + 1]; tasks],
            load: vec![0; horizon + 1],
        }
    }

    pub fn for_instance(inst: &Instance) -> Self {
        Self::new(inst.len(), inst.horizon(), inst.machines())
    }

    /// Builds a matrix from dense rows `[y(1), ..., y(horizon)]`.
    pub fn from_rows(rows: &[Vec<u64>], horizon: usize, machines: u64) -> Self {
        let mut m = Self::new(rows.len(), horizon, machines);
        for (i, row) in rows.iter().enumerate() {
            for (t, &y) in row.iter().enumerate().take(horizon) {
                m.add(i, t + 1, y);
            }
        }
        m
    }

    pub fn machines(&self) -> u64 {
        self.machines
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn tasks(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn get(&self, task: usize, slot: usize) -> u64 {
        self.rows[task][slot]
    }

    /// `W(t)`.
    #[inline]
    pub fn load(&self, slot: usize) -> u64 {
        self.load[slot]
    }

    /// `C - W(t)`, saturating at zero for matrices that broke capacity.
    #[inline]
    pub fn free(&self, slot: usize) -> u64 {
        self.machines.saturating_sub(self.load[slot])
    }

    #[inline]
    pub fn add(&mut self, task: usize, slot: usize, amount: u64) {
        self.rows[task][slot] += amount;
        self.load[slot] += amount;
    }

    #[inline]
    pub fn remove(&mut self, task: usize, slot: usize, amount: u64) {
        self.rows[task][slot] -= amount;
        self.load[slot] -= amount;
    }

    /// Row of task `i` as `[y(1), ..., y(horizon)]`.
    pub fn row(&self, task: usize) -> &[u64] {
        &self.rows[task][1..]
    }

    pub fn total(&self, task: usize) -> u64 {
        self.rows[task].iter().sum()
    }

    /// `sum_{s=1}^{slot} y_i(s)`.
    pub fn prefix(&self, task: usize, slot: usize) -> u64 {
        self.rows[task][1..=slot.min(self.horizon)].iter().sum()
    }

    /// `sum_{s > slot} y_i(s)`.
    pub fn suffix(&self, task: usize, slot: usize) -> u64 {
        if slot >= self.horizon {
            return 0;
        }
        self.rows[task][slot + 1..].iter().sum()
    }

    /// Total allocation of all tasks in `[from, to]`.
    pub fn window_total(&self, from: usize, to: usize) -> u64 {
        let to = to.min(self.horizon);
        if from > to {
            return 0;
        }
        self.load[from.max(1)..=to].iter().sum()
    }

    /// Last slot with a positive allocation, i.e. the completion slot.
    pub fn completion(&self, task: usize) -> Option<usize> {
        (1..=self.horizon).rev().find(|&t| self.rows[task][t] > 0)
    }

    /// Per-slot loads `[W(1), ..., W(horizon)]`.
    pub fn loads(&self) -> &[u64] {
        &self.load[1..]
    }

    /// Re-grids the matrix onto a new horizon, dropping slots past it.
    pub fn with_horizon(&self, horizon: usize) -> Self {
        let rows: Vec<Vec<u64>> = (0..self.tasks()).map(|i| self.row(i).to_vec()).collect();
        Self::from_rows(&rows, horizon, self.machines)
    }

    /// Checks the matrix against the instance: parallelism bounds, deadlines
    /// and machine capacity. Returns one message per broken constraint.
    pub fn check(&self, inst: &Instance) -> Vec<String> {
        let mut out = Vec::new();
        if self.rows.len() != inst.len() {
            out.push(format!("matrix has {} rows for {} tasks", self.rows.len(), inst.len()));
            return out;
        }
        for (i, task) in inst.tasks().iter().enumerate() {
            for t in 1..=self.horizon {
                let y = self.rows[i][t];
                if y > task.parallelism {
                    out.push(format!("{}: y({t}) = {y} exceeds parallelism {}", task.id, task.parallelism));
                }
                if y > 0 && t > task.deadline {
                    out.push(format!("{}: y({t}) = {y} after deadline {}", task.id, task.deadline));
                }
            }
        }
        for t in 1..=self.horizon {
            let w: u64 = self.rows.iter().map(|r| r[t]).sum();
            if w != self.load[t] {
                out.push(format!("slot {t}: cached load {} differs from {w}", self.load[t]));
            }
            if w > self.machines {
                out.push(format!("slot {t}: load {w} exceeds {} machines", self.machines));
            }
        }
        out
    }

    /// Checks `check` plus full allocation of exactly the tasks in `accepted`
    /// (every other task must be empty).
    pub fn check_complete(&self, inst: &Instance, accepted: &[usize]) -> Vec<String> {
        let mut out = self.check(inst);
        let mut is_accepted = vec![false; inst.len()];
        for &i in accepted {
            is_accepted[i] = true;
        }
        for (i, task) in inst.tasks().iter().enumerate() {
            let total = self.total(i);
            if is_accepted[i] && total != task.demand {
                out.push(format!("{}: allocated {total} of demand {}", task.id, task.demand));
            }
            if !is_accepted[i] && total != 0 {
                out.push(format!("{}: not accepted but holds {total}", task.id));
            }
        }
        out
    }
}
