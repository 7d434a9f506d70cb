use thiserror::Error;

/// Errors raised by the scheduling library.
///
/// Infeasibility of a task set is usually reported as data (see
/// [`crate::capacity::CapacityReport`] and [`crate::ldf::Infeasible`]); the
/// variants here cover bad input, refused work and broken internal invariants.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid instance: {}", .0.join("; "))]
    Invalid(Vec<String>),

    #[error("empty instance")]
    EmptyInstance,

    #[error("window index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("infeasible residual: task {task} still needs {missing} machine-slots")]
    InfeasibleResidual { task: String, missing: u64 },

    #[error("task {task} is infeasible at any machine count")]
    InfeasibleAtAnyMachineCount { task: String },

    #[error("task {task} has zero value, weighted objectives need positive values")]
    ZeroValue { task: String },

    #[error("state space bound {bound} exceeds budget {budget}; use the greedy solver instead")]
    StateBudget { bound: String, budget: u64 },

    #[error("instance has {n} tasks, exhaustive search is limited to {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("bad parameter: {0}")]
    Parameter(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
