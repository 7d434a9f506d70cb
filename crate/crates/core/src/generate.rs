//! Instance generators: seeded random instances and the adversarial family
//! on which any marginal-value greedy is no better than `d1 / d2`.

use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{derive_metrics, int_value, Instance, Task, Value};

/// Bounds for [`random_instance`]. Every quantity is drawn uniformly.
#[derive(Debug, Clone)]
pub struct RandomParams {
    pub tasks: usize,
    pub machines: u64,
    pub max_deadline: usize,
    pub max_parallelism: u64,
    /// Values are integers in `1..=max_value`.
    pub max_value: i64,
    /// Resample the demand until the task slackness reaches this bound.
    pub min_slackness: Option<Value>,
    /// Draw demands up to `k * max_deadline`, which may exceed what the task
    /// can finish by its own deadline.
    pub allow_infeasible: bool,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            tasks: 6,
            machines: 2,
            max_deadline: 6,
            max_parallelism: 3,
            max_value: 10,
            min_slackness: None,
            allow_infeasible: false,
        }
    }
}

/// Draws a random instance; the same parameters and seed always give the
/// same instance.
pub fn random_instance(params: &RandomParams, seed: u64) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_instance_with(params, &mut rng)
}

/// [`random_instance`] drawing from a caller-supplied generator.
pub fn random_instance_with<R: Rng>(params: &RandomParams, rng: &mut R) -> Result<Instance> {
    if params.machines == 0 || params.max_deadline == 0 || params.max_parallelism == 0 || params.max_value < 1 {
        return Err(Error::Parameter("machines, deadline, parallelism and value bounds must be positive".into()));
    }
    if let Some(s) = &params.min_slackness {
        if *s > int_value(params.max_deadline as i64) {
            return Err(Error::Parameter(format!("no task can reach slackness {s} with deadlines <= {}", params.max_deadline)));
        }
    }
    let mut tasks = Vec::with_capacity(params.tasks);
    for i in 0..params.tasks {
        let task = loop {
            let deadline = rng.gen_range(1..=params.max_deadline);
            let k = rng.gen_range(1..=params.max_parallelism);
            let cap = if params.allow_infeasible { params.max_deadline } else { deadline };
            let demand = rng.gen_range(1..=k * cap as u64);
            let value = rng.gen_range(1..=params.max_value);
            let t = Task::int(format!("t{}", i + 1), value, demand, deadline, k);
            match &params.min_slackness {
                Some(s) if derive_metrics(&t).slackness < *s => continue,
                _ => break t,
            }
        };
        tasks.push(task);
    }
    Instance::new(params.machines, tasks)
}

/// The adversarial family: `C * d1` unit tasks (value `1 + epsilon`,
/// deadline `d1`) followed by `C` long tasks of demand `d2 - d1 + 1`, value
/// equal to their demand and deadline `d2`; all with parallelism 1.
///
/// A marginal-value greedy takes every unit task and then has no room for the
/// long ones, while an optimal schedule runs all long tasks.
pub fn adversarial_instance(machines: u64, d1: usize, d2: usize, epsilon: &Value) -> Result<Instance> {
    if d2 <= d1 {
        return Err(Error::Parameter(format!("need d1 < d2, got d1 = {d1}, d2 = {d2}")));
    }
    if machines == 0 || d1 == 0 {
        return Err(Error::Parameter("machines and d1 must be positive".into()));
    }
    let unit_value = Value::one() + epsilon;
    let long = (d2 - d1 + 1) as u64;
    let mut tasks = Vec::new();
    for j in 0..machines as usize * d1 {
        tasks.push(Task::new(format!("u{}", j + 1), unit_value.clone(), 1, d1, 1));
    }
    for j in 0..machines as usize {
        tasks.push(Task::new(format!("b{}", j + 1), int_value(long as i64), long, d2, 1));
    }
    Instance::new(machines, tasks)
}

/// Optimal welfare of [`adversarial_instance`]: all long tasks plus the
/// `C * (d1 - 1)` unit tasks that still fit.
pub fn adversarial_optimum(machines: u64, d1: usize, d2: usize, epsilon: &Value) -> Value {
    let long = int_value((machines as usize * (d2 - d1 + 1)) as i64);
    let units = int_value((machines as usize * (d1 - 1)) as i64) * (Value::one() + epsilon);
    long + units
}

/// Welfare any marginal-value greedy reaches on [`adversarial_instance`].
pub fn adversarial_greedy_value(machines: u64, d1: usize, epsilon: &Value) -> Value {
    int_value((machines as usize * d1) as i64) * (Value::one() + epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_decimal;

    #[test]
    fn random_is_deterministic() {
        let p = RandomParams::default();
        assert_eq!(random_instance(&p, 7).unwrap(), random_instance(&p, 7).unwrap());
        assert_ne!(random_instance(&p, 7).unwrap(), random_instance(&p, 8).unwrap());
    }

    #[test]
    fn min_slackness_is_honoured() {
        let p = RandomParams { tasks: 40, min_slackness: Some(int_value(2)), ..Default::default() };
        let inst = random_instance(&p, 3).unwrap();
        assert!(inst.tasks().iter().all(|t| derive_metrics(t).slackness >= int_value(2)));
        let bad = RandomParams { min_slackness: Some(int_value(7)), ..Default::default() };
        assert!(random_instance(&bad, 1).is_err());
    }

    #[test]
    fn adversarial_shape() {
        let eps = parse_decimal("0.1").unwrap();
        let inst = adversarial_instance(2, 2, 4, &eps).unwrap();
        assert_eq!(inst.len(), 6);
        let units: Vec<_> = inst.tasks().iter().filter(|t| t.id.starts_with('u')).collect();
        assert_eq!(units.len(), 4);
        assert!(units.iter().all(|t| t.value == parse_decimal("1.1").unwrap() && t.demand == 1 && t.deadline == 2));
        let longs: Vec<_> = inst.tasks().iter().filter(|t| t.id.starts_with('b')).collect();
        assert_eq!(longs.len(), 2);
        assert!(longs.iter().all(|t| t.value == int_value(3) && t.demand == 3 && t.deadline == 4 && t.parallelism == 1));
        assert_eq!(adversarial_optimum(2, 2, 4, &eps), parse_decimal("8.2").unwrap());
        assert!(adversarial_instance(2, 4, 4, &eps).is_err());
    }
}
