//! Fewest machines that complete every task, found by binary search on the
//! boundary condition.

use malleable_sched::generate::{adversarial_instance, random_instance, RandomParams};
use malleable_sched::model::parse_decimal;
use malleable_sched::objectives::minimize_machines;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let adv = adversarial_instance(2, 2, 4, &parse_decimal("0.1")?)?;
    println!("adversarial family: {} machines", minimize_machines(&adv)?.machines);

    let params = RandomParams { tasks: 40, machines: 1, max_deadline: 12, max_parallelism: 4, ..Default::default() };
    for seed in 0..3 {
        let inst = random_instance(&params, seed)?;
        let best = minimize_machines(&inst)?;
        let demand: u64 = inst.tasks().iter().map(|t| t.demand).sum();
        println!("seed {seed}: {} tasks, demand {demand}, horizon {} -> {} machines", inst.len(), inst.horizon(), best.machines);
    }
    Ok(())
}
