//! Decide whether a task set fits on C machines with the boundary condition,
//! and compare the answer with a max-flow computation.

use malleable_sched::capacity::{check_subset, Workload};
use malleable_sched::model::{Instance, Task};
use malleable_sched::oracle::flow_feasible;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // value, demand, deadline, parallelism
    let fits = Instance::new(2, vec![Task::int("a", 1, 4, 4, 2), Task::int("b", 1, 2, 2, 1)])?;
    let tight = Instance::new(2, vec![Task::int("a", 1, 4, 2, 2), Task::int("b", 1, 2, 2, 1)])?;

    for (name, inst) in [("fits", &fits), ("tight", &tight)] {
        let all: Vec<usize> = (0..inst.len()).collect();
        let report = check_subset(inst, &all, None);
        let tasks: Vec<Workload> = inst.tasks().iter().map(Workload::from).collect();
        let flow = flow_feasible(&tasks, inst.machines(), None);
        println!("{name}: feasible = {}", report.feasible);
        println!("  lambda   = {:?}", report.lambda);
        println!("  lambda^C = {:?}", report.lambda_capped);
        println!("  residual = {:?}", report.residual);
        if let Some(m) = report.first_violation {
            println!("  first violated window: m = {m}");
        }
        println!("  max flow {} of {}", flow.max_flow, flow.total_demand);
        assert_eq!(report.feasible, flow.feasible);
    }
    Ok(())
}
