//! Build an optimal schedule with the latest-deadline-first scheduler, then
//! replay its change trace and check the structural guarantees.

use malleable_sched::generate::{random_instance, RandomParams};
use malleable_sched::ldf::{audit_trace, ldf_schedule_traced, LdfOutcome};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = RandomParams { tasks: 8, machines: 4, max_deadline: 8, max_parallelism: 3, ..Default::default() };
    let inst = random_instance(&params, 11)?;
    let all: Vec<usize> = (0..inst.len()).collect();

    match ldf_schedule_traced(&inst, &all)? {
        LdfOutcome::Feasible(s) => {
            println!("scheduled {} tasks on {} machines", inst.len(), inst.machines());
            for &i in &s.order {
                let t = inst.task(i);
                println!("  {:>3} (D={}, d={}, k={}): {:?}", t.id, t.demand, t.deadline, t.parallelism, s.matrix.row(i));
            }
            println!("  load: {:?}", s.matrix.loads());
            let problems = audit_trace(&inst, &s.trace, true);
            println!("trace: {} events, {} problems", s.trace.len(), problems.len());
            assert!(problems.is_empty());
        }
        LdfOutcome::Infeasible(why) => {
            println!("infeasible: adding {} breaks window m = {}", inst.task(why.task).id, why.violation);
        }
    }
    Ok(())
}
