//! Minimize the maximum weighted lateness and the maximum weighted
//! completion time with an exact search over candidate objective values.

use malleable_sched::model::{format_value, Instance, Task};
use malleable_sched::objectives::{minimize_max_weighted, WeightedMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = Instance::new(
        2,
        vec![Task::int("urgent", 5, 4, 2, 2), Task::int("bulk", 1, 6, 4, 2), Task::int("small", 2, 1, 1, 1)],
    )?;
    for mode in [WeightedMode::Lateness, WeightedMode::Completion] {
        let best = minimize_max_weighted(&inst, mode)?;
        println!("{mode}: optimum {} (schedule reaches {})", format_value(&best.objective), format_value(&best.achieved));
        for (i, t) in inst.tasks().iter().enumerate() {
            println!("  {:>6}: finishes at {:?}, row {:?}", t.id, best.matrix.completion(i), best.matrix.row(i));
        }
    }
    Ok(())
}
