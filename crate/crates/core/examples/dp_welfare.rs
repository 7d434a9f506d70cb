//! Exact welfare maximization with the capacity-state dynamic program,
//! compared with the greedy solver and exhaustive search.

use malleable_sched::dp::dp_solve;
use malleable_sched::generate::{random_instance, RandomParams};
use malleable_sched::greedy::greedy_rlm;
use malleable_sched::model::format_value;
use malleable_sched::oracle::exhaustive_welfare;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = RandomParams { tasks: 10, machines: 2, max_deadline: 6, max_parallelism: 2, ..Default::default() };
    let inst = random_instance(&params, 5)?;
    let dp = dp_solve(&inst)?;
    let greedy = greedy_rlm(&inst)?;
    let (opt, _) = exhaustive_welfare(&inst)?;

    let chosen: Vec<&str> = dp.subset.iter().map(|&i| inst.task(i).id.as_str()).collect();
    println!("dp picks {chosen:?}, welfare {}", format_value(&dp.welfare));
    println!("list sizes {:?} (bound {})", dp.stats.list_sizes, dp.stats.state_bound);
    println!("greedy welfare {}", format_value(&greedy.welfare));
    println!("exhaustive optimum {}", format_value(&opt));
    assert_eq!(dp.welfare, opt);
    assert!(dp.matrix.check_complete(&inst, &dp.subset).is_empty());
    Ok(())
}
