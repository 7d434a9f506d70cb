//! Run every solver on a batch of random instances and compare each with its
//! brute-force oracle, as the `verify` command does for a single file.

use malleable_sched::cli::{verify_instance, Check};
use malleable_sched::generate::{random_instance, RandomParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = RandomParams { tasks: 6, machines: 2, max_deadline: 6, max_parallelism: 2, ..Default::default() };
    let (mut pass, mut skip) = (0, 0);
    for seed in 0..50 {
        let inst = random_instance(&params, seed)?;
        for (name, outcome) in verify_instance(&inst)? {
            match outcome {
                Check::Pass => pass += 1,
                Check::Skip(_) => skip += 1,
                Check::Fail(why) => panic!("seed {seed}: {name}: {why}"),
            }
        }
    }
    println!("50 instances: {pass} checks passed, {skip} skipped, none failed");
    Ok(())
}
