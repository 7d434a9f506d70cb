//! Generate instances, write them as JSON, read them back and round
//! deadlines onto a coarser grid to shrink the dynamic program's state space.

use malleable_sched::dp::dp_solve;
use malleable_sched::generate::{random_instance, RandomParams};
use malleable_sched::io::{instance_to_json, parse_instance, round_deadlines};
use malleable_sched::greedy::greedy_rlm;
use malleable_sched::model::{format_value, int_value, DeadlineProfile, Instance};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = RandomParams { tasks: 12, machines: 3, max_deadline: 12, min_slackness: Some(int_value(2)), ..Default::default() };
    let inst = random_instance(&params, 3)?;
    let dir = std::env::temp_dir().join("malleable-sched-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("instance.json");
    std::fs::write(&path, instance_to_json(&inst))?;
    let back = parse_instance(&path)?;
    assert_eq!(back, inst);
    println!("wrote and re-read {}", path.display());

    let levels = |i: &Instance| DeadlineProfile::from_deadlines(i.tasks().iter().map(|t| t.deadline)).len();
    match dp_solve(&inst) {
        Ok(sol) => println!("{} distinct deadlines: welfare {}", levels(&inst), format_value(&sol.welfare)),
        Err(e) => println!("{} distinct deadlines: {e}", levels(&inst)),
    }
    // Rounding deadlines down only removes options, so every schedule of the
    // rounded instance is valid for the original one.
    let rounded = round_deadlines(&inst, &[1, 6, 12])?;
    let coarse = dp_solve(&rounded)?;
    println!(
        "{} after rounding: welfare {} (greedy on the original: {})",
        levels(&rounded),
        format_value(&coarse.welfare),
        format_value(&greedy_rlm(&inst)?.welfare)
    );
    Ok(())
}
