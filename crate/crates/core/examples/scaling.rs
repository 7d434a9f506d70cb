//! Time the optimal scheduler and the greedy solver on growing instances.

use malleable_sched::cli::bench;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{}", bench(&[100, 200, 400, 800], 20, 4, 1)?);
    Ok(())
}
