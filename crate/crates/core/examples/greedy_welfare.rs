//! Greedy welfare maximization on the adversarial family, where ordering by
//! marginal value admits every short task and blocks all the long ones.

use malleable_sched::generate::{adversarial_instance, adversarial_optimum};
use malleable_sched::greedy::{check_feature1, check_feature2, greedy_rlm};
use malleable_sched::model::{format_value, parse_decimal};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let eps = parse_decimal("0.1")?;
    let (c, d1, d2) = (2, 2, 4);
    let inst = adversarial_instance(c, d1, d2, &eps)?;
    let result = greedy_rlm(&inst)?;
    let opt = adversarial_optimum(c, d1, d2, &eps);

    let ids = |v: &[usize]| v.iter().map(|&i| inst.task(i).id.as_str()).collect::<Vec<_>>().join(" ");
    for p in &result.phases.phases {
        println!("phase {}: accepted [{}] rejected [{}] threshold {:?}", p.index, ids(&p.accepted), ids(&p.rejected), p.threshold);
    }
    println!("greedy welfare {} vs optimum {}", format_value(&result.welfare), format_value(&opt));
    println!("slackness {}, guaranteed fraction {}", format_value(result.slackness.as_ref().unwrap()), format_value(&result.ratio_bound));
    assert!(result.welfare >= &result.ratio_bound * &opt);
    assert!(check_feature1(&inst, &result, &result.ratio_bound));
    assert!(check_feature2(&inst, &result));
    Ok(())
}
