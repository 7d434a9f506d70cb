//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Tolerances and instance counts are pinned below.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use malleable_sched::capacity::{self, lambda_capped, Workload};
use malleable_sched::dp::dp_solve;
use malleable_sched::generate::{adversarial_greedy_value, adversarial_instance, adversarial_optimum, random_instance, RandomParams};
use malleable_sched::greedy::{check_feature1, check_feature2, greedy_rlm};
use malleable_sched::ldf::{audit_trace, ldf_schedule_all, ldf_schedule_traced, LdfOutcome, TraceOp};
use malleable_sched::matrix::AllocationMatrix;
use malleable_sched::model::{build_profile, int_value, parse_decimal, Instance, Value};
use malleable_sched::objectives::{minimize_machines, minimize_max_weighted, LatenessQuery, WeightedMode};
use malleable_sched::oracle::{enumerate_max_weighted, exhaustive_welfare, flow_feasible, scan_machine_min, window_capacity};

const FEASIBILITY_INSTANCES: u64 = 1000;
const FEASIBILITY_TIME_LIMIT: Duration = Duration::from_secs(60);
const DP_INSTANCES: usize = 300;
const GREEDY_INSTANCES: usize = 300;
const MACHINE_INSTANCES: u64 = 300;
const WEIGHTED_INSTANCES: usize = 200;
const WEIGHTED_MAX_HORIZON: usize = 12;
const TIGHTNESS_EPSILON: &str = "0.001";
const TIGHTNESS_TOLERANCE: f64 = 0.02;
const SCALING_SIZES: [usize; 3] = [200, 400, 800];
const SCALING_TIME_LIMIT: Duration = Duration::from_secs(5);
const SCALING_MAX_GROWTH: f64 = 5.0;
const SCALING_REPEATS: usize = 5;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn workloads(inst: &Instance) -> Vec<Workload> {
    inst.tasks().iter().map(Workload::from).collect()
}

fn all(inst: &Instance) -> Vec<usize> {
    (0..inst.len()).collect()
}

/// n <= 6, d <= 6, C <= 4, k <= 3, integer values <= 10.
fn small_family(seed: u64) -> Instance {
    let params = RandomParams {
        tasks: 1 + (seed % 6) as usize,
        machines: 1 + (seed / 6) % 4,
        max_deadline: 6,
        max_parallelism: 3,
        max_value: 10,
        min_slackness: None,
        allow_infeasible: seed % 5 == 0,
    };
    random_instance(&params, seed).expect("valid parameters")
}

fn three_way_equivalence() -> Outcome {
    let start = Instant::now();
    let (mut feasible, mut disagreements) = (0, Vec::new());
    for seed in 0..FEASIBILITY_INSTANCES {
        let inst = small_family(seed);
        let w = workloads(&inst);
        let boundary = capacity::check_workloads(&w, inst.machines()).feasible;
        let flow = flow_feasible(&w, inst.machines(), None).feasible;
        let ldf = match ldf_schedule_all(&inst).map_err(|e| e.to_string())? {
            LdfOutcome::Feasible(s) => s.matrix.check_complete(&inst, &all(&inst)).is_empty(),
            LdfOutcome::Infeasible(_) => false,
        };
        feasible += usize::from(flow);
        if !(boundary == flow && ldf == flow) {
            disagreements.push(seed);
        }
    }
    let elapsed = start.elapsed();
    if !disagreements.is_empty() {
        return Err(format!("{} disagreements, first at seed {}", disagreements.len(), disagreements[0]));
    }
    if elapsed > FEASIBILITY_TIME_LIMIT {
        return Err(format!("took {elapsed:.1?}, limit {FEASIBILITY_TIME_LIMIT:?}"));
    }
    Ok(format!("{FEASIBILITY_INSTANCES} instances ({feasible} feasible), 0 disagreements, {elapsed:.2?}"))
}

fn suffix_windows_match_flow() -> Outcome {
    let mut windows = 0;
    for seed in 0..FEASIBILITY_INSTANCES {
        let inst = small_family(seed);
        let w = workloads(&inst);
        let profile = build_profile(inst.tasks()).map_err(|e| e.to_string())?;
        let (_, capped) = lambda_capped(&profile, &w, inst.machines());
        let l = profile.len();
        for m in 1..=l {
            let flow = window_capacity(&w, inst.machines(), profile.tau(l - m));
            if capped[m] != flow {
                return Err(format!("seed {seed}, m = {m}: lambda^C = {} but flow = {flow}", capped[m]));
            }
            windows += 1;
        }
    }
    Ok(format!("{windows} suffix windows over {FEASIBILITY_INSTANCES} instances, all exact"))
}

fn dp_exactness() -> Outcome {
    let (mut checked, mut seed) = (0, 0u64);
    while checked < DP_INSTANCES {
        let params = RandomParams {
            tasks: 1 + (seed % 8) as usize,
            machines: 1 + seed % 4,
            max_deadline: 6,
            max_parallelism: 3,
            max_value: 10,
            min_slackness: None,
            allow_infeasible: seed % 4 == 0,
        };
        let inst = random_instance(&params, seed).map_err(|e| e.to_string())?;
        seed += 1;
        if build_profile(inst.tasks()).map_err(|e| e.to_string())?.len() > 3 {
            continue;
        }
        let sol = dp_solve(&inst).map_err(|e| format!("seed {}: {e}", seed - 1))?;
        let (opt, _) = exhaustive_welfare(&inst).map_err(|e| e.to_string())?;
        if sol.welfare != opt || inst.value_of(&sol.subset) != opt {
            return Err(format!("seed {}: dp {} vs exhaustive {opt}", seed - 1, sol.welfare));
        }
        if !sol.matrix.check_complete(&inst, &sol.subset).is_empty() {
            return Err(format!("seed {}: dp schedule invalid", seed - 1));
        }
        checked += 1;
    }
    Ok(format!("{checked} instances with n <= 8, L <= 3; welfare equal in every case"))
}

fn greedy_bound() -> Outcome {
    let (mut checked, mut seed) = (0, 0u64);
    let mut worst: Option<Value> = None;
    while checked < GREEDY_INSTANCES {
        let machines = 1 + seed % 3;
        let params = RandomParams {
            tasks: 3 + (seed % 6) as usize,
            machines,
            max_deadline: 8,
            max_parallelism: machines.min(3),
            max_value: 12,
            min_slackness: Some(Value::new(3.into(), 2.into())),
            allow_infeasible: false,
        };
        let inst = random_instance(&params, seed).map_err(|e| e.to_string())?;
        seed += 1;
        let r = greedy_rlm(&inst).map_err(|e| e.to_string())?;
        let s = r.slackness.clone().ok_or("no slackness on a non-empty instance")?;
        if s <= int_value(1) {
            continue;
        }
        let bound = (&s - int_value(1)) / &s;
        if bound != r.ratio_bound {
            return Err(format!("seed {}: reported bound {} differs from (s-1)/s = {bound}", seed - 1, r.ratio_bound));
        }
        let (opt, _) = exhaustive_welfare(&inst).map_err(|e| e.to_string())?;
        if r.welfare < &bound * &opt {
            return Err(format!("seed {}: greedy {} < {bound} * {opt}", seed - 1, r.welfare));
        }
        if !check_feature1(&inst, &r, &bound) {
            return Err(format!("seed {}: feature 1 fails", seed - 1));
        }
        if !check_feature2(&inst, &r) {
            return Err(format!("seed {}: feature 2 fails", seed - 1));
        }
        if opt > int_value(0) {
            let ratio = &r.welfare / &opt;
            if worst.as_ref().is_none_or(|w| ratio < *w) {
                worst = Some(ratio);
            }
        }
        checked += 1;
    }
    let worst = worst.map_or("n/a".into(), |w| format!("{:.3}", to_f64(&w)));
    Ok(format!("{checked} instances with s > 1, k <= C; bound and both features hold; worst ratio {worst}"))
}

fn to_f64(v: &Value) -> f64 {
    use num_traits::ToPrimitive;
    v.to_f64().unwrap_or(f64::NAN)
}

fn tightness() -> Outcome {
    let eps = parse_decimal(TIGHTNESS_EPSILON).map_err(|e| e.to_string())?;
    let c = 2;
    let mut parts = Vec::new();
    // the closed form is checked against the oracle at the smallest size
    let small = adversarial_instance(c, 2, 4, &eps).map_err(|e| e.to_string())?;
    let (oracle, _) = exhaustive_welfare(&small).map_err(|e| e.to_string())?;
    if oracle != adversarial_optimum(c, 2, 4, &eps) {
        return Err(format!("closed-form optimum {} differs from the oracle {oracle}", adversarial_optimum(c, 2, 4, &eps)));
    }
    for d2 in [4usize, 8, 16] {
        let d1 = d2 / 2;
        let inst = adversarial_instance(c, d1, d2, &eps).map_err(|e| e.to_string())?;
        let opt = if d2 <= 8 {
            exhaustive_welfare(&inst).map_err(|e| e.to_string())?.0
        } else {
            let closed = adversarial_optimum(c, d1, d2, &eps);
            let dp = dp_solve(&inst).map_err(|e| e.to_string())?.welfare;
            if dp != closed {
                return Err(format!("d2 = {d2}: dp {dp} differs from the closed form {closed}"));
            }
            closed
        };
        let g = greedy_rlm(&inst).map_err(|e| e.to_string())?;
        if g.welfare != adversarial_greedy_value(c, d1, &eps) {
            return Err(format!("d2 = {d2}: greedy welfare {} differs from the expected {}", g.welfare, adversarial_greedy_value(c, d1, &eps)));
        }
        let ratio = to_f64(&(&g.welfare / &opt));
        let target = d1 as f64 / d2 as f64;
        if (ratio - target).abs() > TIGHTNESS_TOLERANCE {
            return Err(format!("d2 = {d2}: ratio {ratio:.4} vs {target:.4}"));
        }
        parts.push(format!("d2={d2}: {ratio:.4} vs {target:.3}"));
    }
    Ok(parts.join(", "))
}

fn machine_minimization() -> Outcome {
    for seed in 0..MACHINE_INSTANCES {
        let params = RandomParams { tasks: 1 + (seed % 7) as usize, machines: 1, max_deadline: 6, max_parallelism: 4, ..Default::default() };
        let inst = random_instance(&params, seed).map_err(|e| e.to_string())?;
        let w = workloads(&inst);
        let got = minimize_machines(&inst).map_err(|e| e.to_string())?;
        let scan = scan_machine_min(&w).map_err(|e| e.to_string())?;
        if got.machines != scan {
            return Err(format!("seed {seed}: binary search {} vs scan {scan}", got.machines));
        }
        if got.machines > 0 && flow_feasible(&w, got.machines - 1, None).feasible {
            return Err(format!("seed {seed}: {} machines also suffice", got.machines - 1));
        }
    }
    Ok(format!("{MACHINE_INSTANCES} instances; equal to the scan, C* - 1 infeasible in every case"))
}

fn weighted_search() -> Outcome {
    let (mut checked, mut seed) = (0, 0u64);
    while checked < WEIGHTED_INSTANCES {
        let params = RandomParams {
            tasks: 1 + (seed % 5) as usize,
            machines: 1 + seed % 3,
            max_deadline: 5,
            max_parallelism: 3,
            max_value: 5,
            min_slackness: None,
            allow_infeasible: seed % 3 == 0,
        };
        let inst = random_instance(&params, seed).map_err(|e| e.to_string())?;
        seed += 1;
        if LatenessQuery::new(&inst, WeightedMode::Lateness).horizon > WEIGHTED_MAX_HORIZON {
            continue;
        }
        for (mode, completion) in [(WeightedMode::Lateness, false), (WeightedMode::Completion, true)] {
            let got = minimize_max_weighted(&inst, mode).map_err(|e| format!("seed {}: {e}", seed - 1))?;
            let want = enumerate_max_weighted(&inst, completion).ok_or(format!("seed {}: enumeration found nothing", seed - 1))?;
            if got.objective != want {
                return Err(format!("seed {}, {mode}: search {} vs enumeration {want}", seed - 1, got.objective));
            }
            if got.achieved > got.objective {
                return Err(format!("seed {}, {mode}: schedule reaches {} above {}", seed - 1, got.achieved, got.objective));
            }
        }
        checked += 1;
    }
    Ok(format!("{checked} instances with H <= {WEIGHTED_MAX_HORIZON}, both modes equal to enumeration"))
}

fn fastest<F: FnMut()>(mut f: F) -> Duration {
    (0..SCALING_REPEATS)
        .map(|_| {
            let start = Instant::now();
            f();
            start.elapsed()
        })
        .min()
        .unwrap()
}

fn scaling() -> Outcome {
    let mut times = Vec::new();
    for n in SCALING_SIZES {
        let params = RandomParams { tasks: n, machines: 1, max_deadline: 20, max_parallelism: 4, ..Default::default() };
        let inst = random_instance(&params, n as u64).map_err(|e| e.to_string())?;
        let c = minimize_machines(&inst).map_err(|e| e.to_string())?.machines;
        let inst = inst.with_machines(c).map_err(|e| e.to_string())?;
        if !ldf_schedule_all(&inst).map_err(|e| e.to_string())?.is_feasible() {
            return Err(format!("n = {n}: generated instance infeasible"));
        }
        let ldf = fastest(|| {
            ldf_schedule_all(&inst).unwrap();
        });
        let greedy = fastest(|| {
            greedy_rlm(&inst).unwrap();
        });
        if ldf > SCALING_TIME_LIMIT || greedy > SCALING_TIME_LIMIT {
            return Err(format!("n = {n}: ldf {ldf:.2?}, greedy {greedy:.2?}"));
        }
        times.push((n, ldf, greedy));
    }
    let growth = |a: Duration, b: Duration| b.as_secs_f64() / a.as_secs_f64().max(1e-9);
    let (_, l4, g4) = times[1];
    let (_, l8, g8) = times[2];
    let (lg, gg) = (growth(l4, l8), growth(g4, g8));
    let table: Vec<String> = times.iter().map(|(n, l, g)| format!("n={n}: ldf {l:.1?} greedy {g:.1?}")).collect();
    if lg > SCALING_MAX_GROWTH || gg > SCALING_MAX_GROWTH {
        return Err(format!("400 -> 800 growth ldf {lg:.2}x, greedy {gg:.2}x; {}", table.join(", ")));
    }
    Ok(format!("{}; 400 -> 800 growth ldf {lg:.2}x, greedy {gg:.2}x", table.join(", ")))
}

/// Replays an LDF trace and, after each task is done, compares the
/// schedule's suffix-window loads with `lambda^C` of the tasks placed so far.
fn suffix_sums_after_each_task(inst: &Instance, trace: &[malleable_sched::ldf::TraceEvent]) -> Result<usize, String> {
    let profile = build_profile(inst.tasks()).map_err(|e| e.to_string())?;
    let l = profile.len();
    let mut m = AllocationMatrix::for_instance(inst);
    let mut placed = Vec::new();
    let mut checks = 0;
    for e in trace {
        match e.op {
            TraceOp::Grant => m.add(e.task, e.to_slot, e.amount),
            TraceOp::Transfer | TraceOp::Shift => {
                m.remove(e.task, e.from_slot, e.amount);
                m.add(e.task, e.to_slot, e.amount);
            }
            TraceOp::Done => {
                placed.push(Workload::from(inst.task(e.task)));
                let (_, capped) = lambda_capped(&profile, &placed, inst.machines());
                for j in 0..=l {
                    let window = m.window_total(profile.tau(l - j) + 1, profile.horizon());
                    if window != capped[j] {
                        return Err(format!("after {}: window {j} holds {window}, lambda^C = {}", inst.task(e.task).id, capped[j]));
                    }
                    checks += 1;
                }
            }
        }
    }
    Ok(checks)
}

fn structural_invariants() -> Outcome {
    let (mut runs, mut checks) = (0, 0);
    for seed in 0..FEASIBILITY_INSTANCES {
        let inst = small_family(seed);
        let LdfOutcome::Feasible(s) = ldf_schedule_traced(&inst, &all(&inst)).map_err(|e| e.to_string())? else {
            continue;
        };
        let errors = audit_trace(&inst, &s.trace, true);
        if let Some(e) = errors.first() {
            return Err(format!("seed {seed}: {e}"));
        }
        checks += suffix_sums_after_each_task(&inst, &s.trace).map_err(|e| format!("seed {seed}: {e}"))?;
        runs += 1;
    }
    Ok(format!("{runs} traced runs; staircase and conservation hold, {checks} suffix sums equal lambda^C"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("feasibility equivalence", three_way_equivalence),
        ("suffix windows vs flow", suffix_windows_match_flow),
        ("dp exactness", dp_exactness),
        ("greedy bound and features", greedy_bound),
        ("tightness family", tightness),
        ("machine minimization", machine_minimization),
        ("weighted objectives", weighted_search),
        ("scaling", scaling),
        ("structural invariants", structural_invariants),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
