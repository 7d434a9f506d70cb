//! Command-line front end. [`run_command`] parses arguments, runs one
//! subcommand and returns the process exit code:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success (or feasible) |
//! | 1 | infeasible instance (`feasible`, `ldf`, `minmachines`) |
//! | 2 | bad input or refused work |
//! | 3 | internal invariant violated, or `verify` found a disagreement |

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_traits::Zero;

use crate::capacity::{check_subset, subset_workloads, Workload};
use crate::dp::{dp_solve_with_budget, DEFAULT_STATE_BUDGET};
use crate::error::{Error, Result};
use crate::generate::{adversarial_instance, random_instance, RandomParams};
use crate::greedy::{check_feature1, check_feature2, greedy_rlm, greedy_rlm_traced};
use crate::io::{instance_to_json, parse_instance, phase_records, round_deadlines, ResultFile};
use crate::ldf::{audit_trace, ldf_schedule_all, ldf_schedule_traced, write_trace, LdfOutcome};
use crate::model::{format_value, parse_value, DeadlineProfile, Instance, Value};
use crate::objectives::{minimize_machines, minimize_max_weighted, LatenessQuery, WeightedMode};
use crate::oracle::{enumerate_max_weighted, exhaustive_welfare, flow_feasible, scan_machine_min, window_capacity, EXHAUSTIVE_LIMIT};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "malleable-sched", version, about = "Schedule malleable batch tasks with deadlines on identical machines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Input {
    /// Instance file (JSON)
    #[arg(short = 'i', long = "input")]
    input: PathBuf,
    /// Write the JSON result here instead of standard output
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
    /// Override the instance's machine count
    #[arg(long)]
    machines: Option<u64>,
    /// Round every deadline down to the nearest of these slots (comma separated)
    #[arg(long = "round-deadlines", value_delimiter = ',')]
    round_deadlines: Option<Vec<usize>>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the boundary condition for the whole task set
    Feasible(Input),
    /// Schedule every task with the optimal scheduler
    Ldf {
        #[command(flatten)]
        input: Input,
        /// Write the change trace (JSON lines) here
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Greedy welfare maximization
    Greedy {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Exact welfare maximization by dynamic programming
    Dp {
        #[command(flatten)]
        input: Input,
        /// Refuse when (C*d+1)^L exceeds this many states
        #[arg(long, default_value_t = DEFAULT_STATE_BUDGET)]
        budget: u64,
    },
    /// Fewest machines that complete every task
    Minmachines(Input),
    /// Minimize the maximum weighted lateness or completion time
    Minlateness {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "lateness", value_parser = ["lateness", "completion"])]
        mode: String,
    },
    /// Generate an instance
    Gen {
        #[command(subcommand)]
        family: Family,
    },
    /// Cross-check every solver on an instance against the brute-force oracles
    Verify(Input),
    /// Runtime table of the optimal and greedy schedulers across sizes
    Bench(BenchArgs),
}

#[derive(Debug, Subcommand)]
enum Family {
    /// Uniformly random tasks
    Random {
        #[arg(long, default_value_t = 6)]
        tasks: usize,
        #[arg(long, default_value_t = 2)]
        machines: u64,
        #[arg(long, default_value_t = 6)]
        max_deadline: usize,
        #[arg(long, default_value_t = 3)]
        max_parallelism: u64,
        #[arg(long, default_value_t = 10)]
        max_value: i64,
        /// Resample tasks until their slackness reaches this value
        #[arg(long)]
        min_slackness: Option<String>,
        /// Allow tasks that cannot finish even alone
        #[arg(long)]
        allow_infeasible: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// The family on which any marginal-value greedy reaches only d1/d2 of the optimum
    Adversarial {
        #[arg(long, default_value_t = 2)]
        machines: u64,
        #[arg(long)]
        d1: usize,
        #[arg(long)]
        d2: usize,
        #[arg(long, default_value = "0.001")]
        epsilon: String,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Task counts to time (comma separated)
    #[arg(long, value_delimiter = ',', default_values_t = [200usize, 400, 800])]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    max_deadline: usize,
    #[arg(long, default_value_t = 4)]
    max_parallelism: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

/// Parses `argv` (including the program name), runs the command and
/// returns the exit code. Normal output goes to standard output.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_command_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run_command`] writing to the given streams.
pub fn run_command_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InfeasibleAtAnyMachineCount { .. } => EXIT_INFEASIBLE,
        Error::Invariant(_) | Error::InfeasibleResidual { .. } | Error::IndexOutOfRange { .. } => EXIT_INVARIANT,
        _ => EXIT_INPUT,
    }
}

fn load(input: &Input) -> Result<Instance> {
    let mut inst = parse_instance(&input.input)?;
    if let Some(c) = input.machines {
        inst = inst.with_machines(c)?;
    }
    if let Some(grid) = &input.round_deadlines {
        inst = round_deadlines(&inst, grid)?;
    }
    Ok(inst)
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            std::fs::write(p, format!("{text}\n")).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
        }
        None => writeln!(out, "{text}")?,
    }
    Ok(())
}

fn emit_result(out: &mut dyn Write, input: &Input, result: &ResultFile) -> Result<()> {
    emit(out, input.output.as_deref(), &result.to_json())?;
    if input.output.is_some() {
        let objective = result.objective.as_deref().map(|o| format!(" objective {o}")).unwrap_or_default();
        writeln!(out, "{}: feasible {} welfare {}{objective}", result.command, result.feasible, result.welfare)?;
    }
    Ok(())
}

fn write_trace_file(path: &Path, inst: &Instance, events: &[crate::ldf::TraceEvent]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_trace(BufWriter::new(file), inst, events)
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Feasible(input) => {
            let inst = load(&input)?;
            let all: Vec<usize> = (0..inst.len()).collect();
            let report = check_subset(&inst, &all, None);
            let feasible = report.feasible;
            let schedule = if feasible { ldf_schedule_all(&inst)?.into_schedule() } else { None };
            let welfare = if feasible { inst.value_of(&all) } else { Value::zero() };
            let mut result = ResultFile::new("feasible", &inst, feasible, inst.machines(), schedule.as_ref().map(|s| &s.matrix), &welfare);
            result.capacity_report = Some(report);
            emit_result(out, &input, &result)?;
            Ok(if feasible { EXIT_OK } else { EXIT_INFEASIBLE })
        }
        Command::Ldf { input, trace } => {
            let inst = load(&input)?;
            let all: Vec<usize> = (0..inst.len()).collect();
            let outcome = ldf_schedule_traced(&inst, &all)?;
            let result = match &outcome {
                LdfOutcome::Feasible(s) => {
                    if let Some(p) = &trace {
                        write_trace_file(p, &inst, &s.trace)?;
                    }
                    let mut r = ResultFile::new("ldf", &inst, true, inst.machines(), Some(&s.matrix), &inst.value_of(&all));
                    r.capacity_report = Some(s.report.clone());
                    r
                }
                LdfOutcome::Infeasible(f) => {
                    let mut r = ResultFile::new("ldf", &inst, false, inst.machines(), None, &Value::zero());
                    r.capacity_report = Some(f.report.clone());
                    r
                }
            };
            emit_result(out, &input, &result)?;
            Ok(if outcome.is_feasible() { EXIT_OK } else { EXIT_INFEASIBLE })
        }
        Command::Greedy { input, trace } => {
            let inst = load(&input)?;
            let g = if trace.is_some() { greedy_rlm_traced(&inst)? } else { greedy_rlm(&inst)? };
            if let Some(p) = &trace {
                write_trace_file(p, &inst, &g.trace)?;
            }
            let mut result = ResultFile::new("greedy", &inst, true, inst.machines(), Some(&g.matrix), &g.welfare);
            result.phases = Some(phase_records(&inst, &g.phases));
            emit_result(out, &input, &result)?;
            Ok(EXIT_OK)
        }
        Command::Dp { input, budget } => {
            let inst = load(&input)?;
            let sol = dp_solve_with_budget(&inst, budget)?;
            let result = ResultFile::new("dp", &inst, true, inst.machines(), Some(&sol.matrix), &sol.welfare);
            emit_result(out, &input, &result)?;
            Ok(EXIT_OK)
        }
        Command::Minmachines(input) => {
            let inst = load(&input)?;
            let best = minimize_machines(&inst)?;
            let all: Vec<usize> = (0..inst.len()).collect();
            let mut result = ResultFile::new("minmachines", &inst, true, best.machines, Some(&best.matrix), &inst.value_of(&all));
            result.objective = Some(best.machines.to_string());
            emit_result(out, &input, &result)?;
            Ok(EXIT_OK)
        }
        Command::Minlateness { input, mode } => {
            let inst = load(&input)?;
            let mode: WeightedMode = mode.parse()?;
            let best = minimize_max_weighted(&inst, mode)?;
            let all: Vec<usize> = (0..inst.len()).collect();
            let mut result = ResultFile::new("minlateness", &inst, true, inst.machines(), Some(&best.matrix), &inst.value_of(&all));
            result.objective = Some(format_value(&best.objective));
            result.deadlines = Some(inst.tasks().iter().zip(&best.deadlines).map(|(t, &d)| (t.id.clone(), d)).collect());
            emit_result(out, &input, &result)?;
            Ok(EXIT_OK)
        }
        Command::Gen { family } => {
            let (inst, output) = match family {
                Family::Random { tasks, machines, max_deadline, max_parallelism, max_value, min_slackness, allow_infeasible, seed, output } => {
                    let min_slackness = min_slackness.as_deref().map(parse_value).transpose()?;
                    let params = RandomParams { tasks, machines, max_deadline, max_parallelism, max_value, min_slackness, allow_infeasible };
                    (random_instance(&params, seed)?, output)
                }
                Family::Adversarial { machines, d1, d2, epsilon, output } => {
                    (adversarial_instance(machines, d1, d2, &parse_value(&epsilon)?)?, output)
                }
            };
            emit(out, output.as_deref(), &instance_to_json(&inst))?;
            Ok(EXIT_OK)
        }
        Command::Verify(input) => {
            let inst = load(&input)?;
            let checks = verify_instance(&inst)?;
            let mut failed = false;
            let mut lines = Vec::new();
            for (name, outcome) in &checks {
                let line = match outcome {
                    Check::Pass => format!("PASS {name}"),
                    Check::Skip(why) => format!("SKIP {name}: {why}"),
                    Check::Fail(why) => {
                        failed = true;
                        format!("FAIL {name}: {why}")
                    }
                };
                lines.push(line);
            }
            emit(out, input.output.as_deref(), &lines.join("\n"))?;
            Ok(if failed { EXIT_INVARIANT } else { EXIT_OK })
        }
        Command::Bench(args) => {
            let table = bench(&args.sizes, args.max_deadline, args.max_parallelism, args.seed)?;
            emit(out, args.output.as_deref(), &table)?;
            Ok(EXIT_OK)
        }
    }
}

/// Outcome of one `verify` check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Check {
    Pass,
    Skip(String),
    Fail(String),
}

fn check(ok: bool, why: impl FnOnce() -> String) -> Check {
    if ok {
        Check::Pass
    } else {
        Check::Fail(why())
    }
}

/// Largest instance on which `verify` runs the weighted-objective enumeration.
const VERIFY_HORIZON_LIMIT: usize = 40;

/// Runs every solver on `inst` and compares it with the matching oracle.
pub fn verify_instance(inst: &Instance) -> Result<Vec<(&'static str, Check)>> {
    let mut out = Vec::new();
    let all: Vec<usize> = (0..inst.len()).collect();
    let tasks: Vec<Workload> = subset_workloads(inst, &all, None);
    let c = inst.machines();

    let report = check_subset(inst, &all, None);
    let flow = flow_feasible(&tasks, c, None).feasible;
    let outcome = ldf_schedule_traced(inst, &all)?;
    out.push((
        "feasibility: boundary condition, max-flow and optimal scheduler agree",
        check(report.feasible == flow && flow == outcome.is_feasible(), || {
            format!("boundary {}, flow {flow}, scheduler {}", report.feasible, outcome.is_feasible())
        }),
    ));

    let profile = DeadlineProfile::from_deadlines(tasks.iter().map(|w| w.deadline));
    let l = profile.len();
    let bad = (1..=l).find(|&m| report.lambda_capped[m] != window_capacity(&tasks, c, profile.tau(l - m)));
    out.push(("capped window capacities equal max-flow window values", check(bad.is_none(), || format!("window {}", bad.unwrap_or(0)))));

    out.push(match &outcome {
        LdfOutcome::Feasible(s) => {
            let mut problems = s.matrix.check_complete(inst, &all);
            problems.extend(audit_trace(inst, &s.trace, true));
            let bad = (1..=l).find(|&m| s.matrix.window_total(profile.tau(l - m) + 1, profile.horizon()) != report.lambda_capped[m]);
            if let Some(m) = bad {
                problems.push(format!("window {m} holds less than its capped capacity"));
            }
            ("optimal schedule: complete, conserving, staircase, suffix-optimal", check(problems.is_empty(), || problems.join("; ")))
        }
        LdfOutcome::Infeasible(_) => ("optimal schedule: complete, conserving, staircase, suffix-optimal", Check::Skip("instance infeasible".into())),
    });

    let g = greedy_rlm(inst)?;
    let problems = g.matrix.check_complete(inst, &g.accepted);
    out.push(("greedy: accepted tasks fully allocated", check(problems.is_empty(), || problems.join("; "))));
    out.push(("greedy: suffix optimality after thresholds", check(check_feature2(inst, &g), || "violated".into())));
    let k_le_c = inst.tasks().iter().all(|t| t.parallelism <= c);
    out.push((
        "greedy: utilization below thresholds",
        if k_le_c { check(check_feature1(inst, &g, &g.ratio_bound), || "below (s-1)/s".into()) } else { Check::Skip("a task's parallelism exceeds the machine count".into()) },
    ));

    if inst.len() <= EXHAUSTIVE_LIMIT {
        let (opt, _) = exhaustive_welfare(inst)?;
        let dp = match dp_solve_with_budget(inst, DEFAULT_STATE_BUDGET) {
            Ok(sol) => check(sol.welfare == opt, || format!("dp {} vs oracle {}", format_value(&sol.welfare), format_value(&opt))),
            Err(Error::StateBudget { .. }) => Check::Skip("state budget exceeded".into()),
            Err(e) => return Err(e),
        };
        out.push(("dp welfare equals exhaustive optimum", dp));
        out.push((
            "greedy welfare within (s-1)/s of the optimum",
            check(g.welfare >= &g.ratio_bound * &opt, || format!("{} < {} * {}", format_value(&g.welfare), format_value(&g.ratio_bound), format_value(&opt))),
        ));
    } else {
        let why = format!("more than {EXHAUSTIVE_LIMIT} tasks");
        out.push(("dp welfare equals exhaustive optimum", Check::Skip(why.clone())));
        out.push(("greedy welfare within (s-1)/s of the optimum", Check::Skip(why)));
    }

    out.push((
        "machine minimum equals linear scan",
        match (minimize_machines(inst), scan_machine_min(&tasks)) {
            (Ok(a), Ok(b)) => check(a.machines == b, || format!("search {} vs scan {b}", a.machines)),
            (Err(Error::InfeasibleAtAnyMachineCount { .. }), Err(Error::InfeasibleAtAnyMachineCount { .. })) => Check::Pass,
            (a, b) => Check::Fail(format!("search {:?} vs scan {:?}", a.map(|m| m.machines), b)),
        },
    ));

    for (name, mode, completion) in [
        ("weighted lateness equals candidate enumeration", WeightedMode::Lateness, false),
        ("weighted completion time equals candidate enumeration", WeightedMode::Completion, true),
    ] {
        let outcome = if inst.is_empty() || inst.tasks().iter().any(|t| t.value == Value::zero()) {
            Check::Skip("needs a non-empty instance with positive values".into())
        } else if LatenessQuery::new(inst, mode).horizon > VERIFY_HORIZON_LIMIT {
            Check::Skip(format!("horizon above {VERIFY_HORIZON_LIMIT}"))
        } else {
            let got = minimize_max_weighted(inst, mode)?;
            let want = enumerate_max_weighted(inst, completion);
            check(Some(&got.objective) == want.as_ref() && got.achieved <= got.objective, || {
                format!("search {} vs enumeration {:?}", format_value(&got.objective), want.as_ref().map(format_value))
            })
        };
        out.push((name, outcome));
    }
    Ok(out)
}

/// One row per size: `n`, machines used, milliseconds for the optimal
/// scheduler and for the greedy solver.
pub fn bench(sizes: &[usize], max_deadline: usize, max_parallelism: u64, seed: u64) -> Result<String> {
    let mut rows = vec![format!("{:>6} {:>9} {:>10} {:>10}", "n", "machines", "ldf_ms", "greedy_ms")];
    for &n in sizes {
        let (inst, ldf, greedy) = bench_one(n, max_deadline, max_parallelism, seed)?;
        rows.push(format!("{n:>6} {:>9} {:>10.2} {:>10.2}", inst.machines(), ldf * 1e3, greedy * 1e3));
    }
    Ok(rows.join("\n"))
}

/// A feasible random instance with `n` tasks on the fewest machines that
/// complete it, and the seconds taken by the optimal scheduler and the
/// greedy solver on it.
pub fn bench_one(n: usize, max_deadline: usize, max_parallelism: u64, seed: u64) -> Result<(Instance, f64, f64)> {
    let params = RandomParams { tasks: n, machines: 1, max_deadline, max_parallelism, ..Default::default() };
    let inst = random_instance(&params, seed)?;
    let inst = inst.with_machines(minimize_machines(&inst)?.machines.max(1))?;
    let start = Instant::now();
    let outcome = ldf_schedule_all(&inst)?;
    let ldf = start.elapsed().as_secs_f64();
    if !outcome.is_feasible() {
        return Err(Error::Invariant("benchmark instance is infeasible on its minimum machine count".into()));
    }
    let start = Instant::now();
    greedy_rlm(&inst)?;
    let greedy = start.elapsed().as_secs_f64();
    Ok((inst, ldf, greedy))
}
