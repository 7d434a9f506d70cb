use std::path::Path;

use malleable_sched::cli::{run_command_with, EXIT_INFEASIBLE, EXIT_INPUT, EXIT_OK};
use malleable_sched::io::{parse_instance, ResultFile};
use malleable_sched::ldf::{audit_trace, read_trace};

const PAIR: &str = r#"{"machines": 2, "tasks": [
    {"id": "a", "value": "1", "demand": 4, "deadline": 4, "parallelism": 2},
    {"id": "b", "value": "1", "demand": 2, "deadline": 2, "parallelism": 1}]}"#;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("malleable-sched").chain(args.iter().copied());
    let code = run_command_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn adversarial(dir: &Path) -> String {
    let p = dir.join("adv.json").to_str().unwrap().to_string();
    let (code, _, err) = run(&["gen", "adversarial", "--machines", "2", "--d1", "2", "--d2", "4", "--epsilon", "0.1", "-o", &p]);
    assert_eq!(code, EXIT_OK, "{err}");
    p
}

#[test]
fn feasible_reports_capacity() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write(dir.path(), "ok.json", PAIR);
    let (code, out, _) = run(&["feasible", "-i", &ok]);
    assert_eq!(code, EXIT_OK);
    let r = ResultFile::from_json(&out).unwrap();
    let report = r.capacity_report.as_ref().unwrap();
    assert_eq!(report.residual, vec![0, 2, 6]);
    assert!(r.verify(&parse_instance(&ok).unwrap()).is_empty());

    let bad = write(dir.path(), "bad.json", &PAIR.replace(r#""deadline": 4"#, r#""deadline": 2"#));
    let (code, out, _) = run(&["feasible", "-i", &bad]);
    assert_eq!(code, EXIT_INFEASIBLE);
    assert_eq!(ResultFile::from_json(&out).unwrap().capacity_report.unwrap().first_violation, Some(0));
    assert_eq!(run(&["ldf", "-i", &bad]).0, EXIT_INFEASIBLE);
}

#[test]
fn welfare_commands_on_the_adversarial_family() {
    let dir = tempfile::tempdir().unwrap();
    let adv = adversarial(dir.path());
    let inst = parse_instance(&adv).unwrap();

    let (code, out, _) = run(&["dp", "-i", &adv]);
    assert_eq!(code, EXIT_OK);
    let r = ResultFile::from_json(&out).unwrap();
    assert_eq!(r.welfare, "8.2");
    assert!(r.verify(&inst).is_empty());

    let (code, out, _) = run(&["greedy", "-i", &adv]);
    assert_eq!(code, EXIT_OK);
    let r = ResultFile::from_json(&out).unwrap();
    assert_eq!(r.welfare, "4.4");
    let phases = r.phases.as_ref().unwrap();
    assert_eq!(phases[0].rejected, vec!["b1", "b2"]);
    assert_eq!(phases[0].threshold, Some(4));
    assert!(r.verify(&inst).is_empty());

    let (code, out, _) = run(&["minmachines", "-i", &adv]);
    assert_eq!(code, EXIT_OK);
    let r = ResultFile::from_json(&out).unwrap();
    assert_eq!(r.objective.as_deref(), Some("3"));
    assert!(r.verify(&inst).is_empty());
}

#[test]
fn output_file_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write(dir.path(), "ok.json", PAIR);
    let res = dir.path().join("res.json");
    let trace = dir.path().join("trace.jsonl");
    let (code, out, _) = run(&["ldf", "-i", &ok, "-o", res.to_str().unwrap(), "--trace", trace.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("feasible true"));
    let inst = parse_instance(&ok).unwrap();
    let r = ResultFile::from_json(&std::fs::read_to_string(&res).unwrap()).unwrap();
    assert!(r.verify(&inst).is_empty());
    let events = read_trace(&std::fs::read_to_string(&trace).unwrap(), &inst).unwrap();
    assert!(!events.is_empty());
    assert!(audit_trace(&inst, &events, true).is_empty());
}

#[test]
fn weighted_modes() {
    let dir = tempfile::tempdir().unwrap();
    let one = r#"{"machines": 2, "tasks": [{"id": "a", "value": "1", "demand": 2, "deadline": 3, "parallelism": 2}]}"#;
    let p = write(dir.path(), "one.json", one);
    let (code, out, _) = run(&["minlateness", "-i", &p]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(ResultFile::from_json(&out).unwrap().objective.as_deref(), Some("-2"));
    let (_, out, _) = run(&["minlateness", "--mode", "completion", "-i", &p]);
    let r = ResultFile::from_json(&out).unwrap();
    assert_eq!(r.objective.as_deref(), Some("1"));
    assert!(r.verify(&parse_instance(&p).unwrap()).is_empty());

    let zero = write(dir.path(), "zero.json", &one.replace(r#""value": "1""#, r#""value": "0""#));
    assert_eq!(run(&["minlateness", "-i", &zero]).0, EXIT_INPUT);
    assert_eq!(run(&["minlateness", "--mode", "tardiness", "-i", &p]).0, EXIT_INPUT);
}

#[test]
fn overrides_and_rounding() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", &PAIR.replace(r#""deadline": 4"#, r#""deadline": 2"#));
    assert_eq!(run(&["feasible", "-i", &bad, "--machines", "3"]).0, EXIT_OK);
    let ok = write(dir.path(), "ok.json", PAIR);
    // a: deadline 4 -> 2, now too tight on two machines
    assert_eq!(run(&["feasible", "-i", &ok, "--round-deadlines", "2"]).0, EXIT_INFEASIBLE);
    assert_eq!(run(&["feasible", "-i", &ok, "--round-deadlines", "3"]).0, EXIT_INPUT);
}

#[test]
fn input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let garbage = write(dir.path(), "g.json", "{not json");
    let (code, _, err) = run(&["ldf", "-i", &garbage]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("parse error"));

    let dup = write(dir.path(), "dup.json", &PAIR.replace(r#""id": "b""#, r#""id": "a""#));
    let (code, _, err) = run(&["greedy", "-i", &dup]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("tasks[1].id: duplicate id \"a\""), "{err}");

    let unknown = write(dir.path(), "u.json", &PAIR.replace(r#""machines": 2"#, r#""machines": 2, "extra": true"#));
    assert_eq!(run(&["ldf", "-i", &unknown]).0, EXIT_INPUT);
    assert_eq!(run(&["ldf", "-i", "/nonexistent/instance.json"]).0, EXIT_INPUT);
    assert_eq!(run(&["frobnicate"]).0, EXIT_INPUT);
    assert_eq!(run(&["--help"]).0, EXIT_OK);

    let hopeless = write(dir.path(), "h.json", &PAIR.replace(r#""deadline": 4"#, r#""deadline": 1"#));
    assert_eq!(run(&["minmachines", "-i", &hopeless]).0, EXIT_INFEASIBLE);
    let adv = adversarial(dir.path());
    assert_eq!(run(&["dp", "-i", &adv, "--budget", "10"]).0, EXIT_INPUT);
}

#[test]
fn generation_is_deterministic_and_verifiable() {
    let (code, a, _) = run(&["gen", "random", "--tasks", "7", "--seed", "42"]);
    assert_eq!(code, EXIT_OK);
    let (_, b, _) = run(&["gen", "random", "--tasks", "7", "--seed", "42"]);
    let (_, c, _) = run(&["gen", "random", "--tasks", "7", "--seed", "43"]);
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(run(&["gen", "adversarial", "--d1", "4", "--d2", "4"]).0, EXIT_INPUT);

    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "r.json", &a);
    let (code, out, _) = run(&["verify", "-i", &p]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.lines().all(|l| l.starts_with("PASS") || l.starts_with("SKIP")));
}

#[test]
fn bench_prints_a_row_per_size() {
    let (code, out, _) = run(&["bench", "--sizes", "10,20"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().count(), 3);
}
