use proptest::prelude::*;

use malleable_sched::capacity::{is_feasible, Workload};
use malleable_sched::greedy::greedy_rlm;
use malleable_sched::io::{instance_to_json, parse_instance_str};
use malleable_sched::ldf::{ldf_schedule_all, LdfOutcome};
use malleable_sched::model::{build_profile, Instance, Task};

fn task() -> impl Strategy<Value = (i64, u64, usize, u64)> {
    (1i64..=10, 1usize..=6, 1u64..=3).prop_flat_map(|(v, d, k)| (Just(v), 1..=k * d as u64, Just(d), Just(k)))
}

fn instance() -> impl Strategy<Value = Instance> {
    (1u64..=4, prop::collection::vec(task(), 1..=6)).prop_map(|(c, ts)| {
        let tasks = ts.into_iter().enumerate().map(|(i, (v, dm, dl, k))| Task::int(format!("t{i}"), v, dm, dl, k)).collect();
        Instance::new(c, tasks).unwrap()
    })
}

/// An instance together with the same tasks in a shuffled order.
fn instance_and_shuffle() -> impl Strategy<Value = (Instance, Instance)> {
    instance().prop_flat_map(|inst| {
        let c = inst.machines();
        (Just(inst.clone()), Just(inst.tasks().to_vec()).prop_shuffle().prop_map(move |ts| Instance::new(c, ts).unwrap()))
    })
}

proptest! {
    #[test]
    fn profile_ignores_task_order((inst, other) in instance_and_shuffle()) {
        let a = build_profile(inst.tasks()).unwrap();
        let b = build_profile(other.tasks()).unwrap();
        prop_assert_eq!(a.taus(), b.taus());
    }

    #[test]
    fn feasibility_ignores_task_order((inst, other) in instance_and_shuffle()) {
        let ok = ldf_schedule_all(&inst).unwrap().is_feasible();
        prop_assert_eq!(ok, ldf_schedule_all(&other).unwrap().is_feasible());
        if let LdfOutcome::Feasible(s) = ldf_schedule_all(&other).unwrap() {
            prop_assert!(s.matrix.check_complete(&other, &(0..other.len()).collect::<Vec<_>>()).is_empty());
        }
    }

    #[test]
    fn more_machines_never_hurt(inst in instance()) {
        let w: Vec<Workload> = inst.tasks().iter().map(Workload::from).collect();
        if is_feasible(&w, inst.machines()) {
            prop_assert!(is_feasible(&w, inst.machines() + 1));
        }
    }

    #[test]
    fn greedy_is_deterministic_and_sound(inst in instance()) {
        let a = greedy_rlm(&inst).unwrap();
        let b = greedy_rlm(&inst).unwrap();
        prop_assert_eq!(&a.matrix, &b.matrix);
        prop_assert_eq!(&a.accepted, &b.accepted);
        prop_assert!(a.matrix.check_complete(&inst, &a.accepted).is_empty());
        prop_assert_eq!(inst.value_of(&a.accepted), a.welfare);
    }

    #[test]
    fn instance_json_round_trips(inst in instance()) {
        prop_assert_eq!(parse_instance_str(&instance_to_json(&inst)).unwrap(), inst);
    }
}
