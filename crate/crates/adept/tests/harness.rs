use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use adept::harness::{FitnessSet, Harness, HarnessConfig};
use adept::runner::{GuestRequest, GuestResponse, GuestRunner, GuestStatus, RunnerError, SubprocessRunner};
use adept_core::baselines::{baseline_guest_source, BaselineKind};
use adept_core::cop::{generate_instance, CopInstance, InstanceData, Problem, Tier};
use adept_core::scoring::{EvalError, Evaluator, InstanceStatus};
use adept_core::tree::Score;
use serde_json::json;

/// Answers every request from a closure and counts calls.
struct FakeRunner<F> {
    answer: F,
    calls: AtomicUsize,
    limits: Mutex<Vec<f64>>,
}

impl<F: Fn(&GuestRequest) -> Result<GuestResponse, RunnerError> + Sync> GuestRunner for FakeRunner<F> {
    fn execute(&self, request: &GuestRequest) -> Result<GuestResponse, RunnerError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.limits.lock().unwrap().push(request.time_limit_s);
        (self.answer)(request)
    }
}

fn fake<F: Fn(&GuestRequest) -> Result<GuestResponse, RunnerError> + Sync>(answer: F) -> FakeRunner<F> {
    FakeRunner { answer, calls: AtomicUsize::new(0), limits: Mutex::new(Vec::new()) }
}

fn ok(solution: serde_json::Value) -> Result<GuestResponse, RunnerError> {
    Ok(GuestResponse { status: GuestStatus::Ok, solution, stderr_tail: String::new(), wall_time_s: 0.01 })
}

fn mis_set() -> FitnessSet {
    FitnessSet::generate(Problem::Mis, 3, 120.0)
}

#[test]
fn fitness_set_shape() {
    let set = mis_set();
    assert_eq!(set.instances.len(), 16);
    for tier in Tier::FITNESS {
        assert_eq!(set.instances.iter().filter(|i| i.tier == tier).count(), 4);
    }
    assert_eq!(set.per_instance_limit_s(), 7.5);
    assert_eq!(set.smallest().unwrap().tier, Tier::Small);
}

#[test]
fn empty_answers_score_zero_and_aggregate_is_the_mean() {
    let mut h = Harness::new(fake(|_| ok(json!([]))), mis_set(), HarnessConfig::default());
    let r = h.evaluate("src", "solve_mis").unwrap();
    assert_eq!(r.aggregate, Score::Value(0.0));
    assert!(r.instances.iter().all(|i| i.status == InstanceStatus::Ok));
    assert!(h.runner().limits.lock().unwrap().iter().all(|l| *l == 7.5));
}

#[test]
fn one_bad_instance_fails_the_program() {
    let set = mis_set();
    let target = set.instances[5].seed;
    let runner = fake(move |req: &GuestRequest| {
        let inst: CopInstance = serde_json::from_value(req.instance.clone()).unwrap();
        if inst.seed != target {
            return ok(json!([]));
        }
        let InstanceData::Mis(m) = &inst.data else { unreachable!() };
        let (u, v) = m.edges[0];
        ok(json!([u, v]))
    });
    let mut h = Harness::new(runner, set, HarnessConfig::default());
    let r = h.evaluate("src", "solve_mis").unwrap();
    assert_eq!(r.aggregate, Score::Failed);
    assert_eq!(r.instances[5].status, InstanceStatus::Infeasible);
    assert_eq!(r.instances.iter().filter(|i| i.status == InstanceStatus::Ok).count(), 15);
}

#[test]
fn guest_reported_objectives_are_ignored() {
    // an "objective" field in the solution position is not a solution
    let mut h = Harness::new(fake(|_| ok(json!({"objective": 1e9}))), mis_set(), HarnessConfig::default());
    let r = h.evaluate("src", "solve_mis").unwrap();
    assert!(r.instances.iter().all(|i| i.status == InstanceStatus::MalformedOutput));
}

#[test]
fn cache_and_smoke_check() {
    let mut h = Harness::new(fake(|_| ok(json!([]))), mis_set(), HarnessConfig::default());
    assert!(h.smoke_check("a", "solve_mis").unwrap());
    assert_eq!(h.runner().calls.load(Ordering::SeqCst), 1);
    assert_eq!(h.runner().limits.lock().unwrap()[0], 2.0);
    h.evaluate("a", "solve_mis").unwrap();
    h.evaluate("a", "solve_mis").unwrap();
    assert_eq!(h.runner().calls.load(Ordering::SeqCst), 17);
    assert_eq!(h.evaluations, 1);
    h.evaluate("b", "solve_mis").unwrap();
    assert_eq!(h.evaluations, 2);

    let err = |_: &GuestRequest| Ok(GuestResponse { status: GuestStatus::Error, solution: json!(null), stderr_tail: "Traceback".into(), wall_time_s: 0.0 });
    let mut h = Harness::new(fake(err), mis_set(), HarnessConfig::default());
    assert!(!h.smoke_check("a", "solve_mis").unwrap());
    assert_eq!(h.runner().calls.load(Ordering::SeqCst), 1);
}

#[test]
fn lost_runner_is_an_infrastructure_error() {
    let runner = fake(|_| Err(RunnerError::Io(std::io::Error::other("gone"))));
    let mut h = Harness::new(runner, mis_set(), HarnessConfig::default());
    assert!(matches!(h.evaluate("a", "solve_mis"), Err(EvalError::RunnerUnavailable(_))));
    assert!(matches!(h.smoke_check("a", "solve_mis"), Err(EvalError::RunnerUnavailable(_))));
}

#[test]
fn exhausted_total_budget_marks_the_rest_timed_out() {
    let slow = |_: &GuestRequest| {
        std::thread::sleep(std::time::Duration::from_millis(150));
        ok(json!([]))
    };
    let set = FitnessSet { total_time_limit_s: 0.2, ..mis_set() };
    let cfg = HarnessConfig { workers: 1, ..HarnessConfig::default() };
    let mut h = Harness::new(fake(slow), set, cfg);
    let r = h.evaluate("a", "solve_mis").unwrap();
    assert_eq!(r.aggregate, Score::Failed);
    assert!(r.instances[0].status == InstanceStatus::Ok);
    assert!(r.instances[15].status == InstanceStatus::Timeout);
    assert!(h.runner().calls.load(Ordering::SeqCst) < 16);
}

#[test]
fn real_guests_end_to_end() {
    let runner = SubprocessRunner::from_env().unwrap();
    let inst = generate_instance(Problem::Mis, Tier::Small, 11);
    let set = FitnessSet { problem: Problem::Mis, instances: vec![inst], total_time_limit_s: 20.0 };
    let mut h = Harness::new(runner, set, HarnessConfig::default());
    let src = baseline_guest_source(Problem::Mis, BaselineKind::GreedyConstructive);
    assert!(h.smoke_check(&src, "solve_mis").unwrap());
    let r = h.evaluate(&src, "solve_mis").unwrap();
    let size = r.instances[0].objective.unwrap();
    assert_eq!(r.aggregate, Score::Value(size / 50.0));

    let looping = "def solve_mis(num_vertices, edges):\n    while True:\n        pass\n";
    let mut h = Harness::new(SubprocessRunner::from_env().unwrap(), h.fitness().clone(), HarnessConfig { smoke_limit_s: 0.3, ..HarnessConfig::default() });
    assert!(!h.smoke_check(looping, "solve_mis").unwrap());
}
