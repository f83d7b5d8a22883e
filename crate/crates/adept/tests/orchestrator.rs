use std::collections::BTreeMap;

use adept::checkpoint::CheckpointError;
use adept::config::RunConfig;
use adept::mock::default_scenario;
use adept::orchestrator::{execute, RunError, RunOptions};
use adept::report::{self, ReportError};
use adept_core::cop::Problem;
use adept_core::llm::Phase;
use adept_core::scoring::{AggregateMode, EvalResult, FnEvaluator, InstanceResult, InstanceStatus};

/// Scores a program by its length, so different programs rank differently.
fn by_length() -> FnEvaluator<impl FnMut(&str) -> EvalResult> {
    FnEvaluator(|src: &str| {
        let v = (src.len() % 997) as f64 / 997.0;
        let inst = InstanceResult { status: InstanceStatus::Ok, objective: Some(v), score: Some(v), wall_time_s: 0.0, detail: String::new() };
        EvalResult::from_instances(vec![inst], AggregateMode::Strict)
    })
}

fn config(budget: usize) -> RunConfig {
    RunConfig { problem: Problem::Mis, budget, seed: 9, ..RunConfig::default() }
}

fn rows(files: &BTreeMap<&str, Vec<u8>>, name: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(files[name].as_slice()).records().map(Result::unwrap).collect()
}

#[test]
fn report_tables_match_the_state() {
    let cfg = config(80);
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions { out: Some(dir.path().join("out")), ..RunOptions::default() };
    let run = execute(&cfg, default_scenario(cfg.problem), by_length(), &opts).unwrap();
    let state = &run.state;
    assert!(state.finished);
    assert_eq!(run.report.len(), 7);

    let files = report::render(state, cfg.problem, 0).unwrap();
    assert_eq!(rows(&files, report::NODES).len(), state.tree.len());
    assert_eq!(rows(&files, report::GENERATIONS).len(), state.generations.len());
    assert_eq!(rows(&files, report::ACCEPTANCE).len(), state.selections.len());
    assert_eq!(rows(&files, report::OPERATORS).len(), 4);
    let budget = rows(&files, report::BUDGET);
    assert_eq!(budget.len(), Phase::ALL.len() + 2);
    let phase_sum: usize = budget[..Phase::ALL.len()].iter().map(|r| r[1].parse::<usize>().unwrap()).sum();
    assert_eq!(phase_sum, state.ledger.used);

    let best = state.tree.get(state.best.unwrap()).unwrap();
    let written = std::fs::read_to_string(dir.path().join("out").join(report::BEST_PROGRAM)).unwrap();
    assert_eq!(written.as_bytes(), files[report::BEST_PROGRAM].as_slice());
    assert!(written.contains(&format!("def {}(", cfg.problem.entry_name())));
    let summary: serde_json::Value = serde_json::from_slice(&files[report::SUMMARY]).unwrap();
    assert_eq!(summary["best_id"], best.id);
    assert_eq!(summary["calls_used"], state.ledger.used);
}

#[test]
fn all_failed_run_reports_an_empty_tree() {
    let failing = FnEvaluator(|_: &str| EvalResult::failed("no"));
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions { out: Some(dir.path().join("out")), ..RunOptions::default() };
    let err = execute(&config(20), default_scenario(Problem::Mis), failing, &opts).unwrap_err();
    assert!(matches!(err, RunError::Report(ReportError::EmptyTree)));
    assert_eq!(err.exit_code(), 1);
    assert!(!dir.path().join("out").join(report::SUMMARY).exists());
}

#[test]
fn resume_is_bit_identical() {
    let cfg = config(70);
    let full = execute(&cfg, default_scenario(cfg.problem), by_length(), &RunOptions::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("ck.json");
    for stop in [1, 3] {
        let first = RunOptions { checkpoint: Some(ck.clone()), stop_at_generation: Some(stop), ..RunOptions::default() };
        let partial = execute(&cfg, default_scenario(cfg.problem), by_length(), &first).unwrap();
        assert_eq!(partial.state.generation, stop);
        let second = RunOptions { resume: Some(ck.clone()), ..RunOptions::default() };
        let resumed = execute(&cfg, default_scenario(cfg.problem), by_length(), &second).unwrap();
        assert_eq!(resumed.state, full.state, "stop at {stop}");
        assert_eq!(report::render(&resumed.state, cfg.problem, 0).unwrap(), report::render(&full.state, cfg.problem, 0).unwrap());
    }
}

#[test]
fn resume_refuses_another_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("ck.json");
    let first = RunOptions { checkpoint: Some(ck.clone()), stop_at_generation: Some(1), ..RunOptions::default() };
    execute(&config(40), default_scenario(Problem::Mis), by_length(), &first).unwrap();
    let second = RunOptions { resume: Some(ck), ..RunOptions::default() };
    let err = execute(&config(41), default_scenario(Problem::Mis), by_length(), &second).unwrap_err();
    assert!(matches!(err, RunError::Checkpoint(CheckpointError::ConfigMismatch { .. })));
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn template_overrides_and_profile_files() {
    use adept_core::llm::{ScenarioBackend, ScenarioEntry};
    use adept_core::program::GuestProfile;
    use adept_core::prompts::TemplateId;

    let dir = tempfile::tempdir().unwrap();
    let templates = dir.path().join("templates");
    std::fs::create_dir(&templates).unwrap();
    std::fs::write(templates.join("I1_Analysis.txt"), "MARKER {{task_description}}").unwrap();
    let profile_path = dir.path().join("profile.toml");
    std::fs::write(&profile_path, toml::to_string(&GuestProfile::default()).unwrap().replace("import_line_markers", "import_line_marker")).unwrap();

    let cfg = RunConfig { templates: Some(templates.clone()), profile: Some(profile_path.clone()), ..config(30) };
    let (prompts, profile) = adept::orchestrator::language(&cfg).unwrap();
    assert!(prompts.text(TemplateId::I1Analysis).starts_with("MARKER"));
    assert_eq!(profile, GuestProfile::default());

    // the analysis prompt now only matches a rule keyed on the marker
    let mut scenario = default_scenario(Problem::Mis).entries().to_vec();
    scenario[0].contains = Some("MARKER".into());
    let run = execute(&cfg, ScenarioBackend::new(scenario.clone()), by_length(), &RunOptions::default()).unwrap();
    assert!(run.state.best.is_some());
    scenario[0] = ScenarioEntry { contains: Some("nothing like this".into()), ..scenario[0].clone() };
    assert!(execute(&cfg, ScenarioBackend::new(scenario), by_length(), &RunOptions::default()).is_err());

    // checkpoints remember the prompts they were written under
    let ck = dir.path().join("ck.json");
    let first = RunOptions { checkpoint: Some(ck.clone()), stop_at_generation: Some(1), ..RunOptions::default() };
    execute(&config(30), default_scenario(Problem::Mis), by_length(), &first).unwrap();
    let second = RunOptions { resume: Some(ck), ..RunOptions::default() };
    let err = execute(&cfg, default_scenario(Problem::Mis), by_length(), &second).unwrap_err();
    assert!(matches!(err, RunError::Checkpoint(CheckpointError::ConfigMismatch { .. })));

    std::fs::write(templates.join("Z9_Unknown.txt"), "x").unwrap();
    assert!(adept::orchestrator::language(&cfg).is_err());
    std::fs::write(&profile_path, "function_definition_marker = \"\"\n").unwrap();
    let cfg = RunConfig { templates: None, ..cfg };
    assert!(adept::orchestrator::language(&cfg).is_err());
}
