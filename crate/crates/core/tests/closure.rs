use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use adept_core::callgraph::{unresolved, RepairConfig};
use adept_core::llm::{Gateway, ScenarioBackend, ScenarioEntry};
use adept_core::program::{parse_source, render_source, GuestProfile, StructuredProgram};
use adept_core::prompts::{PromptLibrary, TemplateId};
use adept_core::{prune_unreachable, repair_loop, RepairStatus};
use serde::Deserialize;

#[derive(Deserialize)]
struct Case {
    name: String,
    entry: String,
    source: String,
    repairs: BTreeMap<String, Vec<String>>,
    calls: usize,
    keep: BTreeSet<String>,
}

fn corpus() -> Vec<Case> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/closure_corpus.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn backend(case: &Case) -> ScenarioBackend {
    let entries = case
        .repairs
        .iter()
        .map(|(name, answers)| ScenarioEntry {
            template: Some(TemplateId::II5DependencyRepair),
            contains: Some(format!("helper function {name}, ")),
            responses: answers.iter().map(|a| format!("```python\n{a}```\n")).collect(),
            cycle: false,
        })
        .collect();
    ScenarioBackend::new(entries)
}

fn names(p: &StructuredProgram) -> BTreeSet<String> {
    p.names().map(str::to_string).collect()
}

#[test]
fn corpus_closes_with_the_expected_calls_and_prunes_to_the_reachable_set() {
    let started = Instant::now();
    let profile = GuestProfile::default();
    let prompts = PromptLibrary::builtin();
    let cases = corpus();
    assert!(cases.len() >= 20);
    for case in &cases {
        let program = parse_source(&case.source, &profile, Some(&case.entry)).unwrap();
        assert!(!unresolved(&program, &profile).is_empty(), "{}: corpus programs start broken", case.name);
        let mut gw = Gateway::new(backend(case), 50);
        let out = repair_loop(program.clone(), &mut gw, 10, &profile, &prompts, "task", &RepairConfig::default()).unwrap();
        assert_eq!(out.status, RepairStatus::Closed, "{}", case.name);
        assert_eq!(out.calls_used, case.calls, "{}", case.name);
        assert_eq!(gw.ledger().used, case.calls, "{}", case.name);
        assert!(unresolved(&out.program, &profile).is_empty(), "{}", case.name);
        for f in program.functions() {
            assert_eq!(out.program.get(&f.name).unwrap().body, f.body, "{}: `{}` was overwritten", case.name, f.name);
        }

        let pruned = prune_unreachable(&out.program, &profile);
        assert_eq!(names(&pruned), case.keep, "{}", case.name);
        assert!(unresolved(&pruned, &profile).is_empty(), "{}", case.name);
        assert_eq!(prune_unreachable(&pruned, &profile), pruned, "{}", case.name);
        assert_eq!(pruned.entry(), case.entry);
    }
    assert!(started.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn repair_imports_reach_the_preface() {
    let profile = GuestProfile::default();
    let case = corpus().into_iter().find(|c| c.name == "repair_adds_import").unwrap();
    let program = parse_source(&case.source, &profile, Some(&case.entry)).unwrap();
    let mut gw = Gateway::new(backend(&case), 50);
    let out = repair_loop(program, &mut gw, 10, &profile, &PromptLibrary::builtin(), "task", &RepairConfig::default()).unwrap();
    assert!(render_source(&out.program).contains("import random"));
}

#[test]
fn corpus_stops_at_the_repair_budget() {
    let profile = GuestProfile::default();
    for case in corpus().iter().filter(|c| c.calls > 1) {
        let program = parse_source(&case.source, &profile, Some(&case.entry)).unwrap();
        let mut gw = Gateway::new(backend(case), 50);
        let budget = case.calls - 1;
        let out = repair_loop(program, &mut gw, budget, &profile, &PromptLibrary::builtin(), "task", &RepairConfig::default()).unwrap();
        assert_eq!(out.status, RepairStatus::IncompleteBudgetExhausted, "{}", case.name);
        assert_eq!(out.calls_used, budget, "{}", case.name);
    }
}
