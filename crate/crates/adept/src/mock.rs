//! Built-in offline scenarios. Cold start answers with the constructive
//! baselines; variation prompts get small hand-written edits of their
//! priority rules, and macro edits rename a helper call so that dependency
//! repair has work to do.

use adept_core::baselines::{baseline_guest_source, seeded_guest_source, BaselineKind};
use adept_core::cop::Problem;
use adept_core::llm::{ScenarioBackend, ScenarioEntry};
use adept_core::program::{parse_source, GuestProfile, StructuredProgram};
use adept_core::prompts::TemplateId;

fn fenced(thought: &str, code: &str) -> String {
    let nl = if code.ends_with('\n') { "" } else { "\n" };
    format!("{{{{{thought}}}}}\n\n```python\n{code}{nl}```\n")
}

/// Alternative bodies for each problem's `evaluate_candidate`.
fn priority_variants(problem: Problem) -> Vec<(&'static str, String)> {
    let (sig, bodies): (&str, &[(&str, &str)]) = match problem {
        Problem::Mis => (
            "def evaluate_candidate(vertex, residual_degree):",
            &[
                ("Prefer low residual degree, breaking ties toward high indices.", "return -residual_degree + 1e-6 * vertex"),
                ("Prefer low residual degree, breaking ties toward low indices.", "return -residual_degree - 1e-6 * vertex"),
                ("Prefer high residual degree.", "return residual_degree"),
                ("Penalize degree quadratically.", "return -residual_degree * residual_degree"),
            ],
        ),
        Problem::Cvrp => (
            "def evaluate_candidate(current, customer, coordinates, load, demands, vehicle_capacity):",
            &[
                ("Nearest customer, favouring large demands.", "return -distance(coordinates[current], coordinates[customer]) + 0.5 * demands[customer]"),
                ("Demand per unit distance.", "return demands[customer] / (1.0 + distance(coordinates[current], coordinates[customer]))"),
                ("Nearest customer to the depot first.", "return -distance(coordinates[0], coordinates[customer])"),
            ],
        ),
        Problem::Cflp => (
            "def evaluate_candidate(facility, customer, demand, is_open, facility_capacities, assignment_costs, fixed_costs):",
            &[
                ("Assignment cost only.", "return -float(assignment_costs[facility][customer])"),
                (
                    "Assignment cost plus the full opening cost.",
                    "cost = float(assignment_costs[facility][customer])\n    if not is_open:\n        cost += fixed_costs[facility]\n    return -cost",
                ),
                (
                    "Assignment cost plus a doubled pro-rated opening cost.",
                    "cost = float(assignment_costs[facility][customer])\n    if not is_open:\n        cost += 2.0 * fixed_costs[facility] * demand / facility_capacities[facility]\n    return -cost",
                ),
            ],
        ),
        Problem::Fjsp => (
            "def evaluate_candidate(job, operation, machine, start, processing_time):",
            &[
                ("Earliest completion.", "return -(start + processing_time)"),
                ("Shortest processing time, then earliest start.", "return (-processing_time, -start)"),
                ("Earliest start, then lowest job index.", "return (-start, -job)"),
            ],
        ),
        Problem::Mrcpsp => (
            "def evaluate_candidate(activity, start, duration):",
            &[
                ("Earliest finish.", "return -(start + duration)"),
                ("Earliest start, longest duration first.", "return (-start, duration)"),
                ("Lowest activity index.", "return -activity"),
            ],
        ),
        Problem::Cevrptw => (
            "def evaluate_candidate(current, customer, detour, travel):",
            &[
                ("Smallest detour.", "return -detour"),
                ("Travel plus half the detour.", "return -(travel + 0.5 * detour)"),
                ("Highest customer index.", "return customer"),
            ],
        ),
    };
    bodies.iter().map(|(t, b)| (*t, format!("{sig}\n    {b}\n"))).collect()
}

const SELECT_LAST: &str = "def select_best(candidates):
    if not candidates:
        return None
    best = candidates[0]
    for cand in candidates[1:]:
        if cand[0] >= best[0]:
            best = cand
    return best[1]
";

const PRIORITY_OF: &str = "def priority_of(*args):
    return evaluate_candidate(*args)
";

const PICK_BEST: &str = "def pick_best(candidates):
    best = None
    for cand in candidates:
        if best is None or cand[0] >= best[0]:
            best = cand
    return None if best is None else best[1]
";

fn baseline(problem: Problem) -> StructuredProgram {
    let src = baseline_guest_source(problem, BaselineKind::GreedyConstructive);
    parse_source(&src, &GuestProfile::default(), Some(problem.entry_name())).expect("baselines parse")
}

fn entry_body(problem: Problem) -> String {
    baseline(problem).entry_function().body.clone()
}

fn helper(problem: Problem, name: &str) -> String {
    baseline(problem).get(name).map(|f| f.body.clone()).unwrap_or_default()
}

fn rule(template: TemplateId, contains: Option<&str>, responses: Vec<String>) -> ScenarioEntry {
    ScenarioEntry { template: Some(template), contains: contains.map(str::to_string), responses, cycle: true }
}

/// Default mock scenario for `problem`. Never runs out of responses.
pub fn default_scenario(problem: Problem) -> ScenarioBackend {
    let mut roots = vec![fenced(
        "Build the solution step by step, always taking the best-scoring feasible candidate.",
        &baseline_guest_source(problem, BaselineKind::GreedyConstructive),
    )];
    for s in 1..5 {
        roots.push(fenced(&format!("Build the solution step by step from random feasible candidates (stream {s})."), &seeded_guest_source(problem, s)));
    }
    let tunes: Vec<String> = priority_variants(problem).iter().map(|(t, c)| fenced(t, c)).collect();
    let entry = entry_body(problem);
    let macros = vec![
        fenced("Keep the construction loop as is.", &entry),
        fenced("Route priorities through a dedicated scoring hook.", &entry.replace("evaluate_candidate(", "priority_of(")),
        fenced("Break priority ties toward later candidates.", &entry.replace("select_best(", "pick_best(")),
    ];
    ScenarioBackend::new(vec![
        rule(TemplateId::I1Analysis, None, vec!["Construct solutions step by step; the priority rule decides quality.".into()]),
        rule(
            TemplateId::I2Strategy,
            None,
            vec![
                "{{Greedy construction by a scored priority rule.}}".into(),
                "{{Randomized construction over feasible candidates.}}".into(),
            ],
        ),
        rule(TemplateId::I3SeedImpl, None, roots),
        rule(TemplateId::II1MicroTune, Some("def evaluate_candidate("), tunes),
        rule(TemplateId::II1MicroTune, Some("def select_best("), vec![fenced("Ties go to the last candidate.", SELECT_LAST)]),
        // any other target: answer with something that does not define it
        rule(TemplateId::II1MicroTune, None, vec![fenced("No change.", PRIORITY_OF)]),
        rule(TemplateId::II2MacroMutate, None, macros.clone()),
        rule(TemplateId::II3Crossover, None, macros),
        rule(TemplateId::II4RoleAnalysis, None, vec![r#"[{"name": "evaluate_candidate"}, {"name": "select_best"}]"#.into()]),
        rule(TemplateId::II5DependencyRepair, Some("helper function priority_of"), vec![fenced("Delegate.", PRIORITY_OF)]),
        rule(TemplateId::II5DependencyRepair, Some("helper function pick_best"), vec![fenced("Last maximum.", PICK_BEST)]),
        rule(TemplateId::II5DependencyRepair, Some("helper function select_best"), vec![fenced("Last maximum.", SELECT_LAST)]),
        rule(TemplateId::II5DependencyRepair, Some("helper function evaluate_candidate"), vec![fenced("Baseline rule.", &helper(problem, "evaluate_candidate"))]),
        rule(TemplateId::II5DependencyRepair, None, vec!["I cannot help with that.".into()]),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use adept_core::callgraph::unresolved;
    use adept_core::program::parse_fragment;
    use adept_core::prompts::extract_code;

    #[test]
    fn variants_keep_the_signature() {
        let profile = GuestProfile::default();
        for p in Problem::ALL {
            let src = baseline_guest_source(p, BaselineKind::GreedyConstructive);
            let base = parse_source(&src, &profile, Some(p.entry_name())).unwrap();
            let want = base.get("evaluate_candidate").unwrap().normalized_signature();
            for (_, code) in priority_variants(p) {
                let f = parse_fragment(&code, &profile).unwrap();
                assert_eq!(f.functions[0].normalized_signature(), want, "{p}");
            }
            assert!(unresolved(&base, &profile).is_empty());
            let renamed = entry_body(p).replace("evaluate_candidate(", "priority_of(");
            assert!(extract_code(&fenced("t", &renamed), &profile).unwrap().contains("priority_of("), "{p}");
        }
    }
}
