//! Call graphs over structured programs, unresolved-symbol detection, the
//! generator-driven repair loop and dead-code pruning.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::lexer::{self, Token};
use crate::llm::{Backend, Gateway, GenerateError, GenerationRequest};
use crate::program::{parse_fragment, GuestProfile, Role, StructuredProgram};
use crate::prompts::{extract_code, PromptContext, PromptLibrary, TemplateId};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CallGraph {
    pub vertices: BTreeSet<String>,
    pub edges: BTreeSet<(String, String)>,
    pub defined: BTreeSet<String>,
    /// Profile built-ins plus names bound at module level (imports,
    /// constants, classes).
    pub builtins: BTreeSet<String>,
    pub unresolved: BTreeSet<String>,
    /// Registry functions called from module-level code in the preface.
    pub preface_calls: BTreeSet<String>,
}

impl CallGraph {
    pub fn callees<'a>(&'a self, caller: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges
            .range((caller.to_string(), String::new())..)
            .take_while(move |(c, _)| c == caller)
            .map(|(_, g)| g.as_str())
    }

    pub fn callers_of<'a>(&'a self, callee: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges.iter().filter(move |(_, g)| g == callee).map(|(c, _)| c.as_str())
    }

    /// Registry functions reachable from `root`, `root` included.
    pub fn reachable_from(&self, root: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        if self.defined.contains(root) {
            seen.insert(root.to_string());
            queue.push_back(root.to_string());
        }
        while let Some(f) = queue.pop_front() {
            for g in self.callees(&f) {
                if self.defined.contains(g) && seen.insert(g.to_string()) {
                    queue.push_back(g.to_string());
                }
            }
        }
        seen
    }
}

/// One logical line of stripped code with the indentation of its first
/// physical line.
struct Logical {
    indent: usize,
    text: String,
}

fn logical_lines(text: &str) -> Vec<Logical> {
    let scan = lexer::scan(text);
    let mut out: Vec<Logical> = Vec::new();
    for (i, line) in scan.stripped.split('\n').enumerate() {
        let clean = scan.clean_start.get(i).copied().unwrap_or(true);
        match out.last_mut() {
            Some(last) if !clean => {
                last.text.push(' ');
                last.text.push_str(line);
            }
            _ => {
                if line.trim().is_empty() {
                    continue;
                }
                out.push(Logical { indent: lexer::indentation(line), text: line.to_string() });
            }
        }
    }
    out
}

/// Names bound by one logical line: assignment and for targets, `as` names,
/// imports, definitions and parameters.
fn bound_names(tokens: &[Token<'_>], profile: &GuestProfile, out: &mut BTreeSet<String>) {
    let def_kw = profile.definition_keyword();
    let ident = |k: usize| match tokens.get(k) {
        Some(Token::Ident(s)) => Some(*s),
        _ => None,
    };
    let punct = |k: usize| match tokens.get(k) {
        Some(Token::Punct(c)) => Some(*c),
        _ => None,
    };
    let is_kw = |s: &str| profile.keywords.contains(s);

    // import statements
    let import_at = match ident(0) {
        Some("import") => Some(0),
        Some("from") => (1..tokens.len()).find(|&k| ident(k) == Some("import")),
        _ => None,
    };
    if let Some(start) = import_at {
        // `import a.b as c, d` binds c and a, d; `from m import x as y` binds y
        let mut k = start + 1;
        while k < tokens.len() {
            if let Some(name) = ident(k) {
                if ident(k + 1) != Some("as") {
                    out.insert(name.to_string());
                }
                k += 1;
                while k < tokens.len() && punct(k) != Some(',') {
                    if ident(k) == Some("as") {
                        if let Some(a) = ident(k + 1) {
                            out.insert(a.to_string());
                        }
                    }
                    k += 1;
                }
            }
            k += 1;
        }
        return;
    }

    let mut depth: i32 = 0;
    let mut seg_start = 0;
    for k in 0..tokens.len() {
        match tokens[k] {
            Token::Punct('(' | '[' | '{') => depth += 1,
            Token::Punct(')' | ']' | '}') => depth -= 1,
            Token::Punct('=') if depth == 0 => {
                let next_eq = punct(k + 1) == Some('=');
                let prev = if k > 0 { punct(k - 1) } else { None };
                if prev == Some(':') {
                    // walrus
                    if let Some(n) = k.checked_sub(2).and_then(ident) {
                        out.insert(n.to_string());
                    }
                } else if !next_eq && !matches!(prev, Some('=' | '!' | '<' | '>')) {
                    let mut d = 0;
                    for j in seg_start..k {
                        match tokens[j] {
                            Token::Punct('(' | '[' | '{') => d += 1,
                            Token::Punct(')' | ']' | '}') => d -= 1,
                            Token::Ident(s) if d == 0 || matches!(punct(j.wrapping_sub(1)), Some('(' | ',')) => {
                                let after_dot = j > 0 && punct(j - 1) == Some('.');
                                let called = punct(j + 1) == Some('(');
                                if !after_dot && !called && !is_kw(s) {
                                    out.insert(s.to_string());
                                }
                            }
                            _ => {}
                        }
                    }
                    seg_start = k + 1;
                }
            }
            Token::Ident("for") => {
                let mut j = k + 1;
                while j < tokens.len() && ident(j) != Some("in") {
                    if let Some(s) = ident(j) {
                        if !is_kw(s) && !(j > 0 && punct(j - 1) == Some('.')) {
                            out.insert(s.to_string());
                        }
                    }
                    j += 1;
                }
            }
            Token::Ident("as") => {
                if let Some(s) = ident(k + 1) {
                    out.insert(s.to_string());
                }
            }
            Token::Ident(s) if s == def_kw || s == "class" => {
                if let Some(name) = ident(k + 1) {
                    out.insert(name.to_string());
                }
                if s == def_kw && punct(k + 2) == Some('(') {
                    // parameters: identifiers at depth 1 directly after `(`, `,` or `*`
                    let mut d = 0;
                    let mut j = k + 2;
                    while j < tokens.len() {
                        match tokens[j] {
                            Token::Punct('(' | '[' | '{') => d += 1,
                            Token::Punct(')' | ']' | '}') => {
                                d -= 1;
                                if d == 0 {
                                    break;
                                }
                            }
                            Token::Ident(p) if d == 1 && matches!(punct(j - 1), Some('(' | ',' | '*')) => {
                                out.insert(p.to_string());
                            }
                            _ => {}
                        }
                        j += 1;
                    }
                }
            }
            Token::Ident("lambda") => {
                let mut j = k + 1;
                while j < tokens.len() && punct(j) != Some(':') {
                    if let Some(p) = ident(j) {
                        if matches!(punct(j - 1), Some(',' | '*')) || j == k + 1 {
                            out.insert(p.to_string());
                        }
                    }
                    j += 1;
                }
            }
            _ => {}
        }
    }
}

/// Identifiers immediately followed by `(`, excluding attribute calls,
/// definition names and keywords.
fn called_names(tokens: &[Token<'_>], profile: &GuestProfile, out: &mut BTreeSet<String>) {
    let def_kw = profile.definition_keyword();
    for k in 0..tokens.len() {
        let Token::Ident(name) = tokens[k] else { continue };
        if tokens.get(k + 1) != Some(&Token::Punct('(')) {
            continue;
        }
        if profile.keywords.contains(name) {
            continue;
        }
        if k > 0 {
            match tokens[k - 1] {
                Token::Punct('.') => continue,
                Token::Ident(prev) if prev == def_kw || prev == "class" => continue,
                _ => {}
            }
        }
        out.insert(name.to_string());
    }
}

struct BodyInfo {
    calls: BTreeSet<String>,
    locals: BTreeSet<String>,
    module_level: BTreeSet<String>,
}

fn analyze_body(body: &str, profile: &GuestProfile) -> BodyInfo {
    let mut calls = BTreeSet::new();
    let mut locals = BTreeSet::new();
    let mut module_level = BTreeSet::new();
    let mut past_signature = false;
    for line in logical_lines(body) {
        let toks = lexer::tokens(&line.text);
        called_names(&toks, profile, &mut calls);
        let is_def_line = line.indent == 0 && line.text.starts_with(profile.function_definition_marker.as_str());
        if line.indent == 0 && past_signature && !is_def_line && !line.text.starts_with('@') {
            // top-level statement trailing this function
            bound_names(&toks, profile, &mut module_level);
        } else {
            bound_names(&toks, profile, &mut locals);
        }
        if is_def_line {
            past_signature = true;
        }
    }
    BodyInfo { calls, locals, module_level }
}

pub fn build_call_graph(program: &StructuredProgram, profile: &GuestProfile) -> CallGraph {
    let defined: BTreeSet<String> = program.names().map(str::to_string).collect();
    let mut builtins = profile.builtin_symbols.clone();

    let mut preface_calls = BTreeSet::new();
    for line in logical_lines(&program.preface) {
        let toks = lexer::tokens(&line.text);
        if line.indent == 0 {
            bound_names(&toks, profile, &mut builtins);
        }
        called_names(&toks, profile, &mut preface_calls);
    }
    let infos: Vec<(String, BodyInfo)> = program
        .functions()
        .iter()
        .map(|f| (f.name.clone(), analyze_body(&f.body, profile)))
        .collect();
    for (_, info) in &infos {
        builtins.extend(info.module_level.iter().cloned());
    }
    // a module-level binding never shadows a registry function
    for name in &defined {
        builtins.remove(name);
    }
    preface_calls.retain(|c| defined.contains(c));

    let mut vertices = defined.clone();
    let mut edges = BTreeSet::new();
    for (caller, info) in &infos {
        for callee in &info.calls {
            // parameters, nested definitions and assignments shadow everything
            if info.locals.contains(callee) {
                continue;
            }
            if builtins.contains(callee) {
                continue;
            }
            vertices.insert(callee.clone());
            edges.insert((caller.clone(), callee.clone()));
        }
    }
    let unresolved = edges
        .iter()
        .map(|(_, g)| g)
        .filter(|g| !defined.contains(*g) && !builtins.contains(*g))
        .cloned()
        .collect();
    CallGraph { vertices, edges, defined, builtins, unresolved, preface_calls }
}

pub fn unresolved(program: &StructuredProgram, profile: &GuestProfile) -> BTreeSet<String> {
    build_call_graph(program, profile).unresolved
}

/// Keeps exactly the functions reachable from the entry (and from
/// module-level code in the preface). The preface is untouched.
pub fn prune_unreachable(program: &StructuredProgram, profile: &GuestProfile) -> StructuredProgram {
    let graph = build_call_graph(program, profile);
    let mut keep = graph.reachable_from(program.entry());
    for root in &graph.preface_calls {
        keep.extend(graph.reachable_from(root));
    }
    let mut out = program.clone();
    out.retain_functions(|name| keep.contains(name));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RepairStatus {
    Closed,
    IncompleteBudgetExhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepairOutcome {
    pub program: StructuredProgram,
    pub status: RepairStatus,
    pub calls_used: usize,
    /// Names whose repair response could not be parsed.
    pub unparsable: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RepairConfig {
    /// Character limit of the call-site context handed to the template.
    pub context_limit: usize,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl Default for RepairConfig {
    fn default() -> Self {
        Self { context_limit: 6000, temperature: 0.2, max_tokens: 4096 }
    }
}

/// Entry body followed by every body that calls `missing`, cut at `limit`
/// characters.
pub fn call_site_context(program: &StructuredProgram, graph: &CallGraph, missing: &str, limit: usize) -> String {
    let entry = program.entry();
    let mut parts: Vec<&str> = alloc::vec![program.entry_function().body.as_str()];
    for caller in graph.callers_of(missing) {
        if caller != entry {
            if let Some(f) = program.get(caller) {
                parts.push(f.body.as_str());
            }
        }
    }
    let joined = parts.join("\n\n");
    match joined.char_indices().nth(limit) {
        Some((cut, _)) => joined[..cut].to_string(),
        None => joined,
    }
}

/// Asks the generator for missing definitions, one name per call in
/// lexicographic order, until the program is closed or `budget` calls have
/// been spent. Generated functions enter as Immutable and never overwrite
/// existing definitions.
pub fn repair_loop<B: Backend>(
    program: StructuredProgram,
    gateway: &mut Gateway<B>,
    budget: usize,
    profile: &GuestProfile,
    prompts: &PromptLibrary,
    task_description: &str,
    config: &RepairConfig,
) -> Result<RepairOutcome, GenerateError> {
    let mut program = program;
    let mut calls_used = 0;
    let mut unparsable = Vec::new();
    loop {
        let graph = build_call_graph(&program, profile);
        let Some(missing) = graph.unresolved.iter().next().cloned() else {
            return Ok(RepairOutcome { program, status: RepairStatus::Closed, calls_used, unparsable });
        };
        if calls_used >= budget || gateway.remaining() == 0 {
            return Ok(RepairOutcome {
                program,
                status: RepairStatus::IncompleteBudgetExhausted,
                calls_used,
                unparsable,
            });
        }
        let mut ctx = PromptContext::new();
        ctx.insert("task_description", task_description);
        ctx.insert("MAIN_FUNC_CODE", call_site_context(&program, &graph, &missing, config.context_limit));
        ctx.insert("missing_func_name", missing.clone());
        let prompt = prompts.render(TemplateId::II5DependencyRepair, &ctx).expect("repair template placeholders are supplied");
        let request = GenerationRequest {
            prompt,
            temperature: config.temperature,
            max_tokens: config.max_tokens,
            template: TemplateId::II5DependencyRepair,
        };
        let response = match gateway.generate(&request) {
            Ok(r) => r,
            Err(GenerateError::BudgetExhausted) => {
                return Ok(RepairOutcome {
                    program,
                    status: RepairStatus::IncompleteBudgetExhausted,
                    calls_used,
                    unparsable,
                })
            }
            Err(e) => return Err(e),
        };
        calls_used += 1;
        let fragment = extract_code(&response.text, profile).ok().and_then(|code| parse_fragment(&code, profile).ok());
        let Some(fragment) = fragment else {
            log::warn!("unparsable repair response for `{missing}`");
            unparsable.push(missing);
            continue;
        };
        if !fragment.functions.iter().any(|f| f.name == missing) {
            log::warn!("repair response does not define `{missing}`");
        }
        program.merge_imports(&fragment.preface, profile);
        for f in fragment.functions {
            program.insert_function(f, Role::Immutable);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::testing::ScriptedBackend;
    use crate::program::parse_source;
    use alloc::format;
    use alloc::vec;

    fn prog(src: &str) -> StructuredProgram {
        parse_source(src, &GuestProfile::default(), None).unwrap()
    }

    fn set(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn undefined_helper_is_unresolved() {
        let p = prog("def solve(n):\n    return helper(n)\n");
        assert_eq!(unresolved(&p, &GuestProfile::default()), set(&["helper"]));
        let p = prog("def solve(n):\n    return helper(n)\n\ndef helper(n):\n    return n\n");
        assert!(unresolved(&p, &GuestProfile::default()).is_empty());
    }

    #[test]
    fn builtins_are_resolved() {
        let p = prog("def solve(xs):\n    return len(xs) + max(xs)\n");
        assert!(unresolved(&p, &GuestProfile::default()).is_empty());
    }

    #[test]
    fn strings_comments_and_attributes_are_ignored() {
        let src = "import math\n\ndef solve(xs):\n    # call ghost(1)\n    s = 'phantom(2)'\n    \"\"\"\n    spectre(3)\n    \"\"\"\n    xs.sort(key=lambda v: -v)\n    return math.sqrt(len(xs))\n";
        let p = prog(src);
        assert!(unresolved(&p, &GuestProfile::default()).is_empty());
    }

    #[test]
    fn local_bindings_are_not_unresolved() {
        let src = "from functools import lru_cache as cache\nimport heapq, itertools\n\ndef solve(n, key):\n    def inner(v):\n        return v\n    pick = lambda v: v\n    for f, g in [(inner, pick)]:\n        f(g(1))\n    with open('x') as fh:\n        fh.read()\n    try:\n        pass\n    except ValueError as err:\n        err(1)\n    return inner(key(pick(n))) + heapq.heappop([]) + cache(n)\n";
        let p = prog(src);
        assert!(unresolved(&p, &GuestProfile::default()).is_empty(), "{:?}", unresolved(&p, &GuestProfile::default()));
    }

    #[test]
    fn module_level_classes_and_constants() {
        let src = "class Route:\n    pass\nLIMIT = int('3')\n\ndef solve():\n    return Route(LIMIT)\n";
        let p = prog(src);
        let g = build_call_graph(&p, &GuestProfile::default());
        assert!(g.unresolved.is_empty());
        assert!(g.builtins.contains("Route"));
    }

    #[test]
    fn edges_and_vertices() {
        let p = prog("def solve():\n    return a() + b()\n\ndef a():\n    return b()\n\ndef b():\n    return 0\n");
        let g = build_call_graph(&p, &GuestProfile::default());
        let e: Vec<(String, String)> = g.edges.iter().cloned().collect();
        assert_eq!(
            e,
            vec![
                ("a".into(), "b".into()),
                ("solve".into(), "a".into()),
                ("solve".into(), "b".into())
            ]
        );
        for (u, v) in &g.edges {
            assert!(g.vertices.contains(u) && g.vertices.contains(v));
        }
        assert_eq!(g.callees("solve").collect::<Vec<_>>(), vec!["a", "b"]);
    }

    #[test]
    fn pruning() {
        let p = prog("def solve():\n    return f()\n\ndef f():\n    return g()\n\ndef g():\n    return 1\n\ndef h():\n    return 2\n");
        let q = prune_unreachable(&p, &GuestProfile::default());
        assert_eq!(q.names().collect::<Vec<_>>(), vec!["solve", "f", "g"]);
        assert_eq!(prune_unreachable(&q, &GuestProfile::default()), q);

        let r = prog("def solve():\n    return a(3)\n\ndef a(n):\n    return b(n - 1) if n else 0\n\ndef b(n):\n    return a(n)\n");
        assert_eq!(prune_unreachable(&r, &GuestProfile::default()), r);
    }

    fn repair_response(name: &str, body: &str) -> String {
        format!("```python\ndef {name}(x):\n    {body}\n```")
    }

    fn run_repair(p: StructuredProgram, script: Vec<String>, budget: usize) -> (RepairOutcome, usize) {
        let mut gw = Gateway::new(ScriptedBackend::new(script), 100);
        let out = repair_loop(p, &mut gw, budget, &GuestProfile::default(), &PromptLibrary::builtin(), "task", &RepairConfig::default()).unwrap();
        (out, gw.ledger().used)
    }

    #[test]
    fn repair_single_step() {
        let p = prog("def solve(n):\n    return helper(n)\n");
        let (out, used) = run_repair(p, vec![repair_response("helper", "return x")], 10);
        assert_eq!(out.status, RepairStatus::Closed);
        assert_eq!(out.calls_used, 1);
        assert_eq!(used, 1);
        assert_eq!(out.program.get("helper").unwrap().role, Role::Immutable);
    }

    #[test]
    fn repair_noop_when_closed() {
        let p = prog("def solve(n):\n    return n\n");
        let (out, used) = run_repair(p.clone(), vec![], 10);
        assert_eq!(out.status, RepairStatus::Closed);
        assert_eq!(out.calls_used, 0);
        assert_eq!(used, 0);
        assert_eq!(out.program, p);
    }

    #[test]
    fn repair_budget_cutoff() {
        let p = prog("def solve(n):\n    return a(n) + b(n)\n");
        let (out, _) = run_repair(p, vec![repair_response("a", "return x")], 1);
        assert_eq!(out.status, RepairStatus::IncompleteBudgetExhausted);
        assert_eq!(unresolved(&out.program, &GuestProfile::default()), set(&["b"]));
    }

    #[test]
    fn repair_follows_new_dependencies_and_imports() {
        let p = prog("def solve(n):\n    return a(n)\n");
        let script = vec![
            "```python\nimport random\n\ndef a(x):\n    return z(x) + random.random()\n```".to_string(),
            repair_response("z", "return x"),
        ];
        let (out, _) = run_repair(p, script, 5);
        assert_eq!(out.status, RepairStatus::Closed);
        assert_eq!(out.calls_used, 2);
        assert!(out.program.preface.contains("import random"));
    }

    #[test]
    fn unparsable_repair_consumes_call() {
        let p = prog("def solve(n):\n    return a(n)\n");
        let script = vec!["I cannot do that.".to_string(), repair_response("a", "return x")];
        let (out, used) = run_repair(p, script, 5);
        assert_eq!(out.status, RepairStatus::Closed);
        assert_eq!(out.calls_used, 2);
        assert_eq!(used, 2);
        assert_eq!(out.unparsable, vec!["a".to_string()]);
    }

    #[test]
    fn repair_does_not_overwrite_existing() {
        let p = prog("def solve(n):\n    return a(n) + keep(n)\n\ndef keep(x):\n    return 7\n");
        let script = vec!["def a(x):\n    return 1\n\ndef keep(x):\n    return 0\n".to_string()];
        let (out, _) = run_repair(p, script, 5);
        assert!(out.program.get("keep").unwrap().body.contains("return 7"));
    }

    #[test]
    fn context_contains_entry_and_callers() {
        let p = prog("def solve():\n    return f()\n\ndef f():\n    return missing()\n\ndef other():\n    return 0\n");
        let g = build_call_graph(&p, &GuestProfile::default());
        let ctx = call_site_context(&p, &g, "missing", 10_000);
        assert!(ctx.contains("def solve") && ctx.contains("def f") && !ctx.contains("def other"));
        assert_eq!(call_site_context(&p, &g, "missing", 5).chars().count(), 5);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        prop_compose! {
            /// Random programs over names f0..f5: each function calls a random
            /// subset of names, some of which are left undefined.
            fn random_program()(
                defined in prop::collection::btree_set(0usize..6, 0..6),
                calls in prop::collection::vec(prop::collection::vec(0usize..8, 0..4), 7),
            ) -> StructuredProgram {
                let mut src = String::new();
                let mut emit = |name: &str, callees: &[usize]| {
                    src.push_str(&format!("def {name}(x):\n    y = 0\n"));
                    for c in callees {
                        src.push_str(&format!("    y += f{c}(x)\n"));
                    }
                    src.push_str("    return len([y])\n\n");
                };
                emit("solve", &calls[6]);
                for d in &defined {
                    emit(&format!("f{d}"), &calls[*d]);
                }
                parse_source(&src, &GuestProfile::default(), None).unwrap()
            }
        }

        proptest! {
            #[test]
            fn unresolved_matches_definition(p in random_program()) {
                let g = build_call_graph(&p, &GuestProfile::default());
                let expect: BTreeSet<String> = g.edges.iter().map(|(_, v)| v.clone())
                    .filter(|v| !g.defined.contains(v) && !g.builtins.contains(v)).collect();
                prop_assert_eq!(&g.unresolved, &expect);
                for (u, v) in &g.edges {
                    prop_assert!(g.vertices.contains(u) && g.vertices.contains(v));
                }
            }

            #[test]
            fn prune_is_idempotent_and_closed_under_reachability(p in random_program()) {
                let profile = GuestProfile::default();
                let q = prune_unreachable(&p, &profile);
                prop_assert_eq!(&prune_unreachable(&q, &profile), &q);
                prop_assert_eq!(&q.preface, &p.preface);
                let g = build_call_graph(&q, &profile);
                prop_assert_eq!(g.reachable_from(q.entry()), g.defined.clone());
                // no reachable function was dropped
                let before = build_call_graph(&p, &profile).reachable_from(p.entry());
                prop_assert_eq!(before, g.defined);
            }

            #[test]
            fn repair_terminates_within_budget(p in random_program(), budget in 0usize..6) {
                let names: Vec<String> = (0..8).map(|i| format!("f{i}")).collect();
                // the scripted generator defines each requested name with no calls
                let script = names.iter().map(|n| repair_response(n, "return x")).collect::<Vec<_>>();
                let mut gw = Gateway::new(ScriptedBackend::by_missing_name(script), 100);
                let before = unresolved(&p, &GuestProfile::default()).len();
                let out = repair_loop(p, &mut gw, budget, &GuestProfile::default(), &PromptLibrary::builtin(), "task", &RepairConfig::default()).unwrap();
                prop_assert!(out.calls_used <= budget);
                prop_assert_eq!(gw.ledger().used, out.calls_used);
                let after = unresolved(&out.program, &GuestProfile::default());
                prop_assert!(after.len() <= before);
                if out.status == RepairStatus::Closed {
                    prop_assert!(after.is_empty());
                    let reparsed = parse_source(&crate::program::render_source(&out.program), &GuestProfile::default(), None).unwrap();
                    prop_assert!(unresolved(&reparsed, &GuestProfile::default()).is_empty());
                } else {
                    prop_assert_eq!(out.calls_used, budget);
                }
            }
        }
    }
}
