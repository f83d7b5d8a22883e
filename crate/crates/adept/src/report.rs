//! Run reports: the best program plus CSV tables for analysis.
//!
//! Everything except `summary.json`'s timestamp is a pure function of the
//! engine state.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use adept_core::cop::Problem;
use adept_core::engine::EngineState;
use adept_core::llm::Phase;
use adept_core::program::render_source;
use adept_core::tree::{NodeStatus, OperatorKind};
use serde::Serialize;
use thiserror::Error;

pub const BEST_PROGRAM: &str = "best_program.py";
pub const GENERATIONS: &str = "generations.csv";
pub const OPERATORS: &str = "operators.csv";
pub const ACCEPTANCE: &str = "acceptance.csv";
pub const BUDGET: &str = "budget.csv";
pub const NODES: &str = "nodes.csv";
pub const SUMMARY: &str = "summary.json";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no evaluated program to report")]
    EmptyTree,
    #[error("report io on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub generated_at_unix_s: u64,
    pub problem: Problem,
    pub best_id: usize,
    pub best_score: f64,
    pub nodes: usize,
    pub evaluated: usize,
    pub generations: usize,
    pub calls_used: usize,
    pub budget: usize,
}

fn table<I, R>(header: &[&str], rows: I) -> Vec<u8>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Contents of every report file, keyed by file name.
pub fn render(state: &EngineState, problem: Problem, timestamp: u64) -> Result<BTreeMap<&'static str, Vec<u8>>, ReportError> {
    let tree = &state.tree;
    let best = state.best.and_then(|id| tree.get(id)).filter(|n| n.is_evaluated()).ok_or(ReportError::EmptyTree)?;
    let mut files = BTreeMap::new();
    files.insert(BEST_PROGRAM, render_source(&best.program).into_bytes());

    files.insert(
        GENERATIONS,
        table(
            &["generation", "temperature", "best", "mean", "children", "evaluated", "calls_used"],
            state.generations.iter().map(|g| {
                let evaluated = g.children.iter().filter(|c| c.status == NodeStatus::Evaluated).count();
                [
                    g.generation.to_string(),
                    g.temperature.to_string(),
                    g.best.to_string(),
                    opt(g.mean),
                    g.children.len().to_string(),
                    evaluated.to_string(),
                    g.calls_used.to_string(),
                ]
            }),
        ),
    );

    let ops = [OperatorKind::ColdStart, OperatorKind::MicroTune, OperatorKind::MacroMutate, OperatorKind::Crossover];
    files.insert(
        OPERATORS,
        table(
            &["operator", "applied", "evaluated", "failed", "improved_on_parent", "success_rate", "calls"],
            ops.iter().map(|op| {
                let nodes: Vec<_> = tree.nodes().iter().filter(|n| n.operator() == *op).collect();
                let evaluated = nodes.iter().filter(|n| n.is_evaluated()).count();
                let improved = nodes
                    .iter()
                    .filter(|n| n.parent_id.and_then(|p| tree.get(p)).is_some_and(|p| n.is_evaluated() && n.score > p.score))
                    .count();
                let rate = if nodes.is_empty() { None } else { Some(evaluated as f64 / nodes.len() as f64) };
                [
                    op.code().to_string(),
                    nodes.len().to_string(),
                    evaluated.to_string(),
                    (nodes.len() - evaluated).to_string(),
                    improved.to_string(),
                    opt(rate),
                    nodes.iter().map(|n| n.calls_used).sum::<usize>().to_string(),
                ]
            }),
        ),
    );

    files.insert(
        ACCEPTANCE,
        table(
            &["generation", "temperature", "frontier", "accepted", "supplemented", "acceptance_rate"],
            state.selections.iter().map(|s| {
                let rate = if s.frontier.is_empty() { None } else { Some(s.accepted.len() as f64 / s.frontier.len() as f64) };
                [
                    s.generation.to_string(),
                    s.temperature.to_string(),
                    s.frontier.len().to_string(),
                    s.accepted.len().to_string(),
                    s.supplemented.len().to_string(),
                    opt(rate),
                ]
            }),
        ),
    );

    let ledger = &state.ledger;
    let mut budget: Vec<[String; 2]> = Phase::ALL.iter().map(|p| [p.name().to_string(), ledger.tally(*p).to_string()]).collect();
    budget.push(["total".into(), ledger.used.to_string()]);
    budget.push(["limit".into(), ledger.limit.to_string()]);
    files.insert(BUDGET, table(&["phase", "calls"], budget));

    files.insert(
        NODES,
        table(
            &["id", "parent", "partner", "operator", "generation", "depth", "status", "score", "calls_used", "thought"],
            tree.nodes().iter().map(|n| {
                let partner = n.history.last().and_then(|h| h.parents.get(1).copied());
                [
                    n.id.to_string(),
                    opt(n.parent_id),
                    opt(partner),
                    n.operator().code().to_string(),
                    n.generation.to_string(),
                    n.depth.to_string(),
                    format!("{:?}", n.status),
                    n.score.to_string(),
                    n.calls_used.to_string(),
                    n.thought.clone(),
                ]
            }),
        ),
    );

    let summary = Summary {
        generated_at_unix_s: timestamp,
        problem,
        best_id: best.id,
        best_score: best.score.value().expect("evaluated"),
        nodes: tree.len(),
        evaluated: tree.evaluated().count(),
        generations: state.generations.len(),
        calls_used: ledger.used,
        budget: ledger.limit,
    };
    let mut json = serde_json::to_vec_pretty(&summary).expect("summary serializes");
    json.push(b'\n');
    files.insert(SUMMARY, json);
    Ok(files)
}

/// Writes the report into `dir`. Nothing is written when there is no
/// evaluated program.
pub fn write_report(dir: &Path, state: &EngineState, problem: Problem) -> Result<Vec<PathBuf>, ReportError> {
    let now = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let files = render(state, problem, now)?;
    std::fs::create_dir_all(dir).map_err(|source| ReportError::Io { path: dir.to_path_buf(), source })?;
    let mut written = Vec::new();
    for (name, bytes) in files {
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(|source| ReportError::Io { path: path.clone(), source })?;
        written.push(path);
    }
    Ok(written)
}
