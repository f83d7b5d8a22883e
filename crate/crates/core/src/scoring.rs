//! Scale-normalized scoring of candidate programs.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cop::wire::decode_solution;
use crate::cop::{objective, validate, CopInstance, Direction, Verdict};
use crate::tree::Score;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InstanceStatus {
    Ok,
    GuestError,
    Timeout,
    Infeasible,
    MalformedOutput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub status: InstanceStatus,
    pub objective: Option<f64>,
    pub score: Option<f64>,
    pub wall_time_s: f64,
    #[serde(default)]
    pub detail: String,
}

impl InstanceResult {
    pub fn failed(status: InstanceStatus, wall_time_s: f64, detail: impl Into<String>) -> Self {
        Self { status, objective: None, score: None, wall_time_s, detail: detail.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum AggregateMode {
    /// Any failed instance fails the program.
    #[default]
    Strict,
    /// Mean over successful instances minus `penalty` per failed one.
    Lenient { penalty: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub instances: Vec<InstanceResult>,
    pub aggregate: Score,
    pub wall_time_s: f64,
}

impl EvalResult {
    pub fn from_instances(instances: Vec<InstanceResult>, mode: AggregateMode) -> Self {
        let aggregate = aggregate(&instances, mode);
        let wall_time_s = instances.iter().map(|i| i.wall_time_s).sum();
        Self { instances, aggregate, wall_time_s }
    }

    pub fn failed(detail: &str) -> Self {
        Self::from_instances(alloc::vec![InstanceResult::failed(InstanceStatus::GuestError, 0.0, detail)], AggregateMode::Strict)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("runner unavailable: {0}")]
    RunnerUnavailable(String),
}

pub fn normalize_score(objective: f64, direction: Direction, sigma: usize) -> f64 {
    let s = objective / sigma.max(1) as f64;
    match direction {
        Direction::Maximize => s,
        Direction::Minimize => -s,
    }
}

pub fn aggregate(results: &[InstanceResult], mode: AggregateMode) -> Score {
    if results.is_empty() {
        return Score::Failed;
    }
    let ok: Vec<f64> = results.iter().filter(|r| r.status == InstanceStatus::Ok).filter_map(|r| r.score).collect();
    let failed = results.len() - ok.len();
    match mode {
        AggregateMode::Strict if failed > 0 => Score::Failed,
        _ if ok.is_empty() => Score::Failed,
        AggregateMode::Strict => Score::from_f64(ok.iter().sum::<f64>() / ok.len() as f64),
        AggregateMode::Lenient { penalty } => Score::from_f64(ok.iter().sum::<f64>() / ok.len() as f64 - penalty * failed as f64),
    }
}

/// Scores a solution returned by an untrusted guest: decode, re-validate,
/// recompute the objective and normalize.
pub fn score_solution(instance: &CopInstance, solution: &serde_json::Value, wall_time_s: f64) -> InstanceResult {
    let sol = match decode_solution(instance, solution) {
        Ok(s) => s,
        Err(e) => return InstanceResult::failed(InstanceStatus::MalformedOutput, wall_time_s, e.to_string()),
    };
    match validate(instance, &sol) {
        Ok(Verdict::Feasible) => {}
        Ok(Verdict::Infeasible { violation, detail }) => {
            return InstanceResult::failed(InstanceStatus::Infeasible, wall_time_s, alloc::format!("{violation:?}: {detail}"))
        }
        Err(e) => return InstanceResult::failed(InstanceStatus::MalformedOutput, wall_time_s, e.to_string()),
    }
    let value = objective(instance, &sol).expect("validated solutions have an objective");
    InstanceResult {
        status: InstanceStatus::Ok,
        objective: Some(value),
        score: Some(normalize_score(value, instance.problem().direction(), instance.sigma)),
        wall_time_s,
        detail: String::new(),
    }
}

/// Runs candidate programs. Implementations own the fitness set.
pub trait Evaluator {
    /// One short run on the smallest instance; `false` rejects the program
    /// without a full evaluation.
    fn smoke_check(&mut self, source: &str, entry: &str) -> Result<bool, EvalError>;

    fn evaluate(&mut self, source: &str, entry: &str) -> Result<EvalResult, EvalError>;
}

impl<E: Evaluator + ?Sized> Evaluator for alloc::boxed::Box<E> {
    fn smoke_check(&mut self, source: &str, entry: &str) -> Result<bool, EvalError> {
        (**self).smoke_check(source, entry)
    }
    fn evaluate(&mut self, source: &str, entry: &str) -> Result<EvalResult, EvalError> {
        (**self).evaluate(source, entry)
    }
}

/// Evaluator backed by a closure from source text to a result.
pub struct FnEvaluator<F>(pub F);

impl<F: FnMut(&str) -> EvalResult> Evaluator for FnEvaluator<F> {
    fn smoke_check(&mut self, source: &str, _entry: &str) -> Result<bool, EvalError> {
        Ok(!(self.0)(source).aggregate.is_failed())
    }

    fn evaluate(&mut self, source: &str, _entry: &str) -> Result<EvalResult, EvalError> {
        Ok((self.0)(source))
    }
}
