//! The search loop: cold start, then batched expansion until the generation
//! budget is spent.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::callgraph::{prune_unreachable, repair_loop, RepairStatus};
use crate::llm::{Backend, BudgetLedger, Gateway, GenerateError, GenerationRequest};
use crate::operators::{
    apply_operator, sample_crossover_partner, schedule_operator, update_weights, CandidateStatus, OperatorConfig,
    OperatorWeights, SchedulerConfig, Services,
};
use crate::program::{parse_source, render_source, GuestProfile, StructuredProgram};
use crate::prompts::{extract_code, extract_thought, history_summaries, PromptContext, PromptLibrary, TemplateId};
use crate::rng::{task_rng, Stream};
use crate::scoring::{EvalError, Evaluator};
use crate::selection::{select_parents, update_temperature, AnnealState, SelectionRecord};
use crate::tree::{NewNode, NodeId, NodeStatus, OperatorKind, ProgramNode, Score, SearchTree};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Roots created at cold start and parents selected per generation.
    pub k: usize,
    pub budget: usize,
    pub t0: f64,
    pub alpha: f64,
    pub delta_t: f64,
    pub n_stall: u32,
    pub scheduler: SchedulerConfig,
    pub operators: OperatorConfig,
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            k: 5,
            budget: 500,
            t0: 1.0,
            alpha: 0.95,
            delta_t: 0.2,
            n_stall: 3,
            scheduler: SchedulerConfig::default(),
            operators: OperatorConfig::default(),
            seed: 0,
        }
    }
}

/// What the engine needs to know about the task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub task_description: String,
    pub function_template: String,
    pub entry: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChildRecord {
    pub id: NodeId,
    pub parents: Vec<NodeId>,
    pub operator: OperatorKind,
    pub score: Score,
    pub status: NodeStatus,
    pub calls_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub temperature: f64,
    pub best: Score,
    /// Mean over the generation's evaluated children.
    pub mean: Option<f64>,
    pub calls_used: usize,
    pub children: Vec<ChildRecord>,
}

/// Everything needed to resume a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineState {
    pub tree: SearchTree,
    pub anneal: AnnealState,
    pub ledger: BudgetLedger,
    /// Next generation to run; cold start is generation 0.
    pub generation: usize,
    pub best: Option<NodeId>,
    pub generations: Vec<GenerationRecord>,
    pub selections: Vec<SelectionRecord>,
    pub backend_state: serde_json::Value,
    pub finished: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("tree: {0}")]
    Tree(String),
}

pub struct Engine<B, E> {
    config: EngineConfig,
    task: TaskSpec,
    prompts: PromptLibrary,
    profile: GuestProfile,
    gateway: Gateway<B>,
    evaluator: E,
    state: EngineState,
}

impl<B: Backend, E: Evaluator> Engine<B, E> {
    pub fn new(config: EngineConfig, task: TaskSpec, prompts: PromptLibrary, profile: GuestProfile, backend: B, evaluator: E) -> Self {
        let ledger = BudgetLedger::new(config.budget);
        let anneal = AnnealState::new(config.t0, config.alpha, config.delta_t, config.n_stall);
        let state = EngineState {
            tree: SearchTree::new(),
            anneal,
            ledger: ledger.clone(),
            generation: 0,
            best: None,
            generations: Vec::new(),
            selections: Vec::new(),
            backend_state: serde_json::Value::Null,
            finished: false,
        };
        Self { config, task, prompts, profile, gateway: Gateway::with_ledger(backend, ledger), evaluator, state }
    }

    /// Continues from a checkpointed state.
    pub fn resume(
        config: EngineConfig,
        task: TaskSpec,
        prompts: PromptLibrary,
        profile: GuestProfile,
        mut backend: B,
        evaluator: E,
        state: EngineState,
    ) -> Result<Self, EngineError> {
        backend.import_state(&state.backend_state)?;
        let gateway = Gateway::with_ledger(backend, state.ledger.clone());
        Ok(Self { config, task, prompts, profile, gateway, evaluator, state })
    }

    pub fn state(&self) -> &EngineState {
        &self.state
    }

    /// State with the ledger and backend cursors brought up to date.
    pub fn snapshot(&self) -> EngineState {
        let mut s = self.state.clone();
        s.ledger = self.gateway.ledger().clone();
        s.backend_state = self.gateway.backend().export_state();
        s
    }

    pub fn ledger(&self) -> &BudgetLedger {
        self.gateway.ledger()
    }

    pub fn tree(&self) -> &SearchTree {
        &self.state.tree
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn best(&self) -> Option<&ProgramNode> {
        self.state.best.and_then(|id| self.state.tree.get(id))
    }

    pub fn is_finished(&self) -> bool {
        self.state.finished
    }

    pub fn into_parts(self) -> (EngineState, B, E) {
        let state = self.snapshot();
        let (backend, _) = self.gateway.into_parts();
        (state, backend, self.evaluator)
    }

    fn services(&mut self) -> Services<'_, B> {
        Services {
            gateway: &mut self.gateway,
            prompts: &self.prompts,
            profile: &self.profile,
            task_description: &self.task.task_description,
            config: &self.config.operators,
        }
    }

    /// Runs until the budget is spent.
    pub fn run(&mut self) -> Result<(), EngineError> {
        while self.step()? {}
        Ok(())
    }

    /// Runs one generation (the cold start counts as generation 0).
    /// Returns whether more generations can follow.
    pub fn step(&mut self) -> Result<bool, EngineError> {
        if self.state.finished {
            return Ok(false);
        }
        let more = if self.state.generation == 0 { self.cold_start()? } else { self.expand()? };
        self.state.generation += 1;
        self.state.ledger = self.gateway.ledger().clone();
        self.state.backend_state = self.gateway.backend().export_state();
        if !more || self.gateway.remaining() == 0 {
            self.state.finished = true;
        }
        Ok(!self.state.finished)
    }

    fn request(&self, template: TemplateId, prompt: String) -> GenerationRequest {
        GenerationRequest {
            prompt,
            temperature: self.config.operators.variation_temperature,
            max_tokens: self.config.operators.max_tokens,
            template,
        }
    }

    /// One generation call; `None` once the budget is gone. Provider
    /// failures yield an empty text so the pipeline keeps its shape.
    fn call(&mut self, template: TemplateId, ctx: &PromptContext) -> Result<Option<String>, EngineError> {
        let prompt = self.prompts.render(template, ctx).map_err(|e| GenerateError::Transport(e.to_string()))?;
        let request = self.request(template, prompt);
        match self.gateway.generate(&request) {
            Ok(r) => Ok(Some(r.text)),
            Err(GenerateError::BudgetExhausted) => Ok(None),
            Err(e @ GenerateError::Provider { .. }) => {
                log::warn!("{}: {e}", template.tag());
                Ok(Some(String::new()))
            }
            Err(e) => Err(e.into()),
        }
    }

    /// Analysis, then K strategies each aware of the earlier ones, then K
    /// implementations. Every implementation that parses becomes a root.
    /// K shrinks when the budget cannot cover `2K + 1` calls.
    fn cold_start(&mut self) -> Result<bool, EngineError> {
        let k = self.config.k.min(self.gateway.remaining().saturating_sub(1) / 2);
        let ctx = PromptContext::new().with("task_description", self.task.task_description.clone());
        let Some(analysis) = self.call(TemplateId::I1Analysis, &ctx)? else { return Ok(false) };

        let mut strategies: Vec<String> = Vec::new();
        let mut summaries: Vec<String> = Vec::new();
        for _ in 0..k {
            let ctx = PromptContext::new()
                .with("ANALYSIS_RESULT", analysis.clone())
                .with("HISTORY_SUMMARIES", history_summaries(&summaries));
            let Some(text) = self.call(TemplateId::I2Strategy, &ctx)? else { break };
            let summary = extract_thought(&text);
            summaries.push(if summary.is_empty() { text.trim().to_string() } else { summary });
            strategies.push(text);
        }

        let mut children = Vec::new();
        for (i, plan) in strategies.iter().enumerate() {
            let ctx = PromptContext::new()
                .with("task_description", self.task.task_description.clone())
                .with("FUNCTION_TEMPLATE", self.task.function_template.clone())
                .with("STRATEGY_PLAN", plan.clone());
            let Some(text) = self.call(TemplateId::I3SeedImpl, &ctx)? else { break };
            let mut calls = 1;
            let thought = {
                let t = extract_thought(&text);
                if t.is_empty() {
                    summaries[i].clone()
                } else {
                    t
                }
            };
            let parsed = extract_code(&text, &self.profile)
                .map_err(|e| e.to_string())
                .and_then(|code| parse_source(&code, &self.profile, Some(&self.task.entry)).map_err(|e| e.to_string()));
            let program = match parsed {
                Ok(p) => p,
                Err(e) => {
                    log::warn!("seed implementation {i} unusable: {e}");
                    continue;
                }
            };
            let budget = self.gateway.remaining();
            let out = {
                let svc = self.services();
                repair_loop(program, svc.gateway, budget, svc.profile, svc.prompts, svc.task_description, &svc.config.repair)?
            };
            calls += out.calls_used;
            let program = prune_unreachable(&out.program, &self.profile);
            let (score, status) = match out.status {
                RepairStatus::Closed => self.score(&program)?,
                RepairStatus::IncompleteBudgetExhausted => (Score::Failed, NodeStatus::Incomplete),
            };
            let id = self
                .state
                .tree
                .insert(NewNode {
                    parent_id: None,
                    program,
                    score,
                    thought,
                    operator: OperatorKind::ColdStart,
                    parents: Vec::new(),
                    weights: OperatorWeights::default(),
                    generation: 0,
                    status,
                    calls_used: calls,
                })
                .map_err(|e| EngineError::Tree(e.to_string()))?;
            self.note_best(id);
            children.push(self.child_record(id));
        }
        self.state.tree.commit_batch();
        self.record_generation(0, children);
        Ok(self.state.tree.evaluated().next().is_some())
    }

    /// Smoke check, then full evaluation.
    fn score(&mut self, program: &StructuredProgram) -> Result<(Score, NodeStatus), EngineError> {
        let source = render_source(program);
        if !self.evaluator.smoke_check(&source, program.entry())? {
            return Ok((Score::Failed, NodeStatus::Failed));
        }
        let result = self.evaluator.evaluate(&source, program.entry())?;
        Ok(match result.aggregate {
            Score::Value(v) => (Score::Value(v), NodeStatus::Evaluated),
            Score::Failed => (Score::Failed, NodeStatus::Failed),
        })
    }

    /// Updates the best node; returns whether the score strictly improved.
    fn note_best(&mut self, id: NodeId) -> bool {
        let tree = &self.state.tree;
        let node = tree.get(id).expect("inserted");
        if !node.is_evaluated() {
            return false;
        }
        let better = match self.state.best.and_then(|b| tree.get(b)) {
            None => true,
            Some(b) => node.score > b.score,
        };
        if better {
            self.state.best = Some(id);
        }
        better
    }

    fn child_record(&self, id: NodeId) -> ChildRecord {
        let n = self.state.tree.get(id).expect("inserted");
        ChildRecord {
            id,
            parents: n.history.last().map(|h| h.parents.clone()).unwrap_or_default(),
            operator: n.operator(),
            score: n.score,
            status: n.status,
            calls_used: n.calls_used,
        }
    }

    fn record_generation(&mut self, generation: usize, children: Vec<ChildRecord>) {
        let scores: Vec<f64> = children.iter().filter(|c| c.status == NodeStatus::Evaluated).filter_map(|c| c.score.value()).collect();
        let mean = if scores.is_empty() { None } else { Some(scores.iter().sum::<f64>() / scores.len() as f64) };
        let best = self.best().map(|n| n.score).unwrap_or(Score::Failed);
        self.state.generations.push(GenerationRecord {
            generation,
            temperature: self.state.anneal.temperature,
            best,
            mean,
            calls_used: self.gateway.ledger().used,
            children,
        });
    }

    fn expand(&mut self) -> Result<bool, EngineError> {
        let g = self.state.generation;
        let seed = self.config.seed;
        let mut sel_rng = task_rng(seed, g as u64, 0, Stream::Selection);
        let selection = select_parents(&self.state.tree, &self.state.anneal, self.config.k, g, &mut sel_rng);
        let parents = selection.parents();
        debug_assert!(parents.iter().all(|p| self.state.tree.get(*p).is_some_and(|n| n.is_evaluated())));
        self.state.selections.push(selection);
        if parents.is_empty() {
            log::warn!("generation {g}: no evaluated node to expand");
            return Ok(false);
        }
        let used_before = self.gateway.ledger().used;
        let mut children = Vec::new();
        for (slot, pid) in parents.into_iter().enumerate() {
            if self.gateway.remaining() == 0 {
                break;
            }
            let slot = slot as u64;
            let parent = self.state.tree.get(pid).expect("selected").clone();
            let parent_score = parent.score.value().expect("selected parents are evaluated");
            let mut op_rng = task_rng(seed, g as u64, slot, Stream::Operator);
            let cross_draw: f64 = op_rng.random();
            let sched_draw: f64 = op_rng.random();
            let mut kind = schedule_operator(&parent.weights, self.state.anneal.temperature, sched_draw);
            let mut partner = None;
            if self.state.tree.evaluated().nth(1).is_some() && cross_draw < self.config.scheduler.p_cross {
                let mut c_rng = task_rng(seed, g as u64, slot, Stream::Crossover);
                match sample_crossover_partner(&self.state.tree, pid, &mut c_rng) {
                    Ok(b) => {
                        kind = OperatorKind::Crossover;
                        partner = Some(self.state.tree.get(b).expect("sampled").clone());
                    }
                    Err(e) => log::info!("no crossover partner for {pid}: {e}"),
                }
            }
            let mut t_rng = task_rng(seed, g as u64, slot, Stream::Target);
            let candidate = {
                let mut svc = self.services();
                apply_operator(kind, &parent, partner.as_ref(), &mut svc, &mut t_rng)?
            };
            let Some(candidate) = candidate else { break };
            let (score, status) = match &candidate.status {
                CandidateStatus::Ready => self.score(&candidate.program)?,
                CandidateStatus::Rejected(reason) => {
                    log::info!("{} candidate from {pid} rejected: {reason}", candidate.operator.code());
                    (Score::Failed, NodeStatus::Failed)
                }
                CandidateStatus::Incomplete => (Score::Failed, NodeStatus::Incomplete),
            };
            let op = candidate.operator;
            let weights = if op == OperatorKind::Crossover {
                parent.weights
            } else {
                let w = update_weights(&parent.weights, op, score, parent_score, &self.config.scheduler);
                self.state.tree.get_mut(pid).expect("selected").weights = w;
                w
            };
            let mut parents = vec![pid];
            if let (OperatorKind::Crossover, Some(b)) = (op, &partner) {
                parents.push(b.id);
            }
            let id = self
                .state
                .tree
                .insert(NewNode {
                    parent_id: Some(pid),
                    program: candidate.program,
                    score,
                    thought: candidate.thought,
                    operator: op,
                    parents,
                    weights,
                    generation: g,
                    status,
                    calls_used: candidate.calls_used,
                })
                .map_err(|e| EngineError::Tree(e.to_string()))?;
            let improved = self.note_best(id);
            self.state.anneal = update_temperature(&self.state.anneal, improved);
            children.push(self.child_record(id));
        }
        self.state.tree.commit_batch();
        let progressed = self.gateway.ledger().used > used_before;
        self.record_generation(g, children);
        Ok(progressed)
    }
}
