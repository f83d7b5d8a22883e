//! Variation operators and their adaptive scheduling.
//!
//! `m1` rewrites one mutable strategy function in place, `m2` rewrites the
//! entry function, `e1` writes a new entry from two parents. Every candidate
//! then goes through dependency repair and pruning.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::callgraph::{prune_unreachable, repair_loop, RepairConfig, RepairStatus};
use crate::llm::{Backend, Gateway, GenerateError, GenerationRequest};
use crate::program::{apply_role_partition, parse_fragment, Fragment, FunctionEntry, GuestProfile, Role, StructuredProgram};
use crate::prompts::{extract_code, extract_thought, parse_role_list, PromptContext, PromptLibrary, TemplateId};
use crate::selection::weighted_index;
use crate::tree::{NodeId, OperatorKind, ProgramNode, Score, SearchTree};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OperatorWeights {
    pub w_m1: f64,
    pub w_m2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SchedulerConfig {
    pub lambda: f64,
    pub p_cross: f64,
    pub r_max: f64,
    pub epsilon_denom: f64,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        Self { lambda: 0.8, p_cross: 0.2, r_max: 1.0, epsilon_denom: 1e-9 }
    }
}

/// Probability of choosing `m1` under the softmax with temperature `tau`.
pub fn p_micro(weights: &OperatorWeights, tau: f64) -> f64 {
    let a = weights.w_m1 / tau;
    let b = weights.w_m2 / tau;
    let m = a.max(b);
    let ea = libm::exp(a - m);
    let eb = libm::exp(b - m);
    ea / (ea + eb)
}

/// Picks `m1` iff `u < P(m1)`.
pub fn schedule_operator(weights: &OperatorWeights, tau: f64, u: f64) -> OperatorKind {
    if u < p_micro(weights, tau) {
        OperatorKind::MicroTune
    } else {
        OperatorKind::MacroMutate
    }
}

/// Clamped, guarded relative change of a child over its parent.
pub fn normalized_change(s_child: Score, s_parent: f64, config: &SchedulerConfig) -> f64 {
    match s_child {
        Score::Failed => -config.r_max,
        Score::Value(c) => {
            let denom = libm::fabs(s_parent).max(config.epsilon_denom);
            ((c - s_parent) / denom).clamp(-config.r_max, config.r_max)
        }
    }
}

/// Rewards or penalises the weight of the operator that produced a child.
/// Crossover outcomes leave the weights untouched.
pub fn update_weights(weights: &OperatorWeights, op: OperatorKind, s_child: Score, s_parent: f64, config: &SchedulerConfig) -> OperatorWeights {
    let r = normalized_change(s_child, s_parent, config);
    let delta = if r >= 0.0 { r } else { -config.lambda * libm::fabs(r) };
    let mut out = *weights;
    match op {
        OperatorKind::MicroTune => out.w_m1 += delta,
        OperatorKind::MacroMutate => out.w_m2 += delta,
        OperatorKind::Crossover | OperatorKind::ColdStart => {}
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OperatorError {
    #[error("no other evaluated node to cross with")]
    NoPartner,
    #[error("node {0} is not an evaluated node")]
    NotEvaluated(NodeId),
}

/// Unnormalised partner weights of every evaluated candidate other than
/// `primary`, and whether the uniform fallback applies.
pub fn crossover_weights(tree: &SearchTree, primary: NodeId) -> Result<(Vec<(NodeId, f64)>, bool), OperatorError> {
    let a = tree.get(primary).ok_or(OperatorError::NotEvaluated(primary))?;
    let s_a = a.score.value().ok_or(OperatorError::NotEvaluated(primary))?;
    let stats = tree.stats();
    let (s_max, s_min) = (stats.s_max.unwrap_or(s_a), stats.s_min.unwrap_or(s_a));
    let d_max = stats.d_max as f64;
    let mut out = Vec::new();
    for b in tree.evaluated() {
        if b.id == primary {
            continue;
        }
        let s_b = b.score.value().expect("evaluated");
        let s_m = s_a.max(s_b);
        let perf = if s_max > s_min { (s_m - s_min) / (s_max - s_min) } else { 1.0 };
        let lca = tree.lca_depth(primary, b.id).expect("both exist") as f64;
        let div = if d_max > 0.0 { (1.0 - lca / d_max).min(1.0) } else { 1.0 };
        out.push((b.id, perf * div));
    }
    if out.is_empty() {
        return Err(OperatorError::NoPartner);
    }
    let degenerate = s_max <= s_min || d_max == 0.0 || out.iter().all(|(_, w)| *w <= 0.0);
    Ok((out, degenerate))
}

pub fn sample_crossover_partner<R: Rng + ?Sized>(tree: &SearchTree, primary: NodeId, rng: &mut R) -> Result<NodeId, OperatorError> {
    let (cands, uniform) = crossover_weights(tree, primary)?;
    let weights: Vec<f64> = if uniform { alloc::vec![1.0; cands.len()] } else { cands.iter().map(|(_, w)| *w).collect() };
    let i = weighted_index(&weights, rng).unwrap_or(0);
    Ok(cands[i].0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OperatorConfig {
    /// Decoding temperature for variation and cold-start prompts.
    pub variation_temperature: f64,
    /// Decoding temperature for role analysis and repair.
    pub analysis_temperature: f64,
    pub max_tokens: u32,
    /// Extra generation attempts when a response holds no usable code.
    pub max_parse_retries: u32,
    pub repair: RepairConfig,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        Self {
            variation_temperature: 0.8,
            analysis_temperature: 0.2,
            max_tokens: 4096,
            max_parse_retries: 1,
            repair: RepairConfig::default(),
        }
    }
}

/// Shared handles an operator needs.
pub struct Services<'a, B> {
    pub gateway: &'a mut Gateway<B>,
    pub prompts: &'a PromptLibrary,
    pub profile: &'a GuestProfile,
    pub task_description: &'a str,
    pub config: &'a OperatorConfig,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CandidateStatus {
    Ready,
    Rejected(String),
    Incomplete,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub operator: OperatorKind,
    pub program: StructuredProgram,
    pub thought: String,
    pub calls_used: usize,
    pub status: CandidateStatus,
}

enum Generated {
    Code(Fragment, String),
    Unusable(String),
    OutOfBudget,
}

/// Generates and parses, retrying unusable responses while budget remains.
fn generate_fragment<B: Backend>(
    svc: &mut Services<'_, B>,
    template: TemplateId,
    ctx: &PromptContext,
    calls: &mut usize,
) -> Result<Generated, GenerateError> {
    let prompt = svc.prompts.render(template, ctx).map_err(|e| GenerateError::Transport(e.to_string()))?;
    let request = GenerationRequest {
        prompt,
        temperature: svc.config.variation_temperature,
        max_tokens: svc.config.max_tokens,
        template,
    };
    let mut last = String::from("no attempt");
    for _ in 0..=svc.config.max_parse_retries {
        let response = match svc.gateway.generate(&request) {
            Ok(r) => r,
            Err(GenerateError::BudgetExhausted) => {
                return Ok(if *calls == 0 { Generated::OutOfBudget } else { Generated::Unusable(last) })
            }
            Err(e @ GenerateError::Provider { .. }) => {
                *calls += 1;
                last = e.to_string();
                continue;
            }
            Err(e) => return Err(e),
        };
        *calls += 1;
        match extract_code(&response.text, svc.profile).map_err(|e| e.to_string()).and_then(|code| parse_fragment(&code, svc.profile).map_err(|e| e.to_string())) {
            Ok(f) => return Ok(Generated::Code(f, response.text)),
            Err(e) => {
                log::warn!("unusable {} response: {e}", template.tag());
                last = e;
            }
        }
    }
    Ok(Generated::Unusable(last))
}

fn rejected(operator: OperatorKind, program: &StructuredProgram, thought: &str, calls: usize, reason: String) -> Candidate {
    Candidate { operator, program: program.clone(), thought: thought.to_string(), calls_used: calls, status: CandidateStatus::Rejected(reason) }
}

/// The function of a response that becomes the new entry.
fn pick_entry(fragment: &Fragment, current_entry: &str, profile: &GuestProfile) -> Option<FunctionEntry> {
    fragment
        .functions
        .iter()
        .find(|f| f.name == current_entry)
        .or_else(|| fragment.functions.iter().find(|f| f.name.starts_with(profile.entry_prefix.as_str())))
        .or_else(|| fragment.functions.first())
        .cloned()
}

/// Re-partitions roles with one role-analysis call. Without budget the
/// roles stay as they are; an unusable answer makes every non-entry
/// function Mutable.
fn role_analysis<B: Backend>(svc: &mut Services<'_, B>, program: StructuredProgram, calls: &mut usize) -> Result<StructuredProgram, GenerateError> {
    if svc.gateway.remaining() == 0 {
        return Ok(program);
    }
    let ctx = PromptContext::new()
        .with("task_description", svc.task_description)
        .with("code_structure", program.structure_summary());
    let prompt = svc.prompts.render(TemplateId::II4RoleAnalysis, &ctx).map_err(|e| GenerateError::Transport(e.to_string()))?;
    let request = GenerationRequest {
        prompt,
        temperature: svc.config.analysis_temperature,
        max_tokens: svc.config.max_tokens,
        template: TemplateId::II4RoleAnalysis,
    };
    let names = match svc.gateway.generate(&request) {
        Ok(r) => {
            *calls += 1;
            parse_role_list(&r.text).ok()
        }
        Err(GenerateError::BudgetExhausted) => return Ok(program),
        Err(GenerateError::Provider { .. }) => {
            *calls += 1;
            None
        }
        Err(e) => return Err(e),
    };
    let names = names.unwrap_or_else(|| {
        log::warn!("role analysis unusable; marking every helper mutable");
        program.names().filter(|n| *n != program.entry()).map(str::to_string).collect::<BTreeSet<_>>()
    });
    Ok(apply_role_partition(&program, &names).0)
}

fn finish<B: Backend>(
    svc: &mut Services<'_, B>,
    operator: OperatorKind,
    program: StructuredProgram,
    thought: String,
    mut calls: usize,
) -> Result<Candidate, GenerateError> {
    let budget = svc.gateway.remaining();
    let out = repair_loop(program, svc.gateway, budget, svc.profile, svc.prompts, svc.task_description, &svc.config.repair)?;
    calls += out.calls_used;
    let status = match out.status {
        RepairStatus::Closed => CandidateStatus::Ready,
        RepairStatus::IncompleteBudgetExhausted => CandidateStatus::Incomplete,
    };
    let program = prune_unreachable(&out.program, svc.profile);
    Ok(Candidate { operator, program, thought, calls_used: calls, status })
}

/// Applies one operator. Returns `None` when no budget is left for the
/// first generation call. `m1` on a parent without mutable functions
/// becomes `m2`.
pub fn apply_operator<B: Backend, R: Rng + ?Sized>(
    kind: OperatorKind,
    primary: &ProgramNode,
    partner: Option<&ProgramNode>,
    svc: &mut Services<'_, B>,
    rng: &mut R,
) -> Result<Option<Candidate>, GenerateError> {
    let mut calls = 0;
    let parent = &primary.program;
    match kind {
        OperatorKind::MicroTune => {
            let targets: Vec<&FunctionEntry> = parent.with_role(Role::Mutable).collect();
            if targets.is_empty() {
                log::info!("node {} has no mutable function; using m2", primary.id);
                return apply_operator(OperatorKind::MacroMutate, primary, None, svc, rng);
            }
            let target = targets[rng.random_range(0..targets.len())].clone();
            let ctx = PromptContext::new().with("task_description", svc.task_description).with("FUNC_CODE", target.body.clone());
            let fragment = match generate_fragment(svc, TemplateId::II1MicroTune, &ctx, &mut calls)? {
                Generated::OutOfBudget => return Ok(None),
                Generated::Unusable(reason) => return Ok(Some(rejected(kind, parent, &primary.thought, calls, reason))),
                Generated::Code(f, _) => f,
            };
            let Some(new) = fragment.functions.iter().find(|f| f.name == target.name) else {
                let reason = alloc::format!("response does not define `{}`", target.name);
                return Ok(Some(rejected(kind, parent, &primary.thought, calls, reason)));
            };
            if new.normalized_signature() != target.normalized_signature() {
                let reason = alloc::format!("signature of `{}` changed", target.name);
                return Ok(Some(rejected(kind, parent, &primary.thought, calls, reason)));
            }
            let mut program = parent.clone();
            program.replace_function(&target.name, new.signature.clone(), new.body.clone());
            finish(svc, kind, program, primary.thought.clone(), calls).map(Some)
        }
        OperatorKind::MacroMutate | OperatorKind::Crossover => {
            let (template, ctx) = if kind == OperatorKind::Crossover {
                let b = partner.expect("crossover needs a partner");
                (
                    TemplateId::II3Crossover,
                    PromptContext::new()
                        .with("task_description", svc.task_description)
                        .with("THOUGHT_A", primary.thought.clone())
                        .with("CODE_A_MAIN", parent.entry_function().body.clone())
                        .with("THOUGHT_B", b.thought.clone())
                        .with("CODE_B_MAIN", b.program.entry_function().body.clone()),
                )
            } else {
                (
                    TemplateId::II2MacroMutate,
                    PromptContext::new()
                        .with("task_description", svc.task_description)
                        .with("PREVIOUS_THOUGHT", primary.thought.clone())
                        .with("CURRENT_CODE", parent.entry_function().body.clone()),
                )
            };
            let (fragment, text) = match generate_fragment(svc, template, &ctx, &mut calls)? {
                Generated::OutOfBudget => return Ok(None),
                Generated::Unusable(reason) => return Ok(Some(rejected(kind, parent, "", calls, reason))),
                Generated::Code(f, t) => (f, t),
            };
            let thought = extract_thought(&text);
            let entry = pick_entry(&fragment, parent.entry(), svc.profile).expect("fragments hold at least one function");
            let mut program = parent.clone();
            if let Some(b) = partner.filter(|_| kind == OperatorKind::Crossover) {
                // the hybrid may call helpers of either parent
                program.merge_imports(&b.program.preface, svc.profile);
                for f in b.program.functions() {
                    if f.role != Role::Entry {
                        program.insert_function(f.clone(), f.role);
                    }
                }
            }
            program.merge_imports(&fragment.preface, svc.profile);
            let entry_name = entry.name.clone();
            program.set_entry_function(entry);
            for f in fragment.functions {
                if f.name != entry_name {
                    program.insert_function(f, Role::Mutable);
                }
            }
            let program = role_analysis(svc, program, &mut calls)?;
            finish(svc, kind, program, thought, calls).map(Some)
        }
        OperatorKind::ColdStart => panic!("cold start is not a variation operator"),
    }
}
