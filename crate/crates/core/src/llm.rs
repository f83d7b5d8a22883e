//! Text-generation interface with budget accounting.
//!
//! Every completion that reaches a provider costs one unit of the global
//! budget, whether it succeeds or the provider rejects it. Transport
//! failures and missing fixtures cost nothing.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompts::TemplateId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phase {
    ColdStart,
    Mutation,
    Crossover,
    Repair,
    RoleAnalysis,
}

impl Phase {
    pub const ALL: [Phase; 5] = [Phase::ColdStart, Phase::Mutation, Phase::Crossover, Phase::Repair, Phase::RoleAnalysis];

    pub fn of(template: TemplateId) -> Self {
        match template {
            TemplateId::I1Analysis | TemplateId::I2Strategy | TemplateId::I3SeedImpl => Phase::ColdStart,
            TemplateId::II1MicroTune | TemplateId::II2MacroMutate => Phase::Mutation,
            TemplateId::II3Crossover => Phase::Crossover,
            TemplateId::II4RoleAnalysis => Phase::RoleAnalysis,
            TemplateId::II5DependencyRepair => Phase::Repair,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Phase::ColdStart => "cold_start",
            Phase::Mutation => "mutation",
            Phase::Crossover => "crossover",
            Phase::Repair => "repair",
            Phase::RoleAnalysis => "role_analysis",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetLedger {
    pub limit: usize,
    pub used: usize,
    pub cold_start: usize,
    pub mutation: usize,
    pub crossover: usize,
    pub repair: usize,
    pub role_analysis: usize,
}

impl BudgetLedger {
    pub fn new(limit: usize) -> Self {
        Self { limit, used: 0, cold_start: 0, mutation: 0, crossover: 0, repair: 0, role_analysis: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.limit - self.used
    }

    pub fn tally(&self, phase: Phase) -> usize {
        match phase {
            Phase::ColdStart => self.cold_start,
            Phase::Mutation => self.mutation,
            Phase::Crossover => self.crossover,
            Phase::Repair => self.repair,
            Phase::RoleAnalysis => self.role_analysis,
        }
    }

    fn slot(&mut self, phase: Phase) -> &mut usize {
        match phase {
            Phase::ColdStart => &mut self.cold_start,
            Phase::Mutation => &mut self.mutation,
            Phase::Crossover => &mut self.crossover,
            Phase::Repair => &mut self.repair,
            Phase::RoleAnalysis => &mut self.role_analysis,
        }
    }

    /// Takes one unit for `phase`; false when the budget is spent.
    pub fn charge(&mut self, phase: Phase) -> bool {
        if self.used >= self.limit {
            return false;
        }
        self.used += 1;
        *self.slot(phase) += 1;
        true
    }

    pub fn tallies_consistent(&self) -> bool {
        Phase::ALL.iter().map(|p| self.tally(*p)).sum::<usize>() == self.used && self.used <= self.limit
    }
}

impl Default for BudgetLedger {
    fn default() -> Self {
        Self::new(500)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub prompt: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub template: TemplateId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationResponse {
    pub text: String,
    pub latency_ms: u64,
    pub prompt_tokens: Option<u64>,
    pub completion_tokens: Option<u64>,
    pub provider: String,
}

impl GenerationResponse {
    pub fn offline(text: impl Into<String>, provider: &str) -> Self {
        Self { text: text.into(), latency_ms: 0, prompt_tokens: None, completion_tokens: None, provider: provider.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("generation budget exhausted")]
    BudgetExhausted,
    /// The provider received the request and rejected it.
    #[error("provider error (status {status}): {message}")]
    Provider { status: u16, message: String },
    #[error("no fixture for template {template} (key {key})")]
    FixtureMissing { template: String, key: String },
    #[error("transport error: {0}")]
    Transport(String),
}

impl GenerateError {
    /// Whether the failed attempt still reached a provider and costs budget.
    pub fn issued(&self) -> bool {
        matches!(self, GenerateError::Provider { .. })
    }
}

pub trait Backend {
    fn complete(&mut self, request: &GenerationRequest) -> Result<GenerationResponse, GenerateError>;

    /// Internal cursor state, stored in checkpoints.
    fn export_state(&self) -> serde_json::Value {
        serde_json::Value::Null
    }

    fn import_state(&mut self, _state: &serde_json::Value) -> Result<(), GenerateError> {
        Ok(())
    }
}

impl<B: Backend + ?Sized> Backend for alloc::boxed::Box<B> {
    fn complete(&mut self, request: &GenerationRequest) -> Result<GenerationResponse, GenerateError> {
        (**self).complete(request)
    }
    fn export_state(&self) -> serde_json::Value {
        (**self).export_state()
    }
    fn import_state(&mut self, state: &serde_json::Value) -> Result<(), GenerateError> {
        (**self).import_state(state)
    }
}

/// Budget-gated front of a backend.
#[derive(Debug)]
pub struct Gateway<B> {
    backend: B,
    ledger: BudgetLedger,
}

impl<B: Backend> Gateway<B> {
    pub fn new(backend: B, limit: usize) -> Self {
        Self { backend, ledger: BudgetLedger::new(limit) }
    }

    pub fn with_ledger(backend: B, ledger: BudgetLedger) -> Self {
        Self { backend, ledger }
    }

    pub fn generate(&mut self, request: &GenerationRequest) -> Result<GenerationResponse, GenerateError> {
        if self.ledger.remaining() == 0 {
            return Err(GenerateError::BudgetExhausted);
        }
        let phase = Phase::of(request.template);
        match self.backend.complete(request) {
            Ok(mut response) => {
                self.ledger.charge(phase);
                if response.text.is_empty() {
                    response.text.push(' ');
                }
                Ok(response)
            }
            Err(e) => {
                if e.issued() {
                    self.ledger.charge(phase);
                }
                Err(e)
            }
        }
    }

    pub fn remaining(&self) -> usize {
        self.ledger.remaining()
    }

    pub fn ledger(&self) -> &BudgetLedger {
        &self.ledger
    }

    pub fn set_ledger(&mut self, ledger: BudgetLedger) {
        self.ledger = ledger;
    }

    pub fn backend(&self) -> &B {
        &self.backend
    }

    pub fn backend_mut(&mut self) -> &mut B {
        &mut self.backend
    }

    pub fn into_parts(self) -> (B, BudgetLedger) {
        (self.backend, self.ledger)
    }
}

/// One rule of a scripted scenario.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioEntry {
    /// Template the rule applies to; any template when absent.
    #[serde(default)]
    pub template: Option<TemplateId>,
    /// Substring the prompt must contain.
    #[serde(default)]
    pub contains: Option<String>,
    pub responses: Vec<String>,
    /// Restart from the first response once all have been served.
    #[serde(default)]
    pub cycle: bool,
}

/// Deterministic backend serving scripted responses. The first rule that
/// matches the request and still has a response to give answers it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioBackend {
    entries: Vec<ScenarioEntry>,
    cursors: Vec<usize>,
}

impl ScenarioBackend {
    pub fn new(entries: Vec<ScenarioEntry>) -> Self {
        let cursors = alloc::vec![0; entries.len()];
        Self { entries, cursors }
    }

    pub fn entries(&self) -> &[ScenarioEntry] {
        &self.entries
    }
}

impl Backend for ScenarioBackend {
    fn complete(&mut self, request: &GenerationRequest) -> Result<GenerationResponse, GenerateError> {
        for (i, entry) in self.entries.iter().enumerate() {
            if entry.template.is_some_and(|t| t != request.template) {
                continue;
            }
            if entry.contains.as_deref().is_some_and(|c| !request.prompt.contains(c)) {
                continue;
            }
            if entry.responses.is_empty() {
                continue;
            }
            let cursor = self.cursors[i];
            let idx = if cursor < entry.responses.len() {
                cursor
            } else if entry.cycle {
                cursor % entry.responses.len()
            } else {
                continue;
            };
            self.cursors[i] = cursor + 1;
            return Ok(GenerationResponse::offline(entry.responses[idx].clone(), "scenario"));
        }
        Err(GenerateError::FixtureMissing { template: request.template.tag().to_string(), key: "scenario".into() })
    }

    fn export_state(&self) -> serde_json::Value {
        serde_json::to_value(&self.cursors).unwrap_or(serde_json::Value::Null)
    }

    fn import_state(&mut self, state: &serde_json::Value) -> Result<(), GenerateError> {
        let cursors: Vec<usize> = serde_json::from_value(state.clone())
            .map_err(|e| GenerateError::Transport(alloc::format!("bad scenario state: {e}")))?;
        if cursors.len() != self.entries.len() {
            return Err(GenerateError::Transport("scenario state does not match manifest".into()));
        }
        self.cursors = cursors;
        Ok(())
    }
}

/// Scripted backends for unit tests.
pub mod testing {
    use super::*;
    use alloc::format;

    pub struct ScriptedBackend;

    impl ScriptedBackend {
        /// Serves `responses` in order to any request.
        #[allow(clippy::new_ret_no_self)]
        pub fn new(responses: Vec<String>) -> ScenarioBackend {
            ScenarioBackend::new(alloc::vec![ScenarioEntry { template: None, contains: None, responses, cycle: false }])
        }

        /// Serves each response whenever a repair prompt asks for the
        /// function that the response defines.
        pub fn by_missing_name(responses: Vec<String>) -> ScenarioBackend {
            let entries = responses
                .into_iter()
                .filter_map(|r| {
                    let name = r.split("def ").nth(1)?.split('(').next()?.trim().to_string();
                    Some(ScenarioEntry {
                        template: Some(TemplateId::II5DependencyRepair),
                        contains: Some(format!("helper function {name}, ")),
                        responses: alloc::vec![r],
                        cycle: true,
                    })
                })
                .collect();
            ScenarioBackend::new(entries)
        }
    }
}
