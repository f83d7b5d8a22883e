//! Core of an evolutionary program-tree search engine for combinatorial
//! optimization solvers.
//!
//! Candidate solver programs are held as structured programs (a preface plus
//! a registry of top-level functions), kept executable by a call-graph driven
//! repair loop, varied by text-generation backed operators and organized in a
//! persistent search tree. Parent selection mixes Metropolis acceptance over
//! the newest expansion with Boltzmann sampling from the history.
//!
//! This crate performs no IO. Text generation and program evaluation reach it
//! through the [`llm::Backend`] and [`scoring::Evaluator`] traits; the `adept`
//! crate provides process, network and file-backed implementations.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod baselines;
pub mod callgraph;
pub mod cop;
pub mod engine;
pub mod lexer;
pub mod llm;
pub mod operators;
pub mod program;
pub mod prompts;
pub mod rng;
pub mod scoring;
pub mod selection;
pub mod tree;

pub use callgraph::{build_call_graph, prune_unreachable, repair_loop, CallGraph, RepairOutcome, RepairStatus};
pub use cop::{CopInstance, CopSolution, Direction, Problem, Tier, Verdict};
pub use engine::{Engine, EngineConfig, EngineState};
pub use llm::{Backend, BudgetLedger, Gateway, GenerateError, GenerationRequest, GenerationResponse, Phase};
pub use operators::{OperatorWeights, SchedulerConfig};
pub use program::{FunctionEntry, GuestProfile, ProgramError, Role, StructuredProgram};
pub use prompts::{PromptContext, PromptLibrary, TemplateId};
pub use scoring::{EvalResult, Evaluator, InstanceStatus};
pub use selection::AnnealState;
pub use tree::{NodeId, NodeStatus, ProgramNode, Score, SearchTree, TreeStats};
