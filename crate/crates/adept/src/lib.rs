//! Process, network and file backed services for the search engine in
//! `adept-core`: the guest subprocess runner, the evaluation harness,
//! generation backends, run configuration, checkpoints, reports and the
//! orchestration used by the `adept` binary.

pub mod checkpoint;
pub mod config;
pub mod gateway;
pub mod harness;
pub mod mock;
pub mod orchestrator;
pub mod report;
pub mod runner;
