//! Wires configuration, backend, harness, checkpoints and reports around
//! the engine.

use std::path::{Path, PathBuf};

use adept_core::engine::{Engine, EngineError, EngineState, TaskSpec};
use adept_core::llm::Backend;
use adept_core::program::GuestProfile;
use adept_core::prompts::{PromptLibrary, TemplateId};
use adept_core::scoring::Evaluator;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::checkpoint::{self, CheckpointError};
use crate::config::{BackendKind, ConfigError, RunConfig};
use crate::gateway::{load_scenario, FixtureBackend, RemoteBackend};
use crate::harness::{FitnessSet, Harness};
use crate::mock::default_scenario;
use crate::report::{write_report, ReportError};
use crate::runner::SubprocessRunner;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("unavailable: {0}")]
    Unavailable(String),
    #[error(transparent)]
    Engine(EngineError),
    #[error(transparent)]
    Report(#[from] ReportError),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Checkpoint(_) => 2,
            RunError::Unavailable(_) => 3,
            RunError::Engine(EngineError::Eval(_) | EngineError::Generate(_)) => 3,
            RunError::Engine(EngineError::Tree(_)) | RunError::Report(_) => 1,
        }
    }
}

impl From<EngineError> for RunError {
    fn from(e: EngineError) -> Self {
        RunError::Engine(e)
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub checkpoint: Option<PathBuf>,
    pub resume: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// Stop (with a checkpoint) once this many generations have run; the
    /// cold start is generation 0.
    pub stop_at_generation: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: EngineState,
    pub report: Vec<PathBuf>,
}

pub fn task_spec(config: &RunConfig) -> TaskSpec {
    let p = config.problem;
    TaskSpec {
        task_description: p.task_description().to_string(),
        function_template: p.function_template().to_string(),
        entry: p.entry_name().to_string(),
    }
}

fn io_error(path: &Path, source: std::io::Error) -> ConfigError {
    ConfigError::Io { path: path.to_path_buf(), source }
}

/// Shipped templates overridden by the `<tag>.txt` files found in `dir`.
pub fn load_prompts(dir: &Path) -> Result<PromptLibrary, ConfigError> {
    let mut texts = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| io_error(dir, e))? {
        let path = entry.map_err(|e| io_error(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "txt") {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
            let text = std::fs::read_to_string(&path).map_err(|e| io_error(&path, e))?;
            texts.push((stem, text));
        }
    }
    PromptLibrary::from_texts(texts.iter().map(|(s, t)| (s.as_str(), t.clone()))).map_err(|e| ConfigError::Invalid(format!("{}: {e}", dir.display())))
}

pub fn load_profile(path: &Path) -> Result<GuestProfile, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let profile: GuestProfile = toml::from_str(&text).map_err(|e| ConfigError::Parse { path: path.to_path_buf(), source: Box::new(e) })?;
    profile.validate().map_err(|e| ConfigError::Invalid(format!("{}: {e}", path.display())))?;
    Ok(profile)
}

/// Configured templates and guest profile.
pub fn language(config: &RunConfig) -> Result<(PromptLibrary, GuestProfile), ConfigError> {
    let prompts = match &config.templates {
        Some(dir) => load_prompts(dir)?,
        None => PromptLibrary::builtin(),
    };
    let profile = match &config.profile {
        Some(path) => load_profile(path)?,
        None => GuestProfile::default(),
    };
    Ok((prompts, profile))
}

/// Configuration hash extended by the template texts and the profile, so
/// a checkpoint only resumes under the exact same prompts.
fn checkpoint_key(config: &RunConfig, prompts: &PromptLibrary, profile: &GuestProfile) -> String {
    let mut h = Sha256::new();
    h.update(config.run_hash().as_bytes());
    for id in TemplateId::ALL {
        h.update(id.tag().as_bytes());
        h.update(prompts.text(id).as_bytes());
    }
    h.update(serde_json::to_vec(profile).expect("profile serializes"));
    hex::encode(h.finalize())
}

/// Runs the search with the given services.
pub fn execute<B: Backend, E: Evaluator>(config: &RunConfig, backend: B, evaluator: E, opts: &RunOptions) -> Result<RunOutcome, RunError> {
    config.validate()?;
    let (prompts, profile) = language(config)?;
    let run_hash = checkpoint_key(config, &prompts, &profile);
    let checkpoint_path = opts.checkpoint.clone().or_else(|| config.checkpoint.path.clone());
    let (engine_config, task) = (config.engine_config(), task_spec(config));
    let mut engine = match &opts.resume {
        Some(path) => {
            let state = checkpoint::load(path, Some(&run_hash))?;
            log::info!("resuming at generation {} with {} calls used", state.generation, state.ledger.used);
            Engine::resume(engine_config, task, prompts, profile, backend, evaluator, state)?
        }
        None => Engine::new(engine_config, task, prompts, profile, backend, evaluator),
    };
    let interval = config.checkpoint.interval;
    loop {
        if opts.stop_at_generation.is_some_and(|g| engine.state().generation >= g) {
            break;
        }
        let more = engine.step()?;
        let g = engine.state().generation;
        if let Some(best) = engine.best() {
            log::info!("generation {} done: best {} ({} calls used)", g - 1, best.score, engine.ledger().used);
        }
        if let (Some(path), true) = (&checkpoint_path, interval > 0 && g % interval == 0 && more) {
            checkpoint::save(path, &engine.snapshot(), &run_hash)?;
        }
        if !more {
            break;
        }
    }
    let state = engine.snapshot();
    if let Some(path) = &checkpoint_path {
        checkpoint::save(path, &state, &run_hash)?;
    }
    let out = opts.out.clone().or_else(|| config.out.clone());
    let report = match out {
        Some(dir) => write_report(&dir, &state, config.problem)?,
        None => Vec::new(),
    };
    Ok(RunOutcome { state, report })
}

pub fn build_backend(config: &RunConfig) -> Result<Box<dyn Backend>, RunError> {
    Ok(match config.backend.kind {
        BackendKind::Remote => {
            let mut b = RemoteBackend::from_env().map_err(|e| RunError::Unavailable(e.to_string()))?;
            if let Some(r) = config.backend.retries {
                b.retries = r;
            }
            Box::new(b)
        }
        BackendKind::Mock => match (&config.backend.fixtures, &config.backend.scenario) {
            (Some(dir), _) => {
                if !dir.is_dir() {
                    return Err(ConfigError::Invalid(format!("fixture directory {} does not exist", dir.display())).into());
                }
                Box::new(FixtureBackend::new(dir))
            }
            (None, Some(path)) => Box::new(load_scenario(path).map_err(|e| ConfigError::Invalid(e.to_string()))?),
            (None, None) => Box::new(default_scenario(config.problem)),
        },
    })
}

/// Harness over the configured fitness set with subprocess guests.
pub fn build_harness(config: &RunConfig) -> Result<Harness<SubprocessRunner>, RunError> {
    let runner = SubprocessRunner::from_env().map_err(|e| RunError::Unavailable(e.to_string()))?;
    runner.probe().map_err(|e| RunError::Unavailable(e.to_string()))?;
    let fitness = FitnessSet::generate(config.problem, config.fitness_seed, config.eval.total_time_limit_s);
    Ok(Harness::new(runner, fitness, config.harness_config()))
}

/// Runs with the configured backend and the subprocess harness.
pub fn run(config: &RunConfig, opts: &RunOptions) -> Result<RunOutcome, RunError> {
    config.validate()?;
    language(config)?;
    let backend = build_backend(config)?;
    let harness = build_harness(config)?;
    execute(config, backend, harness, opts)
}
