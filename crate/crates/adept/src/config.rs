//! Run configuration, read from TOML.

use std::path::{Path, PathBuf};

use adept_core::cop::Problem;
use adept_core::engine::EngineConfig;
use adept_core::operators::{OperatorConfig, SchedulerConfig};
use adept_core::scoring::AggregateMode;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::harness::HarnessConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: Box<toml::de::Error> },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Mock,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnealConfig {
    pub t0: f64,
    pub alpha: f64,
    pub n_stall: u32,
    pub delta_t: f64,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self { t0: 1.0, alpha: 0.95, n_stall: 3, delta_t: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub total_time_limit_s: f64,
    pub workers: usize,
    pub smoke_limit_s: f64,
    /// Drop-failed mean with this penalty per failed instance; strict when unset.
    pub lenient_penalty: Option<f64>,
    pub cache: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        let h = HarnessConfig::default();
        Self { total_time_limit_s: 120.0, workers: h.workers, smoke_limit_s: h.smoke_limit_s, lenient_penalty: None, cache: h.cache }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: BackendKind,
    /// Scenario manifest for the mock backend; the built-in scenario when unset.
    pub scenario: Option<PathBuf>,
    /// Keyed fixture directory for the mock backend; takes precedence over `scenario`.
    pub fixtures: Option<PathBuf>,
    pub retries: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckpointConfig {
    pub path: Option<PathBuf>,
    /// Generations between checkpoints; 0 writes only at the end.
    pub interval: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Problem,
    pub k_parents: usize,
    pub budget: usize,
    pub seed: u64,
    pub fitness_seed: u64,
    pub anneal: AnnealConfig,
    pub scheduler: SchedulerConfig,
    pub operators: OperatorConfig,
    pub eval: EvalConfig,
    pub backend: BackendConfig,
    pub checkpoint: CheckpointConfig,
    pub out: Option<PathBuf>,
    /// Directory of template overrides, one `<tag>.txt` file per template.
    pub templates: Option<PathBuf>,
    /// Guest profile in TOML; the Python profile when unset.
    pub profile: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: Problem::Mis,
            k_parents: 5,
            budget: 500,
            seed: 0,
            fitness_seed: 0,
            anneal: AnnealConfig::default(),
            scheduler: SchedulerConfig::default(),
            operators: OperatorConfig::default(),
            eval: EvalConfig::default(),
            backend: BackendConfig::default(),
            checkpoint: CheckpointConfig::default(),
            out: None,
            templates: None,
            profile: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let c: Self = toml::from_str(text).map_err(|e| ConfigError::Parse { path: path.to_path_buf(), source: Box::new(e) })?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml(&text, path)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.k_parents == 0 {
            return bad("k_parents must be at least 1");
        }
        if !(self.anneal.t0 > 0.0) {
            return bad("anneal.t0 must be positive");
        }
        if !(self.anneal.alpha > 0.0 && self.anneal.alpha <= 1.0) {
            return bad("anneal.alpha must lie in (0, 1]");
        }
        if self.anneal.n_stall == 0 {
            return bad("anneal.n_stall must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.scheduler.p_cross) {
            return bad("scheduler.p_cross must lie in [0, 1]");
        }
        if !(self.scheduler.lambda >= 0.0 && self.scheduler.lambda <= 1.0) {
            return bad("scheduler.lambda must lie in [0, 1]");
        }
        if !(self.eval.total_time_limit_s > 0.0) || !(self.eval.smoke_limit_s > 0.0) {
            return bad("eval time limits must be positive");
        }
        if self.eval.workers == 0 {
            return bad("eval.workers must be at least 1");
        }
        Ok(())
    }

    pub fn engine_config(&self) -> EngineConfig {
        EngineConfig {
            k: self.k_parents,
            budget: self.budget,
            t0: self.anneal.t0,
            alpha: self.anneal.alpha,
            delta_t: self.anneal.delta_t,
            n_stall: self.anneal.n_stall,
            scheduler: self.scheduler.clone(),
            operators: self.operators.clone(),
            seed: self.seed,
        }
    }

    pub fn harness_config(&self) -> HarnessConfig {
        HarnessConfig {
            workers: self.eval.workers,
            smoke_limit_s: self.eval.smoke_limit_s,
            mode: match self.eval.lenient_penalty {
                Some(penalty) => AggregateMode::Lenient { penalty },
                None => AggregateMode::Strict,
            },
            cache: self.eval.cache,
        }
    }

    /// Hash of everything that influences the search trajectory. Paths and
    /// the checkpoint schedule are excluded.
    pub fn run_hash(&self) -> String {
        let key = serde_json::json!({
            "problem": self.problem,
            "engine": self.engine_config(),
            "fitness_seed": self.fitness_seed,
            "eval": {
                "total_time_limit_s": self.eval.total_time_limit_s,
                "smoke_limit_s": self.eval.smoke_limit_s,
                "lenient_penalty": self.eval.lenient_penalty,
            },
            "backend": self.backend.kind,
        });
        hex::encode(Sha256::digest(key.to_string().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let c = RunConfig::from_toml("", Path::new("x.toml")).unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!((c.k_parents, c.budget, c.eval.total_time_limit_s), (5, 500, 120.0));
        let e = c.engine_config();
        assert_eq!((e.t0, e.alpha, e.n_stall, e.delta_t), (1.0, 0.95, 3, 0.2));
        assert_eq!((e.scheduler.lambda, e.scheduler.p_cross, e.scheduler.r_max), (0.8, 0.2, 1.0));

        let c = RunConfig::from_toml(
            "problem = \"cvrp\"\nbudget = 60\n[anneal]\nalpha = 0.9\n[backend]\nkind = \"remote\"\n",
            Path::new("x.toml"),
        )
        .unwrap();
        assert_eq!((c.problem, c.budget, c.anneal.alpha, c.anneal.t0), (Problem::Cvrp, 60, 0.9, 1.0));
        assert_eq!(c.backend.kind, BackendKind::Remote);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(RunConfig::from_toml("bogus = 1", Path::new("x")), Err(ConfigError::Parse { .. })));
        assert!(matches!(RunConfig::from_toml("problem = \"tsp\"", Path::new("x")), Err(ConfigError::Parse { .. })));
        assert!(matches!(RunConfig::from_toml("k_parents = 0", Path::new("x")), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn hash_ignores_paths() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.out = Some("elsewhere".into());
        b.checkpoint.interval = 7;
        assert_eq!(a.run_hash(), b.run_hash());
        b.seed = 1;
        assert_ne!(a.run_hash(), b.run_hash());
    }
}
