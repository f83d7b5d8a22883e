//! Evaluates candidate programs on a fitness set through guest workers.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use adept_core::cop::{fitness_instances, CopInstance, Problem};
use adept_core::scoring::{score_solution, AggregateMode, EvalError, EvalResult, Evaluator, InstanceResult, InstanceStatus};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::runner::{GuestRequest, GuestRunner, GuestStatus, RunnerError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessSet {
    pub problem: Problem,
    pub instances: Vec<CopInstance>,
    pub total_time_limit_s: f64,
}

impl FitnessSet {
    /// The standard 16-instance set for `problem`.
    pub fn generate(problem: Problem, seed: u64, total_time_limit_s: f64) -> Self {
        Self { problem, instances: fitness_instances(problem, seed), total_time_limit_s }
    }

    pub fn per_instance_limit_s(&self) -> f64 {
        self.total_time_limit_s / self.instances.len().max(1) as f64
    }

    pub fn smallest(&self) -> Option<&CopInstance> {
        self.instances.iter().min_by_key(|i| i.size())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessConfig {
    /// Instances run concurrently per candidate.
    pub workers: usize,
    pub smoke_limit_s: f64,
    pub mode: AggregateMode,
    /// Reuse results for byte-identical programs.
    pub cache: bool,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self { workers: 4, smoke_limit_s: 2.0, mode: AggregateMode::Strict, cache: true }
    }
}

pub struct Harness<R> {
    runner: R,
    fitness: FitnessSet,
    config: HarnessConfig,
    cache: HashMap<String, EvalResult>,
    smoke_cache: HashMap<String, bool>,
    /// Full evaluations actually executed (cache hits excluded).
    pub evaluations: usize,
}

fn program_key(source: &str, entry: &str) -> String {
    let mut h = Sha256::new();
    h.update(entry.as_bytes());
    h.update([0u8]);
    h.update(source.as_bytes());
    hex::encode(h.finalize())
}

fn unavailable(e: RunnerError) -> EvalError {
    EvalError::RunnerUnavailable(e.to_string())
}

impl<R: GuestRunner> Harness<R> {
    pub fn new(runner: R, fitness: FitnessSet, config: HarnessConfig) -> Self {
        Self { runner, fitness, config, cache: HashMap::new(), smoke_cache: HashMap::new(), evaluations: 0 }
    }

    pub fn fitness(&self) -> &FitnessSet {
        &self.fitness
    }

    pub fn runner(&self) -> &R {
        &self.runner
    }

    fn request(&self, source: &str, entry: &str, instance: &CopInstance, limit: f64) -> GuestRequest {
        GuestRequest {
            source: source.to_string(),
            entry: entry.to_string(),
            problem: self.fitness.problem.name().to_string(),
            instance: serde_json::to_value(instance).expect("instances serialize"),
            time_limit_s: limit,
        }
    }

    /// Runs one instance and scores whatever came back.
    pub fn run_instance(&self, source: &str, entry: &str, instance: &CopInstance, limit: f64) -> Result<InstanceResult, EvalError> {
        let response = self.runner.execute(&self.request(source, entry, instance, limit)).map_err(unavailable)?;
        Ok(match response.status {
            GuestStatus::Ok => score_solution(instance, &response.solution, response.wall_time_s),
            GuestStatus::Error => InstanceResult::failed(InstanceStatus::GuestError, response.wall_time_s, response.stderr_tail),
            GuestStatus::Timeout => InstanceResult::failed(InstanceStatus::Timeout, response.wall_time_s, response.stderr_tail),
        })
    }

    /// Evaluates on the whole fitness set without consulting the cache.
    pub fn evaluate_uncached(&self, source: &str, entry: &str) -> Result<EvalResult, EvalError> {
        let instances = &self.fitness.instances;
        let limit = self.fitness.per_instance_limit_s();
        let total = Duration::from_secs_f64(self.fitness.total_time_limit_s);
        let started = Instant::now();
        let next = AtomicUsize::new(0);
        let slots: Mutex<Vec<Option<InstanceResult>>> = Mutex::new(vec![None; instances.len()]);
        let failure: Mutex<Option<EvalError>> = Mutex::new(None);
        let workers = self.config.workers.clamp(1, instances.len().max(1));
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= instances.len() || failure.lock().unwrap().is_some() {
                        break;
                    }
                    let elapsed = started.elapsed();
                    let result = if elapsed >= total {
                        Ok(InstanceResult::failed(InstanceStatus::Timeout, 0.0, "total time limit exhausted"))
                    } else {
                        let left = (total - elapsed).as_secs_f64();
                        self.run_instance(source, entry, &instances[i], limit.min(left))
                    };
                    match result {
                        Ok(r) => slots.lock().unwrap()[i] = Some(r),
                        Err(e) => {
                            *failure.lock().unwrap() = Some(e);
                            break;
                        }
                    }
                });
            }
        });
        if let Some(e) = failure.into_inner().unwrap() {
            return Err(e);
        }
        let results = slots.into_inner().unwrap().into_iter().map(|r| r.expect("every slot filled")).collect();
        let mut out = EvalResult::from_instances(results, self.config.mode);
        out.wall_time_s = started.elapsed().as_secs_f64();
        Ok(out)
    }
}

impl<R: GuestRunner> Evaluator for Harness<R> {
    fn smoke_check(&mut self, source: &str, entry: &str) -> Result<bool, EvalError> {
        let key = program_key(source, entry);
        if self.config.cache {
            if let Some(ok) = self.smoke_cache.get(&key) {
                return Ok(*ok);
            }
        }
        let Some(instance) = self.fitness.smallest() else { return Ok(false) };
        let r = self.run_instance(source, entry, instance, self.config.smoke_limit_s)?;
        let ok = r.status == InstanceStatus::Ok;
        if !ok {
            log::info!("smoke check failed ({:?}): {}", r.status, r.detail.lines().last().unwrap_or(""));
        }
        if self.config.cache {
            self.smoke_cache.insert(key, ok);
        }
        Ok(ok)
    }

    fn evaluate(&mut self, source: &str, entry: &str) -> Result<EvalResult, EvalError> {
        let key = program_key(source, entry);
        if self.config.cache {
            if let Some(r) = self.cache.get(&key) {
                return Ok(r.clone());
            }
        }
        let r = self.evaluate_uncached(source, entry)?;
        self.evaluations += 1;
        if self.config.cache {
            self.cache.insert(key, r.clone());
        }
        Ok(r)
    }
}
