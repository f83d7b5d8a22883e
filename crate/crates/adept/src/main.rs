use std::path::PathBuf;
use std::process::ExitCode;

use adept::config::{BackendKind, RunConfig};
use adept::harness::{FitnessSet, Harness};
use adept::orchestrator::{self, RunOptions};
use adept::runner::SubprocessRunner;
use adept_core::cop::{generate_tiny, oracle_optimum, Problem};
use adept_core::scoring::Evaluator;
use clap::{Parser, Subcommand};
use serde_json::json;

const CONFIG_ERROR: u8 = 2;
const UNAVAILABLE: u8 = 3;

#[derive(Parser)]
#[command(name = "adept", version, about = "Evolutionary search over solver programs for combinatorial optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the search.
    Run {
        #[arg(long)]
        problem: Option<String>,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        parents: Option<usize>,
        #[arg(long, value_enum)]
        backend: Option<BackendKind>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        resume: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Stop after this many generations (cold start included).
        #[arg(long)]
        stop_after: Option<usize>,
    },
    /// Score one program on a fitness set.
    Evaluate {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        problem: String,
        /// Fitness set seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 120.0)]
        time_limit: f64,
    },
    /// Exact optima of small generated instances.
    Oracle {
        #[arg(long)]
        problem: String,
        /// Acknowledge that only size-bounded instances are solved.
        #[arg(long)]
        size_bounded: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
}

fn problem(name: &str) -> Result<Problem, ExitCode> {
    Problem::parse(name).ok_or_else(|| {
        let known: Vec<_> = Problem::ALL.iter().map(|p| p.name()).collect();
        eprintln!("unknown problem `{name}` (expected one of {})", known.join(", "));
        ExitCode::from(CONFIG_ERROR)
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}

fn dispatch(command: Command) -> Result<(), ExitCode> {
    match command {
        Command::Run { problem: name, budget, parents, backend, config, checkpoint, resume, seed, out, stop_after } => {
            let mut cfg = match &config {
                Some(path) => RunConfig::load(path).map_err(|e| {
                    eprintln!("{e}");
                    ExitCode::from(CONFIG_ERROR)
                })?,
                None => RunConfig::default(),
            };
            if let Some(n) = &name {
                cfg.problem = problem(n)?;
            }
            cfg.budget = budget.unwrap_or(cfg.budget);
            cfg.k_parents = parents.unwrap_or(cfg.k_parents);
            cfg.backend.kind = backend.unwrap_or(cfg.backend.kind);
            cfg.seed = seed.unwrap_or(cfg.seed);
            let opts = RunOptions { checkpoint, resume, out, stop_at_generation: stop_after };
            let outcome = orchestrator::run(&cfg, &opts).map_err(|e| {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code() as u8)
            })?;
            let best = outcome.state.best.and_then(|id| outcome.state.tree.get(id));
            let summary = json!({
                "problem": cfg.problem,
                "best_id": best.map(|n| n.id),
                "best_score": best.and_then(|n| n.score.value()),
                "nodes": outcome.state.tree.len(),
                "calls_used": outcome.state.ledger.used,
                "report": outcome.report,
            });
            println!("{}", serde_json::to_string_pretty(&summary).expect("serializes"));
            Ok(())
        }
        Command::Evaluate { program, problem: name, seed, time_limit } => {
            let p = problem(&name)?;
            let source = std::fs::read_to_string(&program).map_err(|e| {
                eprintln!("cannot read {}: {e}", program.display());
                ExitCode::from(CONFIG_ERROR)
            })?;
            let runner = SubprocessRunner::from_env().and_then(|r| r.probe().map(|_| r)).map_err(|e| {
                eprintln!("{e}");
                ExitCode::from(UNAVAILABLE)
            })?;
            let mut harness = Harness::new(runner, FitnessSet::generate(p, seed, time_limit), Default::default());
            let result = harness.evaluate(&source, p.entry_name()).map_err(|e| {
                eprintln!("{e}");
                ExitCode::from(UNAVAILABLE)
            })?;
            let instances: Vec<_> = harness
                .fitness()
                .instances
                .iter()
                .zip(&result.instances)
                .map(|(i, r)| json!({"tier": i.tier, "seed": i.seed, "sigma": i.sigma, "status": r.status, "objective": r.objective, "score": r.score, "wall_time_s": r.wall_time_s, "detail": r.detail}))
                .collect();
            let out = json!({"problem": p, "aggregate": result.aggregate.value(), "failed": result.aggregate.is_failed(), "wall_time_s": result.wall_time_s, "instances": instances});
            println!("{}", serde_json::to_string_pretty(&out).expect("serializes"));
            Ok(())
        }
        Command::Oracle { problem: name, size_bounded, seed, count } => {
            let p = problem(&name)?;
            if !size_bounded {
                eprintln!("exact optima are only available for size-bounded instances; pass --size-bounded");
                return Err(ExitCode::from(CONFIG_ERROR));
            }
            for s in seed..seed + count {
                let instance = generate_tiny(p, s);
                match oracle_optimum(&instance) {
                    Ok(r) => println!("{}", json!({"seed": s, "instance": instance, "optimum": r.value, "solution": r.solution})),
                    Err(e) => {
                        eprintln!("seed {s}: {e}");
                        return Err(ExitCode::from(CONFIG_ERROR));
                    }
                }
            }
            Ok(())
        }
    }
}
