//! Greedy constructive baselines, natively and as guest programs.

use alloc::format;
use alloc::string::String;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cop::{CopInstance, CopSolution, InstanceData, Problem};

pub mod constructive;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaselineKind {
    GreedyConstructive,
    /// Uniform choice among the feasible candidates at every step.
    RandomFeasible,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BaselineError {
    #[error("construction reached a dead end")]
    ConstructionStuck,
    #[error("instance shape not supported by the construction")]
    Unsupported,
}

fn solve(instance: &CopInstance, rng: Option<&mut dyn RngCore>) -> Result<CopSolution, BaselineError> {
    use constructive::*;
    Ok(match &instance.data {
        InstanceData::Cflp(i) => CopSolution::Cflp(cflp_with(i, rng)?),
        InstanceData::Cvrp(i) => CopSolution::Cvrp(cvrp_with(i, rng)),
        InstanceData::Fjsp(i) => CopSolution::Fjsp(fjsp_with(i, rng)),
        InstanceData::Mis(i) => CopSolution::Mis(mis_with(i, rng)),
        InstanceData::Cevrptw(i) => CopSolution::Cevrptw(cevrptw_with(i, rng)?),
        InstanceData::Mrcpsp(i) => CopSolution::Mrcpsp(mrcpsp_with(i, rng)?),
    })
}

/// Greedy construction with the problem's fixed priority rule.
pub fn constructive_solve(instance: &CopInstance) -> Result<CopSolution, BaselineError> {
    solve(instance, None)
}

pub fn random_feasible<R: RngCore>(instance: &CopInstance, rng: &mut R) -> Result<CopSolution, BaselineError> {
    solve(instance, Some(rng))
}

fn python_baseline(problem: Problem) -> &'static str {
    match problem {
        Problem::Cflp => include_str!("../../data/baselines/cflp.py"),
        Problem::Cvrp => include_str!("../../data/baselines/cvrp.py"),
        Problem::Fjsp => include_str!("../../data/baselines/fjsp.py"),
        Problem::Mis => include_str!("../../data/baselines/mis.py"),
        Problem::Cevrptw => include_str!("../../data/baselines/cevrptw.py"),
        Problem::Mrcpsp => include_str!("../../data/baselines/mrcpsp.py"),
    }
}

/// Guest program implementing the same construction. The random kind is
/// seeded so that repeated runs agree.
pub fn baseline_guest_source(problem: Problem, kind: BaselineKind) -> String {
    match kind {
        BaselineKind::GreedyConstructive => String::from(python_baseline(problem)),
        BaselineKind::RandomFeasible => seeded_guest_source(problem, 0),
    }
}

pub fn seeded_guest_source(problem: Problem, seed: u64) -> String {
    python_baseline(problem).replacen("RANDOM_SEED = None", &format!("RANDOM_SEED = {seed}"), 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::callgraph::build_call_graph;
    use crate::cop::{generate_tiny, oracle_optimum, validate, Direction};
    use crate::program::{parse_source, render_source, GuestProfile};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tiny_instances_are_solved_feasibly() {
        for p in Problem::ALL {
            for seed in 0..50 {
                let inst = generate_tiny(p, 1000 + seed);
                let sol = constructive_solve(&inst).unwrap_or_else(|e| panic!("{p} {seed}: {e}"));
                assert!(validate(&inst, &sol).unwrap().is_feasible(), "{p} {seed}: {:?}", validate(&inst, &sol));
                let value = crate::cop::objective(&inst, &sol).unwrap();
                let best = oracle_optimum(&inst).unwrap().value;
                match p.direction() {
                    Direction::Minimize => assert!(value >= best - 1e-9 && value.is_finite()),
                    Direction::Maximize => assert!(value <= best + 1e-9),
                }
                assert_eq!(constructive_solve(&inst).unwrap(), sol);
            }
        }
    }

    #[test]
    fn random_construction_stays_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for p in Problem::ALL {
            for seed in 0..30 {
                let inst = generate_tiny(p, seed);
                let sol = random_feasible(&inst, &mut rng).unwrap();
                assert!(validate(&inst, &sol).unwrap().is_feasible(), "{p} {seed}");
            }
        }
    }

    #[test]
    fn guest_sources_are_closed() {
        let profile = GuestProfile::default();
        for p in Problem::ALL {
            for kind in [BaselineKind::GreedyConstructive, BaselineKind::RandomFeasible] {
                let src = baseline_guest_source(p, kind);
                let prog = parse_source(&src, &profile, Some(p.entry_name())).unwrap();
                assert_eq!(prog.entry(), p.entry_name());
                let graph = build_call_graph(&prog, &profile);
                assert!(graph.unresolved.is_empty(), "{p}: {:?}", graph.unresolved);
                let again = parse_source(&render_source(&prog), &profile, Some(p.entry_name())).unwrap();
                assert_eq!(render_source(&again), render_source(&prog));
            }
        }
        assert!(seeded_guest_source(Problem::Mis, 3).contains("RANDOM_SEED = 3\n"));
    }
}
