//! Parent selection: Metropolis acceptance over the newest expansion,
//! re-annealing on stagnation, and Boltzmann sampling from the history.

use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::tree::{NodeId, Score, SearchTree};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealState {
    pub temperature: f64,
    pub stall_counter: u32,
    pub t0: f64,
    pub alpha: f64,
    pub delta_t: f64,
    pub n_stall: u32,
}

impl AnnealState {
    pub fn new(t0: f64, alpha: f64, delta_t: f64, n_stall: u32) -> Self {
        Self { temperature: t0, stall_counter: 0, t0, alpha, delta_t, n_stall }
    }
}

impl Default for AnnealState {
    fn default() -> Self {
        Self::new(1.0, 0.95, 0.2, 3)
    }
}

/// Metropolis criterion: improvements always pass, a worse child passes
/// when `u < exp(dS / T)`, a failed child never does.
pub fn sa_accept(s_child: Score, s_parent: f64, temperature: f64, u: f64) -> bool {
    match s_child {
        Score::Failed => false,
        Score::Value(c) => {
            if !s_parent.is_finite() || c >= s_parent {
                return true;
            }
            u < libm::exp((c - s_parent) / temperature)
        }
    }
}

pub fn update_temperature(state: &AnnealState, improved_global_best: bool) -> AnnealState {
    let mut next = state.clone();
    if improved_global_best {
        next.stall_counter = 0;
        next.temperature = state.alpha * state.temperature;
    } else {
        next.stall_counter = state.stall_counter + 1;
        if next.stall_counter >= state.n_stall {
            next.temperature = state.temperature + state.delta_t;
            next.stall_counter = 0;
        } else {
            next.temperature = state.alpha * state.temperature;
        }
    }
    if !(next.temperature > f64::MIN_POSITIVE) {
        next.temperature = f64::MIN_POSITIVE;
    }
    next
}

/// Boltzmann weights `exp((S - S_max) / T)` of a pool.
pub fn boltzmann_weights(scores: &[f64], temperature: f64) -> Vec<f64> {
    let s_max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    scores.iter().map(|s| libm::exp((s - s_max) / temperature)).collect()
}

/// Index drawn with probability proportional to `weights`; `None` if the
/// weights sum to zero.
pub fn weighted_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return None;
    }
    let mut x = rng.random::<f64>() * total;
    let mut last = None;
    for (i, w) in weights.iter().enumerate() {
        if *w > 0.0 {
            last = Some(i);
            if x < *w {
                return Some(i);
            }
            x -= w;
        }
    }
    last
}

/// Draws `min(count, |pool|)` distinct ids without replacement.
pub fn boltzmann_supplement<R: Rng + ?Sized>(pool: &[(NodeId, f64)], count: usize, temperature: f64, rng: &mut R) -> Vec<NodeId> {
    if count > pool.len() {
        log::warn!("supplement pool holds {} nodes, {} requested", pool.len(), count);
    }
    let mut remaining: Vec<(NodeId, f64)> = pool.to_vec();
    let mut out = Vec::new();
    while out.len() < count && !remaining.is_empty() {
        let scores: Vec<f64> = remaining.iter().map(|(_, s)| *s).collect();
        let w = boltzmann_weights(&scores, temperature);
        let i = weighted_index(&w, rng).unwrap_or(0);
        out.push(remaining.remove(i).0);
    }
    out
}

/// What one selection step saw and returned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub generation: usize,
    pub temperature: f64,
    pub frontier: Vec<NodeId>,
    pub accepted: Vec<NodeId>,
    pub supplemented: Vec<NodeId>,
}

impl SelectionRecord {
    pub fn parents(&self) -> Vec<NodeId> {
        self.accepted.iter().chain(&self.supplemented).copied().collect()
    }
}

/// Frontier nodes pass Metropolis acceptance against their parents (roots
/// pass unless failed); shortfalls below `k` are filled from the history.
pub fn select_parents<R: Rng + ?Sized>(tree: &SearchTree, state: &AnnealState, k: usize, generation: usize, rng: &mut R) -> SelectionRecord {
    let mut accepted = Vec::new();
    for node in tree.frontier() {
        if node.score.is_failed() {
            continue;
        }
        let parent_score = node.parent_id.and_then(|p| tree.get(p)).and_then(|p| p.score.value());
        let ok = match parent_score {
            None => true,
            Some(ps) => {
                let child = node.score.value().unwrap_or(f64::NEG_INFINITY);
                child >= ps || sa_accept(node.score, ps, state.temperature, rng.random::<f64>())
            }
        };
        if ok {
            accepted.push(node.id);
        }
    }
    accepted.truncate(k);
    let mut supplemented = Vec::new();
    if accepted.len() < k {
        supplemented = boltzmann_supplement(&tree.history_pool(), k - accepted.len(), state.temperature, rng);
    }
    SelectionRecord {
        generation,
        temperature: state.temperature,
        frontier: tree.frontier_ids().to_vec(),
        accepted,
        supplemented,
    }
}
