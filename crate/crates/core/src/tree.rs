//! Persistent search tree of every generated candidate.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::operators::OperatorWeights;
use crate::program::StructuredProgram;

pub type NodeId = usize;

/// Fitness on the maximisation scale. `Failed` ranks below every value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Score {
    Value(f64),
    Failed,
}

impl Score {
    pub fn value(self) -> Option<f64> {
        match self {
            Score::Value(v) => Some(v),
            Score::Failed => None,
        }
    }

    pub fn is_failed(self) -> bool {
        matches!(self, Score::Failed)
    }

    /// Non-finite values collapse to `Failed`.
    pub fn from_f64(v: f64) -> Self {
        if v.is_finite() {
            Score::Value(v)
        } else {
            Score::Failed
        }
    }
}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Score::Failed, Score::Failed) => Some(Ordering::Equal),
            (Score::Failed, Score::Value(_)) => Some(Ordering::Less),
            (Score::Value(_), Score::Failed) => Some(Ordering::Greater),
            (Score::Value(a), Score::Value(b)) => a.partial_cmp(b),
        }
    }
}

impl core::fmt::Display for Score {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Score::Value(v) => write!(f, "{v}"),
            Score::Failed => f.write_str("FAILED"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeStatus {
    Evaluated,
    /// Generated but rejected, crashed, infeasible or timed out.
    Failed,
    /// Dependencies still missing when the budget ran out.
    Incomplete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OperatorKind {
    ColdStart,
    MicroTune,
    MacroMutate,
    Crossover,
}

impl OperatorKind {
    pub fn code(self) -> &'static str {
        match self {
            OperatorKind::ColdStart => "init",
            OperatorKind::MicroTune => "m1",
            OperatorKind::MacroMutate => "m2",
            OperatorKind::Crossover => "e1",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub operator: OperatorKind,
    pub parents: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgramNode {
    pub id: NodeId,
    pub parent_id: Option<NodeId>,
    pub program: StructuredProgram,
    pub score: Score,
    pub thought: String,
    pub history: Vec<HistoryRecord>,
    pub weights: OperatorWeights,
    pub depth: usize,
    pub generation: usize,
    pub status: NodeStatus,
    /// Generation calls spent producing this node, repairs included.
    pub calls_used: usize,
}

impl ProgramNode {
    pub fn operator(&self) -> OperatorKind {
        self.history.last().map(|h| h.operator).unwrap_or(OperatorKind::ColdStart)
    }

    pub fn is_evaluated(&self) -> bool {
        self.status == NodeStatus::Evaluated
    }
}

/// Node contents supplied by the caller; id and depth are assigned on insert.
#[derive(Debug, Clone, PartialEq)]
pub struct NewNode {
    pub parent_id: Option<NodeId>,
    pub program: StructuredProgram,
    pub score: Score,
    pub thought: String,
    pub operator: OperatorKind,
    pub parents: Vec<NodeId>,
    pub weights: OperatorWeights,
    pub generation: usize,
    pub status: NodeStatus,
    pub calls_used: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("unknown parent node {0}")]
    UnknownParent(NodeId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeStats {
    pub s_max: Option<f64>,
    pub s_min: Option<f64>,
    pub d_max: usize,
    pub best_id: Option<NodeId>,
    pub node_count: usize,
    pub evaluated_count: usize,
    pub frontier_ids: Vec<NodeId>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchTree {
    nodes: Vec<ProgramNode>,
    frontier: Vec<NodeId>,
    batch: Vec<NodeId>,
}

impl SearchTree {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores a node permanently and adds it to the batch being built.
    pub fn insert(&mut self, node: NewNode) -> Result<NodeId, TreeError> {
        let depth = match node.parent_id {
            Some(p) => self.get(p).ok_or(TreeError::UnknownParent(p))?.depth + 1,
            None => 0,
        };
        for p in &node.parents {
            if *p >= self.nodes.len() {
                return Err(TreeError::UnknownParent(*p));
            }
        }
        let (status, score) = match (node.status, node.score) {
            (NodeStatus::Evaluated, Score::Value(v)) if v.is_finite() => (NodeStatus::Evaluated, Score::Value(v)),
            (NodeStatus::Evaluated, _) => (NodeStatus::Failed, Score::Failed),
            (s, _) => (s, Score::Failed),
        };
        let id = self.nodes.len();
        self.nodes.push(ProgramNode {
            id,
            parent_id: node.parent_id,
            program: node.program,
            score,
            thought: node.thought,
            history: alloc::vec![HistoryRecord { operator: node.operator, parents: node.parents }],
            weights: node.weights,
            depth,
            generation: node.generation,
            status,
            calls_used: node.calls_used,
        });
        self.batch.push(id);
        Ok(id)
    }

    /// Ends an expansion: the batch becomes the frontier.
    pub fn commit_batch(&mut self) {
        self.frontier = core::mem::take(&mut self.batch);
    }

    pub fn frontier(&self) -> Vec<&ProgramNode> {
        self.frontier.iter().map(|&i| &self.nodes[i]).collect()
    }

    pub fn frontier_ids(&self) -> &[NodeId] {
        &self.frontier
    }

    pub fn batch_ids(&self) -> &[NodeId] {
        &self.batch
    }

    /// Evaluated nodes outside the frontier and the open batch.
    pub fn history_pool(&self) -> Vec<(NodeId, f64)> {
        self.nodes
            .iter()
            .filter(|n| !self.frontier.contains(&n.id) && !self.batch.contains(&n.id))
            .filter_map(|n| n.score.value().map(|s| (n.id, s)))
            .collect()
    }

    pub fn evaluated(&self) -> impl Iterator<Item = &ProgramNode> {
        self.nodes.iter().filter(|n| n.is_evaluated())
    }

    pub fn get(&self, id: NodeId) -> Option<&ProgramNode> {
        self.nodes.get(id)
    }

    pub fn get_mut(&mut self, id: NodeId) -> Option<&mut ProgramNode> {
        self.nodes.get_mut(id)
    }

    pub fn nodes(&self) -> &[ProgramNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Ids from `id` up to its root, `id` first.
    pub fn lineage(&self, id: NodeId) -> Result<Vec<NodeId>, TreeError> {
        let mut out = Vec::new();
        let mut cur = Some(id);
        while let Some(c) = cur {
            let node = self.get(c).ok_or(TreeError::UnknownNode(c))?;
            out.push(c);
            cur = node.parent_id;
        }
        Ok(out)
    }

    /// Depth of the deepest common ancestor; -1 across distinct root
    /// lineages.
    pub fn lca_depth(&self, a: NodeId, b: NodeId) -> Result<i64, TreeError> {
        let la = self.lineage(a)?;
        let lb = self.lineage(b)?;
        for x in &la {
            if lb.contains(x) {
                return Ok(self.nodes[*x].depth as i64);
            }
        }
        Ok(-1)
    }

    pub fn stats(&self) -> TreeStats {
        let mut s_max: Option<f64> = None;
        let mut s_min: Option<f64> = None;
        let mut best_id = None;
        let mut evaluated_count = 0;
        for n in &self.nodes {
            if let Some(v) = n.score.value() {
                evaluated_count += 1;
                if s_max.is_none_or(|m| v > m) {
                    s_max = Some(v);
                    best_id = Some(n.id);
                }
                if s_min.is_none_or(|m| v < m) {
                    s_min = Some(v);
                }
            }
        }
        TreeStats {
            s_max,
            s_min,
            d_max: self.nodes.iter().map(|n| n.depth).max().unwrap_or(0),
            best_id,
            node_count: self.nodes.len(),
            evaluated_count,
            frontier_ids: self.frontier.clone(),
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::program::{parse_source, GuestProfile};
    use alloc::string::ToString;

    pub fn dummy_program() -> StructuredProgram {
        parse_source("def solve():\n    return 0\n", &GuestProfile::default(), None).unwrap()
    }

    pub fn node(parent: Option<NodeId>, score: Option<f64>) -> NewNode {
        NewNode {
            parent_id: parent,
            program: dummy_program(),
            score: score.map(Score::Value).unwrap_or(Score::Failed),
            thought: "t".to_string(),
            operator: if parent.is_some() { OperatorKind::MacroMutate } else { OperatorKind::ColdStart },
            parents: parent.into_iter().collect(),
            weights: OperatorWeights::default(),
            generation: 0,
            status: if score.is_some() { NodeStatus::Evaluated } else { NodeStatus::Failed },
            calls_used: 1,
        }
    }

    #[test]
    fn insert_depths_and_errors() {
        let mut t = SearchTree::new();
        let r = t.insert(node(None, Some(1.0))).unwrap();
        assert_eq!(t.get(r).unwrap().depth, 0);
        assert_eq!(t.stats().node_count, 1);
        let c = t.insert(node(Some(r), Some(2.0))).unwrap();
        assert_eq!(t.get(c).unwrap().depth, 1);
        assert_eq!(t.stats().d_max, 1);
        assert_eq!(t.insert(node(Some(99), Some(1.0))), Err(TreeError::UnknownParent(99)));
    }

    #[test]
    fn frontier_tracks_last_batch() {
        let mut t = SearchTree::new();
        assert!(t.frontier().is_empty());
        let roots: Vec<NodeId> = (0..5).map(|_| t.insert(node(None, Some(1.0))).unwrap()).collect();
        t.commit_batch();
        assert_eq!(t.frontier_ids(), &roots[..]);
        let kids: Vec<NodeId> = roots.iter().map(|&r| t.insert(node(Some(r), None)).unwrap()).collect();
        t.commit_batch();
        assert_eq!(t.frontier_ids(), &kids[..]);
        assert_eq!(t.history_pool().len(), 5);
    }

    #[test]
    fn lca_cases() {
        let mut t = SearchTree::new();
        let r = t.insert(node(None, Some(1.0))).unwrap();
        let a = t.insert(node(Some(r), Some(1.0))).unwrap();
        let b = t.insert(node(Some(r), Some(1.0))).unwrap();
        let g = t.insert(node(Some(a), Some(1.0))).unwrap();
        let gg = t.insert(node(Some(g), Some(1.0))).unwrap();
        let other = t.insert(node(None, Some(1.0))).unwrap();
        assert_eq!(t.lca_depth(a, b).unwrap(), 0);
        assert_eq!(t.lca_depth(a, gg).unwrap(), 1);
        assert_eq!(t.lca_depth(gg, b).unwrap(), 0);
        assert_eq!(t.lca_depth(r, gg).unwrap(), 0);
        assert_eq!(t.lca_depth(a, other).unwrap(), -1);
        assert_eq!(t.lca_depth(a, 77), Err(TreeError::UnknownNode(77)));
    }

    #[test]
    fn stats_and_failed_sentinel() {
        let mut t = SearchTree::new();
        t.insert(node(None, Some(3.0))).unwrap();
        t.insert(node(None, Some(5.0))).unwrap();
        t.insert(node(None, Some(5.0))).unwrap();
        let s = t.stats();
        assert_eq!((s.s_max, s.s_min, s.best_id), (Some(5.0), Some(3.0), Some(1)));

        let mut f = SearchTree::new();
        f.insert(node(None, None)).unwrap();
        let s = f.stats();
        assert_eq!(s.evaluated_count, 0);
        assert!(s.s_max.is_none());

        assert!(Score::Failed < Score::Value(-1e300));
        assert!(Score::Value(1.0) > Score::Value(0.5));
    }

    #[test]
    fn status_and_score_agree() {
        let mut t = SearchTree::new();
        let mut n = node(None, Some(f64::NAN));
        n.status = NodeStatus::Evaluated;
        let id = t.insert(n).unwrap();
        assert_eq!(t.get(id).unwrap().status, NodeStatus::Failed);
        let mut n = node(None, Some(2.0));
        n.status = NodeStatus::Incomplete;
        let id = t.insert(n).unwrap();
        assert_eq!(t.get(id).unwrap().score, Score::Failed);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn random_tree(parents: &[Option<usize>]) -> SearchTree {
            let mut t = SearchTree::new();
            for (i, p) in parents.iter().enumerate() {
                let parent = p.map(|x| x % i.max(1)).filter(|_| i > 0);
                t.insert(node(parent, Some(i as f64))).unwrap();
            }
            t
        }

        proptest! {
            #[test]
            fn lca_symmetric_and_root_zero(parents in prop::collection::vec(prop::option::weighted(0.8, 0usize..100), 2..30), a in 0usize..30, b in 0usize..30) {
                let t = random_tree(&parents);
                let (a, b) = (a % t.len(), b % t.len());
                prop_assert_eq!(t.lca_depth(a, b).unwrap(), t.lca_depth(b, a).unwrap());
                let root = *t.lineage(a).unwrap().last().unwrap();
                prop_assert_eq!(t.lca_depth(root, a).unwrap(), 0);
                for n in t.nodes() {
                    match n.parent_id {
                        Some(p) => prop_assert_eq!(n.depth, t.get(p).unwrap().depth + 1),
                        None => prop_assert_eq!(n.depth, 0),
                    }
                    prop_assert_eq!(n.status != NodeStatus::Evaluated, n.score.is_failed());
                }
                let s = t.stats();
                prop_assert!(s.s_min.unwrap() <= s.s_max.unwrap());
                prop_assert_eq!(s.d_max, t.nodes().iter().map(|n| n.depth).max().unwrap());
            }
        }
    }
}
