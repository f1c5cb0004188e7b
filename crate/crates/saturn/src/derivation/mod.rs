//! Derivation DAGs: the record of one prover run, the training labels
//! read off it, and the merge/collapse machinery that packs several
//! derivations into a single batch.

mod batch;
mod log;

pub use batch::{
    build_batches, merge_batch, merge_dags, Batch, BatchExample, BatchNode, CollapseParams,
    InitTag,
};
pub use log::{parse_log, write_log};

use std::collections::BTreeSet;

use thiserror::Error;

use crate::saturation::RuleId;
use crate::sine::SineLevel;

/// Node index within one [`Dag`]. For DAGs recorded by the prover this
/// coincides with the clause id.
pub type NodeId = u32;

/// What an initial clause is: a named axiom, an axiom deliberately
/// presented as unknown, or a conjecture clause.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InitialTag {
    Axiom(String),
    Unknown,
    Goal,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NodeLabel {
    Initial {
        tag: InitialTag,
        level: SineLevel,
    },
    Derived {
        rule: RuleId,
        premises: Vec<NodeId>,
    },
}

/// The derivation DAG of one proof attempt. Nodes are stored in
/// topological order: every premise id is smaller than its consumer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dag {
    pub problem: String,
    pub nodes: Vec<NodeLabel>,
    pub selected: BTreeSet<NodeId>,
    pub proof: Option<BTreeSet<NodeId>>,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum DagError {
    #[error("node {0} is not in the DAG")]
    MissingNode(NodeId),
    #[error("node {node} lists premise {premise} which does not precede it")]
    PremiseOrder { node: NodeId, premise: NodeId },
    #[error("rule {rule:?} applied to {got} premises, expected {expected}")]
    PremiseCount {
        rule: RuleId,
        got: usize,
        expected: usize,
    },
    #[error("the DAG records no proof")]
    NoProof,
    #[error("no selected clause lies on the proof; nothing to label")]
    NoPositives,
    #[error("derivation log line {line}: {msg}")]
    Log { line: usize, msg: String },
}

impl Dag {
    pub fn new(problem: impl Into<String>) -> Self {
        Dag {
            problem: problem.into(),
            nodes: Vec::new(),
            selected: BTreeSet::new(),
            proof: None,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn push_initial(&mut self, tag: InitialTag, level: SineLevel) -> NodeId {
        let id = self.nodes.len() as NodeId;
        self.nodes.push(NodeLabel::Initial { tag, level });
        id
    }

    /// Appends a derived node; premises must already be present and the
    /// premise count must match the rule arity.
    pub fn push_derived(
        &mut self,
        rule: RuleId,
        premises: Vec<NodeId>,
    ) -> Result<NodeId, DagError> {
        let id = self.nodes.len() as NodeId;
        if premises.len() != rule.arity() {
            return Err(DagError::PremiseCount {
                rule,
                got: premises.len(),
                expected: rule.arity(),
            });
        }
        for &p in &premises {
            if p >= id {
                return Err(DagError::PremiseOrder {
                    node: id,
                    premise: p,
                });
            }
        }
        self.nodes.push(NodeLabel::Derived { rule, premises });
        Ok(id)
    }

    pub fn mark_selected(&mut self, id: NodeId) {
        debug_assert!((id as usize) < self.nodes.len());
        self.selected.insert(id);
    }

    /// Axiom names occurring among the initial nodes, deduplicated.
    pub fn axiom_names(&self) -> BTreeSet<&str> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                NodeLabel::Initial {
                    tag: InitialTag::Axiom(name),
                    ..
                } => Some(name.as_str()),
                _ => None,
            })
            .collect()
    }
}

/// Ancestor closure of `empty_clause`, inclusive.
pub fn extract_proof(dag: &Dag, empty_clause: NodeId) -> Result<BTreeSet<NodeId>, DagError> {
    if empty_clause as usize >= dag.nodes.len() {
        return Err(DagError::MissingNode(empty_clause));
    }
    let mut proof = BTreeSet::new();
    let mut stack = vec![empty_clause];
    while let Some(id) = stack.pop() {
        if !proof.insert(id) {
            continue;
        }
        if let NodeLabel::Derived { premises, .. } = &dag.nodes[id as usize] {
            stack.extend(premises.iter().copied());
        }
    }
    Ok(proof)
}

/// One clause's contribution to the loss.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainExample {
    pub node: NodeId,
    pub target: f64,
    pub weight: f64,
}

/// Labels the selected clauses of a proved derivation: positives are
/// the selected clauses on the proof (target 1.0), negatives the rest
/// (target 0.0). With `P` positives and `N` negatives each positive
/// weighs `1/(2P)` and each negative `1/(2N)`, so the whole DAG weighs
/// 1 and both classes contribute evenly; a missing class leaves the
/// other with weight `1/P` (resp. `1/N`).
pub fn label_dag(dag: &Dag) -> Result<Vec<TrainExample>, DagError> {
    let proof = dag.proof.as_ref().ok_or(DagError::NoProof)?;
    let positives: Vec<NodeId> = dag.selected.intersection(proof).copied().collect();
    let negatives: Vec<NodeId> = dag.selected.difference(proof).copied().collect();
    if positives.is_empty() {
        return Err(DagError::NoPositives);
    }
    let p = positives.len() as f64;
    let n = negatives.len() as f64;
    let (pos_weight, neg_weight) = if negatives.is_empty() {
        (1.0 / p, 0.0)
    } else {
        (1.0 / (2.0 * p), 1.0 / (2.0 * n))
    };
    let mut examples: Vec<TrainExample> = Vec::with_capacity(positives.len() + negatives.len());
    examples.extend(positives.iter().map(|&node| TrainExample {
        node,
        target: 1.0,
        weight: pos_weight,
    }));
    examples.extend(negatives.iter().map(|&node| TrainExample {
        node,
        target: 0.0,
        weight: neg_weight,
    }));
    examples.sort_by_key(|e| e.node);
    Ok(examples)
}
