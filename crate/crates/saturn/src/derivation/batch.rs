//! Merging derivation DAGs into training batches.
//!
//! Nodes that are indistinguishable from the network's point of view
//! are collapsed: one node for all conjecture leaves at one level, one
//! node for every clause derived from the same collapsed premises by
//! the same rule, and so on. Labels and weights of collapsed examples
//! merge so the batch loss equals the sum of the member losses.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::saturation::RuleId;
use crate::sine::SineLevel;

use super::{label_dag, Dag, DagError, InitialTag, NodeId, NodeLabel};

/// How initial tags and SInE levels enter the collapse key; derived
/// from the model configuration so that equal keys mean bit-identical
/// embeddings under any parameters.
#[derive(Clone, Debug, Default)]
pub struct CollapseParams {
    /// Revealed axiom names, each mapped to its embedding row.
    pub revealed: BTreeMap<String, u32>,
    /// Levels at or above the cap embed identically, as does UNREACHED.
    pub sine_cap: u32,
    /// With the SInE embedder disabled the level is ignored entirely.
    pub sine_enabled: bool,
}

impl CollapseParams {
    pub fn tag_of(&self, tag: &InitialTag) -> InitTag {
        match tag {
            InitialTag::Axiom(name) => match self.revealed.get(name) {
                Some(&idx) => InitTag::Named(idx),
                None => InitTag::Unknown,
            },
            InitialTag::Unknown => InitTag::Unknown,
            InitialTag::Goal => InitTag::Goal,
        }
    }

    /// The level as the embedder sees it: capped, with UNREACHED at the
    /// cap, and constant 0 when the embedder ignores levels.
    pub fn capped_level(&self, level: SineLevel) -> u32 {
        if !self.sine_enabled {
            return 0;
        }
        match level {
            SineLevel::Reached(l) => l.min(self.sine_cap),
            SineLevel::Unreached => self.sine_cap,
        }
    }
}

/// Initial tag after the revealed-axiom table is applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InitTag {
    Named(u32),
    Unknown,
    Goal,
}

/// A collapsed node. Premises are indices into the batch's node list.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BatchNode {
    Initial { tag: InitTag, capped_level: u32 },
    Derived { rule: RuleId, premises: Vec<usize> },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BatchExample {
    pub node: usize,
    pub target: f64,
    pub weight: f64,
}

/// A merged, collapsed multi-derivation DAG with per-node targets and
/// weights. Nodes are in topological order.
#[derive(Clone, Debug)]
pub struct Batch {
    pub nodes: Vec<BatchNode>,
    pub examples: Vec<BatchExample>,
    pub members: Vec<String>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Sum of example weights; equals the member count when every
    /// member carried DAG weight 1.
    pub fn total_weight(&self) -> f64 {
        self.examples.iter().map(|e| e.weight).sum()
    }
}

/// Ancestor closure of the selected set: the nodes that matter for
/// training. Retained-but-never-selected clauses carry no loss and feed
/// nothing, so they are left out of batches.
pub fn training_closure(dag: &Dag) -> BTreeSet<NodeId> {
    let mut closure = BTreeSet::new();
    let mut stack: Vec<NodeId> = dag.selected.iter().copied().collect();
    while let Some(id) = stack.pop() {
        if !closure.insert(id) {
            continue;
        }
        if let NodeLabel::Derived { premises, .. } = &dag.nodes[id as usize] {
            stack.extend(premises.iter().copied());
        }
    }
    closure
}

/// Merges labeled derivations into one batch: union of the DAGs with
/// indistinguishable nodes collapsed, and example labels merged by
/// `target = (t1*w1 + t2*w2) / (w1 + w2)`, `weight = w1 + w2`.
pub fn merge_batch(dags: &[&Dag], params: &CollapseParams) -> Result<Batch, DagError> {
    let mut nodes: Vec<BatchNode> = Vec::new();
    let mut interner: HashMap<BatchNode, usize> = HashMap::new();
    // per collapsed node: sum of target*weight and sum of weight
    let mut label_sums: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
    let mut members = Vec::with_capacity(dags.len());

    for dag in dags {
        let examples = label_dag(dag)?;
        let closure = training_closure(dag);
        let mut to_batch: HashMap<NodeId, usize> = HashMap::new();
        for &id in &closure {
            let key = match &dag.nodes[id as usize] {
                NodeLabel::Initial { tag, level } => BatchNode::Initial {
                    tag: params.tag_of(tag),
                    capped_level: params.capped_level(*level),
                },
                NodeLabel::Derived { rule, premises } => BatchNode::Derived {
                    rule: *rule,
                    premises: premises.iter().map(|p| to_batch[p]).collect(),
                },
            };
            let idx = *interner.entry(key.clone()).or_insert_with(|| {
                nodes.push(key);
                nodes.len() - 1
            });
            to_batch.insert(id, idx);
        }
        for example in examples {
            let idx = to_batch[&example.node];
            let entry = label_sums.entry(idx).or_insert((0.0, 0.0));
            entry.0 += example.target * example.weight;
            entry.1 += example.weight;
        }
        members.push(dag.problem.clone());
    }

    let examples = label_sums
        .into_iter()
        .map(|(node, (tw, w))| BatchExample {
            node,
            target: tw / w,
            weight: w,
        })
        .collect();
    Ok(Batch {
        nodes,
        examples,
        members,
    })
}

/// Structural union of raw DAGs, collapsing nodes with equal initial
/// tags and levels or equal (rule, premises). Selected sets union;
/// proofs union, so merging a proved run with a failed one keeps the
/// proved run's labels and turns the failed run's selections into
/// negatives.
pub fn merge_dags(dags: &[&Dag], problem: impl Into<String>) -> Dag {
    let mut merged = Dag::new(problem);
    let mut interner: HashMap<NodeLabel, NodeId> = HashMap::new();
    let mut proof: BTreeSet<NodeId> = BTreeSet::new();
    let mut any_proof = false;

    for dag in dags {
        let mut to_merged: HashMap<NodeId, NodeId> = HashMap::new();
        for (id, node) in dag.nodes.iter().enumerate() {
            let id = id as NodeId;
            let key = match node {
                NodeLabel::Initial { .. } => node.clone(),
                NodeLabel::Derived { rule, premises } => NodeLabel::Derived {
                    rule: *rule,
                    premises: premises.iter().map(|p| to_merged[p]).collect(),
                },
            };
            let merged_id = match interner.get(&key) {
                Some(&m) => m,
                None => {
                    let m = merged.nodes.len() as NodeId;
                    merged.nodes.push(key.clone());
                    interner.insert(key, m);
                    m
                }
            };
            to_merged.insert(id, merged_id);
        }
        for &id in &dag.selected {
            merged.selected.insert(to_merged[&id]);
        }
        if let Some(p) = &dag.proof {
            any_proof = true;
            proof.extend(p.iter().map(|id| to_merged[id]));
        }
    }
    if any_proof {
        merged.proof = Some(proof);
    }
    merged
}

/// Greedy packing of labeled DAGs into batches of roughly
/// `target_nodes` training-relevant nodes. DAGs are taken in
/// descending size order; each batch starts with the largest unplaced
/// DAG and absorbs any later DAG while the size sum stays strictly
/// under the target. A DAG at or above the target forms a singleton
/// batch.
pub fn build_batches(
    dags: &[Dag],
    target_nodes: usize,
    params: &CollapseParams,
) -> Result<Vec<Batch>, DagError> {
    let mut order: Vec<(usize, usize)> = dags
        .iter()
        .enumerate()
        .map(|(i, dag)| (i, training_closure(dag).len()))
        .collect();
    order.sort_by(|a, b| {
        b.1.cmp(&a.1)
            .then_with(|| dags[a.0].problem.cmp(&dags[b.0].problem))
            .then_with(|| a.0.cmp(&b.0))
    });

    let mut placed = vec![false; dags.len()];
    let mut batches = Vec::new();
    for first in 0..order.len() {
        let (i, size) = order[first];
        if placed[i] {
            continue;
        }
        placed[i] = true;
        let mut group = vec![i];
        let mut sum = size;
        for &(j, jsize) in &order[first + 1..] {
            if placed[j] || sum + jsize >= target_nodes {
                continue;
            }
            placed[j] = true;
            group.push(j);
            sum += jsize;
        }
        let refs: Vec<&Dag> = group.iter().map(|&k| &dags[k]).collect();
        batches.push(merge_batch(&refs, params)?);
    }
    Ok(batches)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::extract_proof;

    fn params() -> CollapseParams {
        CollapseParams {
            revealed: BTreeMap::from([("ax0".to_owned(), 0), ("ax1".to_owned(), 1)]),
            sine_cap: 16,
            sine_enabled: true,
        }
    }

    /// A dag with three proof nodes (two initials and their resolvent)
    /// plus `extra` selected Unknown leaves as negatives; its training
    /// closure has exactly `3 + extra` nodes.
    fn dag_sized(name: &str, extra: usize) -> Dag {
        let mut dag = Dag::new(name);
        let a = dag.push_initial(InitialTag::Axiom("ax0".into()), SineLevel::Reached(1));
        let g = dag.push_initial(InitialTag::Goal, SineLevel::Reached(0));
        let r = dag.push_derived(RuleId::Resolution, vec![a, g]).unwrap();
        dag.mark_selected(r);
        dag.proof = Some(extract_proof(&dag, r).unwrap());
        for k in 0..extra {
            let leaf = dag.push_initial(
                InitialTag::Axiom(format!("{name}_junk{k}")),
                SineLevel::Unreached,
            );
            dag.mark_selected(leaf);
        }
        dag
    }

    #[test]
    fn goal_leaves_collapse_across_derivations() {
        let d1 = dag_sized("p1", 0);
        let d2 = dag_sized("p2", 0);
        let batch = merge_batch(&[&d1, &d2], &params()).unwrap();
        // both dags are structurally identical: one Goal leaf, one
        // Named(0) leaf, one resolution node
        assert_eq!(batch.len(), 3);
        assert_eq!(batch.members, vec!["p1".to_owned(), "p2".to_owned()]);
    }

    #[test]
    fn same_premises_different_rule_stay_distinct() {
        let mut dag = Dag::new("t");
        let a = dag.push_initial(InitialTag::Goal, SineLevel::Reached(0));
        let b = dag.push_initial(InitialTag::Axiom("ax0".into()), SineLevel::Reached(1));
        let r1 = dag.push_derived(RuleId::Resolution, vec![a, b]).unwrap();
        let r2 = dag
            .push_derived(RuleId::SubsumptionResolution, vec![a, b])
            .unwrap();
        dag.mark_selected(r1);
        dag.mark_selected(r2);
        dag.proof = Some(extract_proof(&dag, r1).unwrap());
        let batch = merge_batch(&[&dag], &params()).unwrap();
        assert_eq!(batch.len(), 4);
    }

    #[test]
    fn unknown_axioms_share_a_leaf_but_levels_split() {
        let mut dag = Dag::new("t");
        // two axioms outside the revealed table at the same level
        let u1 = dag.push_initial(InitialTag::Axiom("junk_a".into()), SineLevel::Reached(3));
        let u2 = dag.push_initial(InitialTag::Axiom("junk_b".into()), SineLevel::Reached(3));
        // same tag, different level
        let u3 = dag.push_initial(InitialTag::Axiom("junk_c".into()), SineLevel::Reached(4));
        // levels at or above the cap merge, and UNREACHED joins them
        let u4 = dag.push_initial(InitialTag::Axiom("junk_d".into()), SineLevel::Reached(20));
        let u5 = dag.push_initial(InitialTag::Axiom("junk_e".into()), SineLevel::Unreached);
        for id in [u1, u2, u3, u4, u5] {
            dag.mark_selected(id);
        }
        dag.proof = Some(BTreeSet::from([u1]));
        let batch = merge_batch(&[&dag], &params()).unwrap();
        // {Unknown,3} once, {Unknown,4}, {Unknown,16} once
        assert_eq!(batch.len(), 3);
    }

    #[test]
    fn footnote_label_merge_arithmetic() {
        // one node positive (1.0, 0.3) in dag1 and negative (0.0, 0.1)
        // in dag2 merges to label 0.75, weight 0.4; engineered through
        // the class weights: dag1 has P=1,N... use explicit sums
        let mut sums = BTreeMap::from([(0usize, (0.0f64, 0.0f64))]);
        for (target, weight) in [(1.0, 0.3), (0.0, 0.1)] {
            let e = sums.get_mut(&0).unwrap();
            e.0 += target * weight;
            e.1 += weight;
        }
        let (tw, w) = sums[&0];
        assert!((tw / w - 0.75).abs() < 1e-15);
        assert!((w - 0.4).abs() < 1e-15);
    }

    #[test]
    fn merging_a_dag_with_itself_doubles_weights_only() {
        let dag = dag_sized("p", 2);
        let single = merge_batch(&[&dag], &params()).unwrap();
        let double = merge_batch(&[&dag, &dag], &params()).unwrap();
        assert_eq!(single.len(), double.len());
        assert_eq!(single.examples.len(), double.examples.len());
        for (a, b) in single.examples.iter().zip(&double.examples) {
            assert_eq!(a.node, b.node);
            assert_eq!(a.target, b.target);
            assert!((b.weight - 2.0 * a.weight).abs() < 1e-15);
        }
    }

    #[test]
    fn disjoint_derivations_share_only_common_leaves() {
        // same structure but junk axioms named differently per dag:
        // only Goal and the Named(0) leaf and the resolvent collapse
        let d1 = dag_sized("p1", 2);
        let d2 = dag_sized("p2", 2);
        let batch = merge_batch(&[&d1, &d2], &params()).unwrap();
        // each dag: 5 closure nodes; shared: goal, named, resolvent;
        // junk leaves of both dags map to Unknown/Unreached and thus
        // collapse with each other too: 3 shared + 1 unknown leaf
        assert_eq!(batch.len(), 4);
        // total weight is one per member derivation
        assert!((batch.total_weight() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn greedy_packing_follows_the_stated_rule() {
        let sizes = [15usize, 6, 5, 4];
        let dags: Vec<Dag> = sizes
            .iter()
            .enumerate()
            .map(|(i, &s)| dag_sized(&format!("d{i}_{s}"), s - 3))
            .collect();
        let batches = build_batches(&dags, 20, &params()).unwrap();
        assert_eq!(batches.len(), 2);
        assert_eq!(batches[0].members, vec!["d0_15".to_owned(), "d3_4".to_owned()]);
        assert_eq!(batches[1].members, vec!["d1_6".to_owned(), "d2_5".to_owned()]);
    }

    #[test]
    fn oversized_dag_forms_a_singleton() {
        let dags = vec![dag_sized("big", 240), dag_sized("small", 1)];
        let batches = build_batches(&dags, 100, &params()).unwrap();
        assert_eq!(batches.len(), 2);
        assert_eq!(batches[0].members, vec!["big".to_owned()]);
    }

    #[test]
    fn empty_input_gives_no_batches() {
        let batches = build_batches(&[], 100, &params()).unwrap();
        assert!(batches.is_empty());
    }

    #[test]
    fn merge_against_pairwise_oracle() {
        // oracle: label each dag, key every node by a recursive string,
        // and fold the footnote formula pairwise over the members
        fn string_keys(dag: &Dag, params: &CollapseParams) -> Vec<String> {
            let mut keys: Vec<String> = Vec::with_capacity(dag.len());
            for node in &dag.nodes {
                let key = match node {
                    NodeLabel::Initial { tag, level } => format!(
                        "i:{:?}:{}",
                        params.tag_of(tag),
                        params.capped_level(*level)
                    ),
                    NodeLabel::Derived { rule, premises } => {
                        let inner: Vec<&str> =
                            premises.iter().map(|p| keys[*p as usize].as_str()).collect();
                        format!("d:{}({})", rule.code(), inner.join(","))
                    }
                };
                keys.push(key);
            }
            keys
        }

        let dags = [dag_sized("a", 3), dag_sized("b", 1), dag_sized("c", 0)];
        let p = params();

        let mut oracle: BTreeMap<String, (f64, f64)> = BTreeMap::new();
        for dag in &dags {
            let keys = string_keys(dag, &p);
            for example in label_dag(dag).unwrap() {
                let entry = oracle
                    .entry(keys[example.node as usize].clone())
                    .or_insert((0.0, 0.0));
                // pairwise fold of (label, weight) with the running value
                let (t_old, w_old) = *entry;
                let w_new = w_old + example.weight;
                let t_new = (t_old * w_old + example.target * example.weight) / w_new;
                *entry = (t_new, w_new);
            }
        }

        let refs: Vec<&Dag> = dags.iter().collect();
        let batch = merge_batch(&refs, &p).unwrap();
        let batch_keys = {
            // rebuild string keys for batch nodes
            let mut keys: Vec<String> = Vec::with_capacity(batch.len());
            for node in &batch.nodes {
                let key = match node {
                    BatchNode::Initial { tag, capped_level } => {
                        format!("i:{tag:?}:{capped_level}")
                    }
                    BatchNode::Derived { rule, premises } => {
                        let inner: Vec<&str> =
                            premises.iter().map(|p| keys[*p].as_str()).collect();
                        format!("d:{}({})", rule.code(), inner.join(","))
                    }
                };
                keys.push(key);
            }
            keys
        };

        assert_eq!(batch.examples.len(), oracle.len());
        for example in &batch.examples {
            let (t, w) = oracle[&batch_keys[example.node]];
            assert!((example.target - t).abs() <= 1e-12);
            assert!((example.weight - w).abs() <= 1e-12);
        }
    }

    #[test]
    fn raw_merge_unions_selected_and_keeps_the_proof() {
        let mut guided = dag_sized("p", 1);
        let mut failed = Dag::new("p");
        // failed run touches the same initial clauses but proves nothing
        let a = failed.push_initial(InitialTag::Axiom("ax0".into()), SineLevel::Reached(1));
        let g = failed.push_initial(InitialTag::Goal, SineLevel::Reached(0));
        let r = failed.push_derived(RuleId::Resolution, vec![a, g]).unwrap();
        let junk = failed.push_initial(InitialTag::Axiom("other".into()), SineLevel::Unreached);
        let j2 = failed
            .push_derived(RuleId::Resolution, vec![junk, r])
            .unwrap();
        failed.mark_selected(a);
        failed.mark_selected(r);
        failed.mark_selected(j2);

        guided.mark_selected(0);
        let merged = merge_dags(&[&guided, &failed], "p");
        // shared: ax0, goal, res(ax0,goal); new: guided junk leaf,
        // failed junk leaf, failed second resolution
        assert_eq!(merged.len(), 6);
        let proof = merged.proof.as_ref().unwrap();
        assert_eq!(proof.len(), 3);
        // selected: union; the failed run's extra selections become
        // negatives under label_dag
        let examples = label_dag(&merged).unwrap();
        let negatives = examples.iter().filter(|e| e.target == 0.0).count();
        let positives = examples.iter().filter(|e| e.target == 1.0).count();
        assert_eq!(positives, 2); // ax0 and the shared resolvent
        assert_eq!(negatives, 2); // guided junk leaf and failed j2
    }
}

#[cfg(test)]
mod collapse_model_tests {
    //! Collapse correctness against an independent route: a naive
    //! per-node recursive evaluator over the raw DAG. Two nodes share a
    //! batch slot iff their recursive evaluations are bit-identical.

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::derivation::{extract_proof, Dag, InitialTag, NodeId};
    use crate::model::{
        embed_derived, embed_initial, evaluate, ModelConfig, ModelParams,
    };
    use crate::saturation::RuleId;
    use crate::sine::SineLevel;

    fn random_dag(seed: u64, nodes: usize) -> Dag {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut dag = Dag::new(format!("r{seed}"));
        for i in 0..nodes {
            if i == 0 || rng.gen_bool(0.4) {
                let tag = match rng.gen_range(0..4) {
                    0 => InitialTag::Goal,
                    1 => InitialTag::Unknown,
                    _ => InitialTag::Axiom(format!("ax{}", rng.gen_range(0..4))),
                };
                let level = if rng.gen_bool(0.15) {
                    SineLevel::Unreached
                } else {
                    SineLevel::Reached(rng.gen_range(0..20))
                };
                dag.push_initial(tag, level);
            } else {
                let rule = RuleId::ALL[rng.gen_range(0..3)];
                let premises = (0..rule.arity())
                    .map(|_| rng.gen_range(0..i as NodeId))
                    .collect();
                dag.push_derived(rule, premises).unwrap();
            }
            if rng.gen_bool(0.5) {
                dag.mark_selected((i as NodeId).min(rng.gen_range(0..=i as NodeId)));
            }
        }
        let last = (dag.len() - 1) as NodeId;
        dag.mark_selected(last);
        dag.proof = Some(extract_proof(&dag, last).unwrap());
        dag
    }

    fn naive_eval(
        dag: &Dag,
        node: NodeId,
        params: &ModelParams,
        config: &ModelConfig,
        collapse: &CollapseParams,
    ) -> ndarray::Array1<f64> {
        match &dag.nodes[node as usize] {
            NodeLabel::Initial { tag, level } => embed_initial(
                collapse.tag_of(tag),
                collapse.capped_level(*level),
                params,
                config,
            )
            .unwrap(),
            NodeLabel::Derived { rule, premises } => {
                let vs: Vec<_> = premises
                    .iter()
                    .map(|&p| naive_eval(dag, p, params, config, collapse))
                    .collect();
                embed_derived(*rule, &vs, params, config, false).unwrap()
            }
        }
    }

    #[test]
    fn shared_batch_slot_iff_bit_identical_embeddings() {
        let mut config = ModelConfig::new(8, (0..4).map(|i| format!("ax{i}")).collect());
        config.sine_cap = 16;
        let collapse = config.collapse_params();
        for seed in 0..5u64 {
            let params = ModelParams::init(&config, seed + 50);
            let d1 = random_dag(seed * 2, 30);
            let d2 = random_dag(seed * 2 + 1, 30);
            let batch = merge_batch(&[&d1, &d2], &collapse).unwrap();

            // recover each dag node's batch slot the way merge does
            let slot_maps: Vec<std::collections::HashMap<NodeId, usize>> = [&d1, &d2]
                .iter()
                .map(|dag| {
                    let interner: std::collections::HashMap<BatchNode, usize> = batch
                        .nodes
                        .iter()
                        .enumerate()
                        .map(|(i, n)| (n.clone(), i))
                        .collect();
                    let mut map = std::collections::HashMap::new();
                    for &id in &training_closure(dag) {
                        let key = match &dag.nodes[id as usize] {
                            NodeLabel::Initial { tag, level } => BatchNode::Initial {
                                tag: collapse.tag_of(tag),
                                capped_level: collapse.capped_level(*level),
                            },
                            NodeLabel::Derived { rule, premises } => BatchNode::Derived {
                                rule: *rule,
                                premises: premises.iter().map(|p| map[p]).collect(),
                            },
                        };
                        map.insert(id, interner[&key]);
                    }
                    map
                })
                .collect();

            // batch forward must agree with the naive recursion, and
            // slot sharing must coincide with bit-identical embeddings
            let fwd = crate::model::forward_batch(&batch, &params, &config, None).unwrap();
            let mut evaluated: Vec<(usize, ndarray::Array1<f64>)> = Vec::new();
            for (dag, slots) in [&d1, &d2].iter().zip(&slot_maps) {
                for (&id, &slot) in slots.iter() {
                    let naive = naive_eval(dag, id, &params, &config, &collapse);
                    assert_eq!(
                        fwd.value[slot], naive,
                        "batch and recursive evaluation disagree"
                    );
                    assert_eq!(
                        evaluate(&fwd.value[slot], &params),
                        evaluate(&naive, &params)
                    );
                    evaluated.push((slot, naive));
                }
            }
            // shared slot implies bit-identical value; distinct values
            // force distinct slots (distinct keys may still collide at
            // one particular parameter draw, e.g. on the zero vector
            // after relu, so the converse is not asserted pointwise)
            for (slot_a, val_a) in &evaluated {
                for (slot_b, val_b) in &evaluated {
                    if slot_a == slot_b {
                        assert_eq!(val_a, val_b, "one slot, two values");
                    }
                }
            }
            let closure_total = training_closure(&d1).len() + training_closure(&d2).len();
            assert!(
                batch.len() < closure_total,
                "merging two 30-node dags should collapse something"
            );
        }
    }
}
