//! The recursive clause-derivation classifier: learnable init
//! embeddings (one per revealed axiom plus Unknown and Goal), a SInE
//! embedder mixing the level into every leaf, one deriv block per
//! inference rule with generic per-arity fallbacks, and a two-layer
//! eval head producing a single logit. Classification is `score >= 0`.

mod guide;
mod io;

pub use guide::{AblationMode, Guide};
pub use io::{load_model, save_model, ModelIoError};

use ndarray::{concatenate, Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::derivation::{Batch, BatchNode, CollapseParams, InitTag};
use crate::saturation::RuleId;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("named axiom index {index} out of range (m = {m})")]
    NamedIndexOutOfRange { index: u32, m: usize },
    #[error("rule `{0}` unknown to this model; retrain it or use the generic blocks")]
    UnknownRule(RuleId),
    #[error("no generic block for arity {0} in this model")]
    NoGenericArity(usize),
    #[error("model was trained without swapout; generic deriv blocks are untrained")]
    NoGenericBlocks,
    #[error("model file: {0}")]
    Format(String),
    #[error("unsupported model file version {0}")]
    Version(u32),
}

/// Everything about a model except the learned numbers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelConfig {
    /// Embedding dimension.
    pub n: usize,
    /// Revealed axiom names in embedding-row order; everything else
    /// embeds as Unknown.
    pub revealed_axioms: Vec<String>,
    /// Rules with dedicated deriv blocks.
    pub rules: Vec<RuleId>,
    /// Levels at or above the cap (and UNREACHED) embed identically.
    pub sine_cap: u32,
    /// Feed SInE levels through the embedder at all.
    pub sine_enabled: bool,
    /// Generic per-arity blocks were trained (swapout was on).
    pub has_generic: bool,
}

impl ModelConfig {
    pub fn new(n: usize, revealed_axioms: Vec<String>) -> Self {
        ModelConfig {
            n,
            revealed_axioms,
            rules: RuleId::ALL.to_vec(),
            sine_cap: 16,
            sine_enabled: true,
            has_generic: false,
        }
    }

    /// Number of revealed axioms.
    pub fn m(&self) -> usize {
        self.revealed_axioms.len()
    }

    pub fn rule_index(&self, rule: RuleId) -> Option<usize> {
        self.rules.iter().position(|&r| r == rule)
    }

    /// Distinct rule arities, ascending; one generic block each.
    pub fn distinct_arities(&self) -> Vec<usize> {
        let mut arities: Vec<usize> = self.rules.iter().map(|r| r.arity()).collect();
        arities.sort_unstable();
        arities.dedup();
        arities
    }

    pub fn collapse_params(&self) -> CollapseParams {
        CollapseParams {
            revealed: self
                .revealed_axioms
                .iter()
                .enumerate()
                .map(|(i, name)| (name.clone(), i as u32))
                .collect(),
            sine_cap: self.sine_cap,
            sine_enabled: self.sine_enabled,
        }
    }

    /// Level scaled into [0, 1]; UNREACHED and anything at or above the
    /// cap map to 1.0.
    pub fn phi(&self, capped_level: u32) -> f64 {
        debug_assert!(self.sine_cap > 0);
        f64::from(capped_level.min(self.sine_cap)) / f64::from(self.sine_cap)
    }

    fn block_shape(&self, arity: usize) -> (usize, usize) {
        if arity == 1 {
            (self.n, self.n)
        } else {
            (self.n, 2 * self.n)
        }
    }

    /// Exact number of scalar parameters.
    pub fn param_count(&self) -> usize {
        let n = self.n;
        let mut count = (self.m() + 2) * n; // init embeddings
        count += n * (n + 1) + n; // SInE embedder
        for rule in &self.rules {
            let (r, c) = self.block_shape(rule.arity());
            count += r * c + r;
        }
        for &arity in &self.distinct_arities() {
            let (r, c) = self.block_shape(arity);
            count += r * c + r;
        }
        count += n * n + n; // eval hidden
        count += n + 1; // eval output
        count
    }
}

/// One affine layer.
#[derive(Clone, Debug, PartialEq)]
pub struct Affine {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Affine {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Affine {
            w: Array2::zeros((rows, cols)),
            b: Array1::zeros(rows),
        }
    }

    pub fn apply(&self, x: &Array1<f64>) -> Array1<f64> {
        self.w.dot(x) + &self.b
    }

    pub fn len(&self) -> usize {
        self.w.len() + self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// All learnable tensors. Shapes are fixed by the [`ModelConfig`] the
/// parameters were created for; the same struct doubles as the
/// gradient container since gradients share every shape.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    /// `(m+2) x n`; row `m` is Unknown, row `m+1` is Goal.
    pub init_embeddings: Array2<f64>,
    /// `n x (n+1)` + bias: acts on `[embedding ; phi(level)]`.
    pub sine: Affine,
    /// One block per `config.rules` entry.
    pub rule_blocks: Vec<Affine>,
    /// One block per distinct arity, ascending.
    pub generic_blocks: Vec<Affine>,
    /// First eval layer, `n x n`.
    pub eval_hidden: Affine,
    /// Output row and bias producing the logit.
    pub eval_out_w: Array1<f64>,
    pub eval_out_b: f64,
}

pub type ModelGrad = ModelParams;

fn relu(x: &Array1<f64>) -> Array1<f64> {
    x.mapv(|v| v.max(0.0))
}

impl ModelParams {
    /// Zero tensors in the shapes `config` dictates.
    pub fn zeros(config: &ModelConfig) -> Self {
        let n = config.n;
        let block = |arity: usize| {
            let (r, c) = config.block_shape(arity);
            Affine::zeros(r, c)
        };
        ModelParams {
            init_embeddings: Array2::zeros((config.m() + 2, n)),
            sine: Affine::zeros(n, n + 1),
            rule_blocks: config.rules.iter().map(|r| block(r.arity())).collect(),
            generic_blocks: config
                .distinct_arities()
                .iter()
                .map(|&a| block(a))
                .collect(),
            eval_hidden: Affine::zeros(n, n),
            eval_out_w: Array1::zeros(n),
            eval_out_b: 0.0,
        }
    }

    /// Seeded initialization: embeddings are standard normal scaled by
    /// `1/sqrt(n)`, every matrix and bias entry uniform in
    /// `[-1/sqrt(n), 1/sqrt(n)]`.
    pub fn init(config: &ModelConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = config.n;
        let scale = 1.0 / (n as f64).sqrt();
        let mut params = Self::zeros(config);
        for v in params.init_embeddings.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *v = z * scale;
        }
        let mut uniform = |a: &mut Affine| {
            for v in a.w.iter_mut() {
                *v = rng.gen_range(-scale..scale);
            }
            for v in a.b.iter_mut() {
                *v = rng.gen_range(-scale..scale);
            }
        };
        uniform(&mut params.sine);
        for block in &mut params.rule_blocks {
            uniform(block);
        }
        for block in &mut params.generic_blocks {
            uniform(block);
        }
        uniform(&mut params.eval_hidden);
        for v in params.eval_out_w.iter_mut() {
            *v = rng.gen_range(-scale..scale);
        }
        params.eval_out_b = rng.gen_range(-scale..scale);
        params
    }

    pub fn param_count(&self) -> usize {
        self.init_embeddings.len()
            + self.sine.len()
            + self.rule_blocks.iter().map(Affine::len).sum::<usize>()
            + self.generic_blocks.iter().map(Affine::len).sum::<usize>()
            + self.eval_hidden.len()
            + self.eval_out_w.len()
            + 1
    }

    /// `self += factor * other`, used for gradient steps and gradient
    /// accumulation.
    pub fn add_scaled(&mut self, other: &ModelParams, factor: f64) {
        self.init_embeddings
            .scaled_add(factor, &other.init_embeddings);
        self.sine.w.scaled_add(factor, &other.sine.w);
        self.sine.b.scaled_add(factor, &other.sine.b);
        for (a, b) in self.rule_blocks.iter_mut().zip(&other.rule_blocks) {
            a.w.scaled_add(factor, &b.w);
            a.b.scaled_add(factor, &b.b);
        }
        for (a, b) in self.generic_blocks.iter_mut().zip(&other.generic_blocks) {
            a.w.scaled_add(factor, &b.w);
            a.b.scaled_add(factor, &b.b);
        }
        self.eval_hidden.w.scaled_add(factor, &other.eval_hidden.w);
        self.eval_hidden.b.scaled_add(factor, &other.eval_hidden.b);
        self.eval_out_w.scaled_add(factor, &other.eval_out_w);
        self.eval_out_b += factor * other.eval_out_b;
    }

    /// Name of the first parameter block containing a non-finite entry.
    pub fn first_non_finite_block(&self) -> Option<String> {
        fn bad<'a>(mut it: impl Iterator<Item = &'a f64>) -> bool {
            it.any(|v| !v.is_finite())
        }
        if bad(self.init_embeddings.iter()) {
            return Some("theta_I".to_owned());
        }
        if bad(self.sine.w.iter().chain(self.sine.b.iter())) {
            return Some("theta_S".to_owned());
        }
        for (i, a) in self.rule_blocks.iter().enumerate() {
            if bad(a.w.iter().chain(a.b.iter())) {
                return Some(format!("theta_D[{i}]"));
            }
        }
        for (i, a) in self.generic_blocks.iter().enumerate() {
            if bad(a.w.iter().chain(a.b.iter())) {
                return Some(format!("theta_D_generic[{i}]"));
            }
        }
        if bad(self.eval_hidden.w.iter().chain(self.eval_hidden.b.iter()))
            || bad(self.eval_out_w.iter())
            || !self.eval_out_b.is_finite()
        {
            return Some("theta_E".to_owned());
        }
        None
    }
}

fn init_row(config: &ModelConfig, tag: InitTag) -> Result<usize, ModelError> {
    match tag {
        InitTag::Named(i) => {
            if (i as usize) < config.m() {
                Ok(i as usize)
            } else {
                Err(ModelError::NamedIndexOutOfRange {
                    index: i,
                    m: config.m(),
                })
            }
        }
        InitTag::Unknown => Ok(config.m()),
        InitTag::Goal => Ok(config.m() + 1),
    }
}

/// Embedding of an initial clause: the tag's base embedding passed
/// through the SInE embedder together with the scaled level. With the
/// embedder disabled the base embedding is returned as is.
pub fn embed_initial(
    tag: InitTag,
    capped_level: u32,
    params: &ModelParams,
    config: &ModelConfig,
) -> Result<Array1<f64>, ModelError> {
    let row = init_row(config, tag)?;
    let base = params.init_embeddings.row(row);
    if !config.sine_enabled {
        return Ok(base.to_owned());
    }
    let mut input = Array1::zeros(config.n + 1);
    input.slice_mut(ndarray::s![..config.n]).assign(&base);
    input[config.n] = config.phi(capped_level);
    Ok(relu(&params.sine.apply(&input)))
}

fn derived_block<'p>(
    rule: RuleId,
    use_generic: bool,
    params: &'p ModelParams,
    config: &ModelConfig,
) -> Result<&'p Affine, ModelError> {
    if use_generic {
        let arity = rule.arity();
        let idx = config
            .distinct_arities()
            .iter()
            .position(|&a| a == arity)
            .ok_or(ModelError::NoGenericArity(arity))?;
        Ok(&params.generic_blocks[idx])
    } else {
        let idx = config
            .rule_index(rule)
            .ok_or(ModelError::UnknownRule(rule))?;
        Ok(&params.rule_blocks[idx])
    }
}

/// Embedding of a derived clause from its premise embeddings. One
/// premise applies the rule's unary block; two concatenate into the
/// binary block; three or more left-fold the binary block:
/// `D(..D(D(v1,v2),v3).., vk)`.
pub fn embed_derived(
    rule: RuleId,
    premises: &[Array1<f64>],
    params: &ModelParams,
    config: &ModelConfig,
    use_generic: bool,
) -> Result<Array1<f64>, ModelError> {
    assert!(!premises.is_empty(), "deriv needs at least one premise");
    let block = derived_block(rule, use_generic, params, config)?;
    if premises.len() == 1 {
        debug_assert_eq!(block.w.ncols(), config.n, "unary rule with one premise");
        return Ok(relu(&block.apply(&premises[0])));
    }
    debug_assert_eq!(block.w.ncols(), 2 * config.n, "binary block expected");
    let mut acc = relu(&block.apply(&concatenate![
        Axis(0),
        premises[0].view(),
        premises[1].view()
    ]));
    for premise in &premises[2..] {
        acc = relu(&block.apply(&concatenate![Axis(0), acc.view(), premise.view()]));
    }
    Ok(acc)
}

/// The eval head: a single logit. Classification is `score >= 0`, the
/// boundary counting as positive.
pub fn evaluate(v: &Array1<f64>, params: &ModelParams) -> f64 {
    let hidden = relu(&params.eval_hidden.apply(v));
    params.eval_out_w.dot(&hidden) + params.eval_out_b
}

pub fn classify(score: f64) -> bool {
    score >= 0.0
}

/// Forward pass over a collapsed batch: per-node pre-activations and
/// values, plus head intermediates for every example.
#[derive(Clone, Debug)]
pub struct BatchForward {
    /// Pre-relu activations; for initial nodes with the embedder off
    /// this equals the value (no nonlinearity was applied).
    pub pre: Vec<Array1<f64>>,
    pub value: Vec<Array1<f64>>,
    /// Aligned with `batch.examples`.
    pub head: Vec<HeadForward>,
}

impl BatchForward {
    /// Score of any node, not just the examples.
    pub fn score(&self, node: usize, params: &ModelParams) -> f64 {
        evaluate(&self.value[node], params)
    }
}

#[derive(Clone, Debug)]
pub struct HeadForward {
    pub hidden_pre: Array1<f64>,
    pub hidden: Array1<f64>,
    pub score: f64,
}

/// Single bottom-up pass; every collapsed node is computed exactly
/// once. `swap` marks derived nodes whose rule block is replaced by the
/// generic per-arity block (swapout).
pub fn forward_batch(
    batch: &Batch,
    params: &ModelParams,
    config: &ModelConfig,
    swap: Option<&[bool]>,
) -> Result<BatchForward, ModelError> {
    let mut pre: Vec<Array1<f64>> = Vec::with_capacity(batch.len());
    let mut value: Vec<Array1<f64>> = Vec::with_capacity(batch.len());
    for (idx, node) in batch.nodes.iter().enumerate() {
        let (z, v) = match node {
            BatchNode::Initial { tag, capped_level } => {
                let row = init_row(config, *tag)?;
                let base = params.init_embeddings.row(row);
                if config.sine_enabled {
                    let mut input = Array1::zeros(config.n + 1);
                    input.slice_mut(ndarray::s![..config.n]).assign(&base);
                    input[config.n] = config.phi(*capped_level);
                    let z = params.sine.apply(&input);
                    let v = relu(&z);
                    (z, v)
                } else {
                    let z = base.to_owned();
                    (z.clone(), z)
                }
            }
            BatchNode::Derived { rule, premises } => {
                debug_assert!(
                    premises.len() <= 2,
                    "no rule declares arity above two; folds never reach batches"
                );
                let use_generic = swap.is_some_and(|s| s[idx]);
                let block = derived_block(*rule, use_generic, params, config)?;
                let z = if premises.len() == 1 {
                    block.apply(&value[premises[0]])
                } else {
                    block.apply(&concatenate![
                        Axis(0),
                        value[premises[0]].view(),
                        value[premises[1]].view()
                    ])
                };
                let v = relu(&z);
                (z, v)
            }
        };
        pre.push(z);
        value.push(v);
    }
    let head = batch
        .examples
        .iter()
        .map(|e| {
            let hidden_pre = params.eval_hidden.apply(&value[e.node]);
            let hidden = relu(&hidden_pre);
            let score = params.eval_out_w.dot(&hidden) + params.eval_out_b;
            HeadForward {
                hidden_pre,
                hidden,
                score,
            }
        })
        .collect();
    Ok(BatchForward { pre, value, head })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::BatchExample;

    fn config(n: usize, m: usize) -> ModelConfig {
        ModelConfig::new(n, (0..m).map(|i| format!("ax{i}")).collect())
    }

    #[test]
    fn parameter_count_formula_is_exact() {
        let cfg = config(8, 5);
        let params = ModelParams::init(&cfg, 7);
        // (m+2)n + [n(n+1)+n] + blocks + generics + head
        // = 56 + 80 + (136 + 72 + 136) + (72 + 136) + (72 + 8) + 9
        assert_eq!(cfg.param_count(), 769);
        assert_eq!(params.param_count(), cfg.param_count());
    }

    #[test]
    fn large_configuration_parameter_count() {
        // n = 128, m = 1000 lands in the hundreds of thousands of
        // parameters, a few megabytes of 64-bit floats
        let cfg = config(128, 1000);
        let count = cfg.param_count();
        assert!((1e5..1e7).contains(&(count as f64)), "count {count}");
    }

    #[test]
    fn goal_tag_embeds_from_the_goal_row() {
        let cfg = config(4, 2);
        let mut params = ModelParams::zeros(&cfg);
        // pass-through embedder: W_S = [I | 0], b = 0, and nonnegative
        // base embeddings so relu is the identity
        for i in 0..cfg.n {
            params.sine.w[[i, i]] = 1.0;
        }
        for v in params.init_embeddings.iter_mut() {
            *v = 0.25;
        }
        params.init_embeddings[[cfg.m() + 1, 0]] = 0.75; // goal row marker
        let v = embed_initial(InitTag::Goal, 0, &params, &cfg).unwrap();
        assert_eq!(v[0], 0.75);
        // with the identity configuration the level has no influence
        let v2 = embed_initial(InitTag::Goal, 9, &params, &cfg).unwrap();
        assert_eq!(v, v2);
    }

    #[test]
    fn named_index_out_of_range_is_an_error() {
        let cfg = config(4, 2);
        let params = ModelParams::zeros(&cfg);
        assert!(matches!(
            embed_initial(InitTag::Named(2), 0, &params, &cfg),
            Err(ModelError::NamedIndexOutOfRange { index: 2, m: 2 })
        ));
    }

    #[test]
    fn determinism_and_unknown_sharing() {
        let cfg = config(8, 3);
        let params = ModelParams::init(&cfg, 42);
        let a = embed_initial(InitTag::Unknown, 4, &params, &cfg).unwrap();
        let b = embed_initial(InitTag::Unknown, 4, &params, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_parameters_give_zero_embeddings() {
        let cfg = config(4, 1);
        let params = ModelParams::zeros(&cfg);
        let x = Array1::from_elem(4, 1.5);
        let v = embed_derived(
            RuleId::Resolution,
            &[x.clone(), x.clone()],
            &params,
            &cfg,
            false,
        )
        .unwrap();
        assert!(v.iter().all(|&e| e == 0.0));
        let f = embed_derived(RuleId::Factoring, &[x], &params, &cfg, false).unwrap();
        assert!(f.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn generic_block_is_shared_across_rules_of_one_arity() {
        let cfg = config(6, 1);
        let params = ModelParams::init(&cfg, 3);
        let a = Array1::from_elem(6, 0.5);
        let b = Array1::from_elem(6, -0.25);
        let res = embed_derived(
            RuleId::Resolution,
            &[a.clone(), b.clone()],
            &params,
            &cfg,
            true,
        )
        .unwrap();
        let sr = embed_derived(
            RuleId::SubsumptionResolution,
            &[a.clone(), b.clone()],
            &params,
            &cfg,
            true,
        )
        .unwrap();
        assert_eq!(res, sr);
        let dedicated = embed_derived(RuleId::Resolution, &[a, b], &params, &cfg, false).unwrap();
        assert_ne!(res, dedicated);
    }

    #[test]
    fn fold_is_left_associative() {
        let cfg = config(5, 1);
        let params = ModelParams::init(&cfg, 11);
        let a = Array1::from_elem(5, 0.3);
        let b = Array1::from_elem(5, -0.7);
        let c = Array1::from_elem(5, 1.1);
        let folded = embed_derived(
            RuleId::Resolution,
            &[a.clone(), b.clone(), c.clone()],
            &params,
            &cfg,
            false,
        )
        .unwrap();
        let ab = embed_derived(
            RuleId::Resolution,
            &[a.clone(), b.clone()],
            &params,
            &cfg,
            false,
        )
        .unwrap();
        let left =
            embed_derived(RuleId::Resolution, &[ab, c.clone()], &params, &cfg, false).unwrap();
        assert_eq!(folded, left);
        // and differs from the right fold
        let bc = embed_derived(RuleId::Resolution, &[b, c], &params, &cfg, false).unwrap();
        let right = embed_derived(RuleId::Resolution, &[a, bc], &params, &cfg, false).unwrap();
        assert_ne!(folded, right);
    }

    #[test]
    fn unknown_rule_is_a_mismatch_error() {
        let mut cfg = config(4, 1);
        cfg.rules = vec![RuleId::Resolution, RuleId::SubsumptionResolution];
        let params = ModelParams::init(&cfg, 5);
        let x = Array1::from_elem(4, 1.0);
        assert_eq!(
            embed_derived(RuleId::Factoring, std::slice::from_ref(&x), &params, &cfg, false)
                .unwrap_err(),
            ModelError::UnknownRule(RuleId::Factoring)
        );
        // no arity-1 rule in the list: the generic fallback is missing too
        assert_eq!(
            embed_derived(RuleId::Factoring, &[x], &params, &cfg, true).unwrap_err(),
            ModelError::NoGenericArity(1)
        );
    }

    #[test]
    fn zero_head_scores_zero_and_classifies_positive() {
        let cfg = config(4, 1);
        let params = ModelParams::zeros(&cfg);
        let score = evaluate(&Array1::from_elem(4, 1.0), &params);
        assert_eq!(score, 0.0);
        assert!(classify(score));
    }

    #[test]
    fn batch_forward_runs_each_node_once_and_matches_recursion() {
        use crate::derivation::{Batch, BatchNode};
        let cfg = config(8, 2);
        let params = ModelParams::init(&cfg, 9);
        let batch = Batch {
            nodes: vec![
                BatchNode::Initial {
                    tag: InitTag::Goal,
                    capped_level: 0,
                },
                BatchNode::Initial {
                    tag: InitTag::Named(1),
                    capped_level: 2,
                },
                BatchNode::Derived {
                    rule: RuleId::Resolution,
                    premises: vec![0, 1],
                },
                BatchNode::Derived {
                    rule: RuleId::Factoring,
                    premises: vec![2],
                },
            ],
            examples: vec![BatchExample {
                node: 3,
                target: 1.0,
                weight: 1.0,
            }],
            members: vec!["t".into()],
        };
        let fwd = forward_batch(&batch, &params, &cfg, None).unwrap();
        assert_eq!(fwd.value.len(), 4);
        // independent recursive evaluation of node 3
        let goal = embed_initial(InitTag::Goal, 0, &params, &cfg).unwrap();
        let named = embed_initial(InitTag::Named(1), 2, &params, &cfg).unwrap();
        let res = embed_derived(RuleId::Resolution, &[goal, named], &params, &cfg, false).unwrap();
        let fac = embed_derived(RuleId::Factoring, &[res], &params, &cfg, false).unwrap();
        assert_eq!(fwd.value[3], fac);
        assert_eq!(fwd.head[0].score, evaluate(&fac, &params));
    }

    #[test]
    fn large_chain_evaluates_in_one_pass() {
        use crate::derivation::{Batch, BatchNode};
        let n_nodes = 100_000;
        let cfg = config(4, 1);
        let params = ModelParams::init(&cfg, 1);
        let mut nodes = vec![BatchNode::Initial {
            tag: InitTag::Goal,
            capped_level: 0,
        }];
        for i in 1..n_nodes {
            nodes.push(BatchNode::Derived {
                rule: RuleId::Factoring,
                premises: vec![i - 1],
            });
        }
        let batch = Batch {
            nodes,
            examples: vec![],
            members: vec!["big".into()],
        };
        let fwd = forward_batch(&batch, &params, &cfg, None).unwrap();
        assert_eq!(fwd.value.len(), n_nodes);
    }
}
