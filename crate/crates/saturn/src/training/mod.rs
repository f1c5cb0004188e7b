//! Training: weighted binary cross-entropy over collapsed batches,
//! exact reverse-mode gradients, the warmup/decay learning-rate
//! schedule, swapout, and two trainers sharing one update rule — a
//! sequential loop and a master-worker parallel loop that applies
//! stale gradients as they arrive.

mod parallel;

pub use parallel::train_parallel;

use ndarray::Array1;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::derivation::{Batch, BatchNode};
use crate::model::{forward_batch, BatchForward, ModelConfig, ModelError, ModelGrad, ModelParams};

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub epochs: u32,
    pub alpha_max: f64,
    pub warmup_epochs: u32,
    /// Fraction of batches used for training; the rest validate.
    pub split: f64,
    pub swapout_p: f64,
    pub workers: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            alpha_max: 2.0e-4,
            warmup_epochs: 40,
            split: 0.9,
            swapout_p: 0.0,
            workers: 1,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EpochStats {
    pub epoch: u32,
    pub train_loss: f64,
    pub val_loss: f64,
    pub tpr: f64,
    pub tnr: f64,
    pub alpha: f64,
    pub mean_drift: f64,
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("loss diverged (non-finite) in epoch {epoch}")]
    Diverged { epoch: u32 },
    #[error("non-finite gradient in parameter block {block}")]
    NonFiniteGradient { block: String },
    #[error("worker {worker} failed twice on batch {batch}")]
    WorkerFailed { worker: usize, batch: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no batches to train on")]
    NoBatches,
}

/// Learning rate for 1-based epoch `t`: linear warmup to `alpha_max`
/// at `warmup_epochs`, then reciprocal decay. Both formulas agree at
/// the peak.
pub fn lr_schedule(t: u32, config: &TrainConfig) -> f64 {
    let warmup = config.warmup_epochs.max(1) as f64;
    let t = t as f64;
    if t <= warmup {
        t * config.alpha_max / warmup
    } else {
        warmup * config.alpha_max / t
    }
}

/// Numerically stable `-(y ln p + (1-y) ln(1-p))` with `p = sigmoid(s)`.
fn bce_from_logit(score: f64, target: f64) -> f64 {
    score.max(0.0) - score * target + (-score.abs()).exp().ln_1p()
}

/// Total weighted BCE loss of one batch.
pub fn loss(batch: &Batch, params: &ModelParams, config: &ModelConfig) -> Result<f64, ModelError> {
    let fwd = forward_batch(batch, params, config, None)?;
    Ok(loss_from_forward(batch, &fwd))
}

fn loss_from_forward(batch: &Batch, fwd: &BatchForward) -> f64 {
    batch
        .examples
        .iter()
        .zip(&fwd.head)
        .map(|(e, h)| e.weight * bce_from_logit(h.score, e.target))
        .sum()
}

/// Per derived-node swapout decisions: with probability `p` a rule
/// application computes through the generic per-arity block instead of
/// its own.
pub fn apply_swapout(batch: &Batch, p: f64, rng: &mut impl Rng) -> Vec<bool> {
    batch
        .nodes
        .iter()
        .map(|node| matches!(node, BatchNode::Derived { .. }) && p > 0.0 && rng.gen_bool(p))
        .collect()
}

/// Deterministic swapout decisions for (seed, epoch, batch). Both
/// trainers derive decisions this way so results do not depend on
/// worker scheduling.
pub fn swapout_for(batch: &Batch, config: &TrainConfig, epoch: u32, batch_id: usize) -> Option<Vec<bool>> {
    if config.swapout_p <= 0.0 {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(
        config
            .seed
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(u64::from(epoch) << 32)
            .wrapping_add(batch_id as u64),
    );
    Some(apply_swapout(batch, config.swapout_p, &mut rng))
}

/// Forward plus exact reverse accumulation through the collapsed DAG.
/// Gradients of shared nodes sum over consumers. Returns the batch loss
/// and the gradient.
pub fn backward(
    batch: &Batch,
    params: &ModelParams,
    config: &ModelConfig,
    swap: Option<&[bool]>,
) -> Result<(f64, ModelGrad), TrainError> {
    let fwd = forward_batch(batch, params, config, swap)?;
    let loss = loss_from_forward(batch, &fwd);
    let mut grad = ModelParams::zeros(config);
    let n = config.n;

    // d(loss)/d(value of node), accumulated over consumers
    let mut dvalue: Vec<Array1<f64>> = vec![Array1::zeros(n); batch.len()];

    // eval head: dL/ds = w (sigmoid(s) - y)
    for (example, head) in batch.examples.iter().zip(&fwd.head) {
        let p = 1.0 / (1.0 + (-head.score).exp());
        let dscore = example.weight * (p - example.target);
        grad.eval_out_b += dscore;
        grad.eval_out_w.scaled_add(dscore, &head.hidden);
        let mut dhidden_pre = params.eval_out_w.clone() * dscore;
        for (i, z) in head.hidden_pre.iter().enumerate() {
            if *z <= 0.0 {
                dhidden_pre[i] = 0.0;
            }
        }
        grad.eval_hidden.b += &dhidden_pre;
        outer_add(&mut grad.eval_hidden.w, &dhidden_pre, &fwd.value[example.node]);
        dvalue[example.node] += &params.eval_hidden.w.t().dot(&dhidden_pre);
    }

    // reverse topological order over the DAG
    for idx in (0..batch.len()).rev() {
        let dv = std::mem::replace(&mut dvalue[idx], Array1::zeros(0));
        if dv.iter().all(|&x| x == 0.0) {
            continue;
        }
        match &batch.nodes[idx] {
            BatchNode::Initial { tag, capped_level } => {
                let row = match tag {
                    crate::derivation::InitTag::Named(i) => *i as usize,
                    crate::derivation::InitTag::Unknown => config.m(),
                    crate::derivation::InitTag::Goal => config.m() + 1,
                };
                if config.sine_enabled {
                    let dz = relu_backward(&dv, &fwd.pre[idx]);
                    grad.sine.b += &dz;
                    // input was [base ; phi(level)]
                    let base = params.init_embeddings.row(row);
                    let phi = config.phi(*capped_level);
                    for (i, dzi) in dz.iter().enumerate() {
                        for (j, bj) in base.iter().enumerate() {
                            grad.sine.w[[i, j]] += dzi * bj;
                        }
                        grad.sine.w[[i, n]] += dzi * phi;
                    }
                    let dbase = params.sine.w.slice(ndarray::s![.., ..n]).t().dot(&dz);
                    let mut grow = grad.init_embeddings.row_mut(row);
                    grow += &dbase;
                } else {
                    let mut grow = grad.init_embeddings.row_mut(row);
                    grow += &dv;
                }
            }
            BatchNode::Derived { rule, premises } => {
                let dz = relu_backward(&dv, &fwd.pre[idx]);
                let use_generic = swap.is_some_and(|s| s[idx]);
                let (block, gblock) = block_pair(params, &mut grad, config, *rule, use_generic)?;
                gblock.b += &dz;
                if premises.len() == 1 {
                    let x = &fwd.value[premises[0]];
                    outer_add(&mut gblock.w, &dz, x);
                    dvalue[premises[0]] += &block.w.t().dot(&dz);
                } else {
                    let (p0, p1) = (premises[0], premises[1]);
                    let x0 = &fwd.value[p0];
                    let x1 = &fwd.value[p1];
                    for (i, dzi) in dz.iter().enumerate() {
                        for (j, xj) in x0.iter().enumerate() {
                            gblock.w[[i, j]] += dzi * xj;
                        }
                        for (j, xj) in x1.iter().enumerate() {
                            gblock.w[[i, n + j]] += dzi * xj;
                        }
                    }
                    let dx = block.w.t().dot(&dz);
                    dvalue[p0] += &dx.slice(ndarray::s![..n]);
                    dvalue[p1] += &dx.slice(ndarray::s![n..]);
                }
            }
        }
    }

    if let Some(block) = grad.first_non_finite_block() {
        return Err(TrainError::NonFiniteGradient { block });
    }
    Ok((loss, grad))
}

fn relu_backward(dv: &Array1<f64>, pre: &Array1<f64>) -> Array1<f64> {
    let mut dz = dv.clone();
    for (d, z) in dz.iter_mut().zip(pre.iter()) {
        if *z <= 0.0 {
            *d = 0.0;
        }
    }
    dz
}

fn outer_add(w: &mut ndarray::Array2<f64>, dy: &Array1<f64>, x: &Array1<f64>) {
    for (i, d) in dy.iter().enumerate() {
        if *d == 0.0 {
            continue;
        }
        for (j, xj) in x.iter().enumerate() {
            w[[i, j]] += d * xj;
        }
    }
}

/// The parameter block a derived node computed through, and the same
/// block inside the gradient container.
fn block_pair<'a>(
    params: &'a ModelParams,
    grad: &'a mut ModelGrad,
    config: &ModelConfig,
    rule: crate::saturation::RuleId,
    use_generic: bool,
) -> Result<(&'a crate::model::Affine, &'a mut crate::model::Affine), TrainError> {
    if use_generic {
        let idx = config
            .distinct_arities()
            .iter()
            .position(|&a| a == rule.arity())
            .ok_or(ModelError::NoGenericArity(rule.arity()))?;
        Ok((&params.generic_blocks[idx], &mut grad.generic_blocks[idx]))
    } else {
        let idx = config
            .rule_index(rule)
            .ok_or(ModelError::UnknownRule(rule))?;
        Ok((&params.rule_blocks[idx], &mut grad.rule_blocks[idx]))
    }
}

/// Weighted true-positive and true-negative rates of a batch under the
/// `score >= 0` classifier. Collapsed fractional targets count as
/// positive above 0.5.
#[derive(Clone, Copy, Debug, Default)]
pub struct RateAccum {
    pub pos_correct: f64,
    pub pos_total: f64,
    pub neg_correct: f64,
    pub neg_total: f64,
}

impl RateAccum {
    pub fn add_batch(
        &mut self,
        batch: &Batch,
        params: &ModelParams,
        config: &ModelConfig,
    ) -> Result<(), ModelError> {
        let fwd = forward_batch(batch, params, config, None)?;
        for (example, head) in batch.examples.iter().zip(&fwd.head) {
            let predicted_positive = head.score >= 0.0;
            if example.target > 0.5 {
                self.pos_total += example.weight;
                if predicted_positive {
                    self.pos_correct += example.weight;
                }
            } else {
                self.neg_total += example.weight;
                if !predicted_positive {
                    self.neg_correct += example.weight;
                }
            }
        }
        Ok(())
    }

    /// (TPR, TNR); an absent class reports rate 1.0 with its flag set.
    pub fn rates(&self) -> Rates {
        Rates {
            tpr: if self.pos_total > 0.0 {
                self.pos_correct / self.pos_total
            } else {
                1.0
            },
            tnr: if self.neg_total > 0.0 {
                self.neg_correct / self.neg_total
            } else {
                1.0
            },
            pos_absent: self.pos_total == 0.0,
            neg_absent: self.neg_total == 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rates {
    pub tpr: f64,
    pub tnr: f64,
    pub pos_absent: bool,
    pub neg_absent: bool,
}

/// Weighted rates over a single example collection.
pub fn rates(batch: &Batch, params: &ModelParams, config: &ModelConfig) -> Result<Rates, ModelError> {
    let mut accum = RateAccum::default();
    accum.add_batch(batch, params, config)?;
    Ok(accum.rates())
}

/// Splits batch indices into training and validation at batch
/// granularity with a seeded shuffle. With two or more batches both
/// sides are nonempty; a single batch serves as both.
pub fn split_batches(count: usize, split: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut indices: Vec<usize> = (0..count).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0051);
    indices.shuffle(&mut rng);
    if count <= 1 {
        return (indices.clone(), indices);
    }
    let n_train = ((count as f64 * split).round() as usize).clamp(1, count - 1);
    let val = indices.split_off(n_train);
    (indices, val)
}

/// Shared per-epoch bookkeeping: validation loss, rates, and the
/// running best snapshot by validation loss.
pub(crate) struct Validator<'a> {
    batches: &'a [Batch],
    val_idx: &'a [usize],
    config: &'a ModelConfig,
    pub best: Option<(f64, ModelParams)>,
}

impl<'a> Validator<'a> {
    pub fn new(batches: &'a [Batch], val_idx: &'a [usize], config: &'a ModelConfig) -> Self {
        Validator {
            batches,
            val_idx,
            config,
            best: None,
        }
    }

    /// Validation loss (per member derivation) and rates, swapout off.
    pub fn evaluate(&mut self, params: &ModelParams) -> Result<(f64, Rates), TrainError> {
        let mut total = 0.0;
        let mut weight = 0.0;
        let mut accum = RateAccum::default();
        for &i in self.val_idx {
            let batch = &self.batches[i];
            total += loss(batch, params, self.config)?;
            weight += batch.members.len() as f64;
            accum.add_batch(batch, params, self.config)?;
        }
        let val_loss = if weight > 0.0 { total / weight } else { 0.0 };
        if self.best.as_ref().is_none_or(|(best, _)| val_loss < *best) {
            self.best = Some((val_loss, params.clone()));
        }
        Ok((val_loss, accum.rates()))
    }
}

pub(crate) fn epoch_order(count: usize, seed: u64, epoch: u32) -> Vec<usize> {
    let mut order: Vec<usize> = (0..count).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(u64::from(epoch) * 0x1000_0001));
    order.shuffle(&mut rng);
    order
}

/// Plain SGD over the training split: per epoch, shuffle, and for each
/// batch apply `theta <- theta - alpha(t) * grad(theta, batch)`.
/// Returns the epoch-end snapshot with the smallest validation loss.
pub fn train_sequential(
    config: &ModelConfig,
    initial: ModelParams,
    batches: &[Batch],
    tc: &TrainConfig,
) -> Result<(ModelParams, Vec<EpochStats>), TrainError> {
    if batches.is_empty() {
        return Err(TrainError::NoBatches);
    }
    let (train_idx, val_idx) = split_batches(batches.len(), tc.split, tc.seed);
    let mut params = initial;
    let mut stats = Vec::with_capacity(tc.epochs as usize);
    let mut validator = Validator::new(batches, &val_idx, config);

    for epoch in 1..=tc.epochs {
        let alpha = lr_schedule(epoch, tc);
        let mut epoch_loss = 0.0;
        let mut epoch_weight = 0.0;
        for &slot in &epoch_order(train_idx.len(), tc.seed, epoch) {
            let batch_id = train_idx[slot];
            let batch = &batches[batch_id];
            let swap = swapout_for(batch, tc, epoch, batch_id);
            let (batch_loss, grad) = backward(batch, &params, config, swap.as_deref())?;
            if !batch_loss.is_finite() {
                return Err(TrainError::Diverged { epoch });
            }
            epoch_loss += batch_loss;
            epoch_weight += batch.members.len() as f64;
            params.add_scaled(&grad, -alpha);
        }
        let (val_loss, rates) = validator.evaluate(&params)?;
        if !val_loss.is_finite() {
            return Err(TrainError::Diverged { epoch });
        }
        stats.push(EpochStats {
            epoch,
            train_loss: if epoch_weight > 0.0 {
                epoch_loss / epoch_weight
            } else {
                0.0
            },
            val_loss,
            tpr: rates.tpr,
            tnr: rates.tnr,
            alpha,
            mean_drift: 0.0,
        });
    }

    let best = validator.best.map(|(_, p)| p).unwrap_or(params);
    Ok((best, stats))
}

/// Writes the per-epoch stats table as CSV.
pub fn write_stats_csv(path: impl AsRef<std::path::Path>, stats: &[EpochStats]) -> std::io::Result<()> {
    use std::io::Write as _;
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "epoch,train_loss,val_loss,tpr,tnr,alpha,mean_drift")?;
    for s in stats {
        writeln!(
            file,
            "{},{},{},{},{},{},{}",
            s.epoch, s.train_loss, s.val_loss, s.tpr, s.tnr, s.alpha, s.mean_drift
        )?;
    }
    Ok(())
}

/// Node ids eligible for swapout in a batch (derived nodes).
pub fn derived_node_count(batch: &Batch) -> usize {
    batch
        .nodes
        .iter()
        .filter(|n| matches!(n, BatchNode::Derived { .. }))
        .count()
}

pub mod gradcheck {
    //! Verification utilities: random collapsed batches, parameter
    //! flattening, and the central finite-difference gradient oracle
    //! the test suites check [`super::backward`] against.

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use crate::derivation::{Batch, BatchExample, BatchNode, InitTag};
    use crate::model::{ModelConfig, ModelParams};
    use crate::saturation::RuleId;

    /// A random collapsed DAG with `max_nodes` nodes at most, using all
    /// three rules, mixed tags and levels, and a random example subset
    /// with fractional targets.
    pub fn random_batch(seed: u64, max_nodes: usize, m: usize, sine_cap: u32) -> Batch {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_nodes = rng.gen_range(max_nodes / 2..=max_nodes);
        let mut nodes: Vec<BatchNode> = Vec::with_capacity(n_nodes);
        for i in 0..n_nodes {
            if i == 0 || rng.gen_bool(0.35) {
                let tag = match rng.gen_range(0..4) {
                    0 => InitTag::Goal,
                    1 => InitTag::Unknown,
                    _ => InitTag::Named(rng.gen_range(0..m as u32)),
                };
                nodes.push(BatchNode::Initial {
                    tag,
                    capped_level: rng.gen_range(0..=sine_cap),
                });
            } else {
                let rule = RuleId::ALL[rng.gen_range(0..3)];
                let premises = (0..rule.arity()).map(|_| rng.gen_range(0..i)).collect();
                nodes.push(BatchNode::Derived { rule, premises });
            }
        }
        let mut examples = Vec::new();
        for node in 0..n_nodes {
            if !rng.gen_bool(0.4) {
                continue;
            }
            examples.push(BatchExample {
                node,
                target: match rng.gen_range(0..3) {
                    0 => 0.0,
                    1 => 1.0,
                    _ => rng.gen_range(0.0..=1.0),
                },
                weight: rng.gen_range(0.01..1.0),
            });
        }
        Batch {
            nodes,
            examples,
            members: vec![format!("random{seed}")],
        }
    }

    pub fn flatten(params: &ModelParams) -> Vec<f64> {
        let mut out = Vec::with_capacity(params.param_count());
        out.extend(params.init_embeddings.iter());
        out.extend(params.sine.w.iter());
        out.extend(params.sine.b.iter());
        for b in &params.rule_blocks {
            out.extend(b.w.iter());
            out.extend(b.b.iter());
        }
        for b in &params.generic_blocks {
            out.extend(b.w.iter());
            out.extend(b.b.iter());
        }
        out.extend(params.eval_hidden.w.iter());
        out.extend(params.eval_hidden.b.iter());
        out.extend(params.eval_out_w.iter());
        out.push(params.eval_out_b);
        out
    }

    pub fn unflatten(template: &ModelConfig, flat: &[f64]) -> ModelParams {
        let mut params = ModelParams::zeros(template);
        let mut it = flat.iter().copied();
        let mut next = || it.next().expect("flat vector too short");
        for v in params.init_embeddings.iter_mut() {
            *v = next();
        }
        for v in params.sine.w.iter_mut() {
            *v = next();
        }
        for v in params.sine.b.iter_mut() {
            *v = next();
        }
        for b in &mut params.rule_blocks {
            for v in b.w.iter_mut() {
                *v = next();
            }
            for v in b.b.iter_mut() {
                *v = next();
            }
        }
        for b in &mut params.generic_blocks {
            for v in b.w.iter_mut() {
                *v = next();
            }
            for v in b.b.iter_mut() {
                *v = next();
            }
        }
        for v in params.eval_hidden.w.iter_mut() {
            *v = next();
        }
        for v in params.eval_hidden.b.iter_mut() {
            *v = next();
        }
        for v in params.eval_out_w.iter_mut() {
            *v = next();
        }
        params.eval_out_b = next();
        params
    }

    /// Central finite differences of the batch loss, the independent
    /// gradient oracle. Returns (matching coordinates, total) under the
    /// relative-error bound.
    pub fn finite_difference_agreement(
        batch: &Batch,
        params: &ModelParams,
        config: &ModelConfig,
        swap: Option<&[bool]>,
        h: f64,
        rel_tol: f64,
    ) -> (usize, usize) {
        let (_, grad) = super::backward(batch, params, config, swap).unwrap();
        let flat = flatten(params);
        let grad_flat = flatten(&grad);
        let mut ok = 0;
        for i in 0..flat.len() {
            let mut plus = flat.clone();
            plus[i] += h;
            let mut minus = flat.clone();
            minus[i] -= h;
            let loss_of = |v: &[f64]| {
                let p = unflatten(config, v);
                let fwd = crate::model::forward_batch(batch, &p, config, swap).unwrap();
                super::loss_from_forward(batch, &fwd)
            };
            let fd = (loss_of(&plus) - loss_of(&minus)) / (2.0 * h);
            let analytic = grad_flat[i];
            // central differences on f64 resolve nothing below the
            // cancellation noise eps * |loss| / h ~ 1e-11; treat such
            // coordinates as agreeing when the absolute gap is noise
            let diff = (fd - analytic).abs();
            let denom = fd.abs().max(analytic.abs());
            if diff <= 1e-9 || diff / denom <= rel_tol {
                ok += 1;
            }
        }
        (ok, flat.len())
    }
}
