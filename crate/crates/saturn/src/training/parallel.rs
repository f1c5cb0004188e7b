//! Master-worker training. The master owns the official parameters and
//! dispatches `(snapshot, batch)` tasks to idle workers over per-worker
//! queues; workers send gradients back over one shared queue and the
//! master applies each gradient to the *current* parameters the moment
//! it arrives. With more than one worker a gradient is typically
//! computed against an older snapshot than the one it updates; that
//! drift is measured and reported per epoch.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::mpsc;
use std::sync::Arc;

use super::{
    backward, epoch_order, lr_schedule, split_batches, swapout_for, EpochStats, TrainConfig,
    TrainError, Validator,
};
use crate::derivation::Batch;
use crate::model::{ModelConfig, ModelGrad, ModelParams};

struct Task {
    snapshot: Arc<ModelParams>,
    batch_id: usize,
    epoch: u32,
    issued_at: u64,
}

struct TaskResult {
    worker: usize,
    batch_id: usize,
    issued_at: u64,
    outcome: Result<(f64, ModelGrad), String>,
}

/// Same update rule and model selection as the sequential trainer, with
/// gradients computed by `tc.workers` worker threads. An epoch ends
/// when every batch has been dispatched and every gradient applied. A
/// failing worker gets its task reissued once; a second failure aborts.
pub fn train_parallel(
    config: &ModelConfig,
    initial: ModelParams,
    batches: &[Batch],
    tc: &TrainConfig,
) -> Result<(ModelParams, Vec<EpochStats>), TrainError> {
    if batches.is_empty() {
        return Err(TrainError::NoBatches);
    }
    let workers = tc.workers.max(1);
    let (train_idx, val_idx) = split_batches(batches.len(), tc.split, tc.seed);
    let mut params = initial;
    let mut stats = Vec::with_capacity(tc.epochs as usize);
    let mut validator = Validator::new(batches, &val_idx, config);

    std::thread::scope(|scope| {
        let (result_tx, result_rx) = mpsc::channel::<TaskResult>();
        let mut task_txs = Vec::with_capacity(workers);
        for worker in 0..workers {
            let (task_tx, task_rx) = mpsc::channel::<Task>();
            task_txs.push(Some(task_tx));
            let result_tx = result_tx.clone();
            scope.spawn(move || {
                while let Ok(task) = task_rx.recv() {
                    let batch = &batches[task.batch_id];
                    let swap = swapout_for(batch, tc, task.epoch, task.batch_id);
                    let outcome = catch_unwind(AssertUnwindSafe(|| {
                        backward(batch, &task.snapshot, config, swap.as_deref())
                    }));
                    let outcome = match outcome {
                        Ok(Ok(pair)) => Ok(pair),
                        Ok(Err(e)) => Err(e.to_string()),
                        Err(_) => Err("worker panicked".to_owned()),
                    };
                    let sent = result_tx.send(TaskResult {
                        worker,
                        batch_id: task.batch_id,
                        issued_at: task.issued_at,
                        outcome,
                    });
                    if sent.is_err() {
                        break;
                    }
                }
            });
        }
        drop(result_tx);

        let mut updates: u64 = 0;
        let mut idle: Vec<usize> = (0..workers).rev().collect();

        for epoch in 1..=tc.epochs {
            let alpha = lr_schedule(epoch, tc);
            let order = epoch_order(train_idx.len(), tc.seed, epoch);
            let mut pending: std::collections::VecDeque<usize> =
                order.iter().map(|&slot| train_idx[slot]).collect();
            let mut retried: std::collections::HashSet<usize> = std::collections::HashSet::new();
            let mut in_flight = 0usize;
            let mut epoch_loss = 0.0;
            let mut epoch_weight = 0.0;
            let mut drift_sum = 0.0f64;
            let mut applied = 0u64;

            loop {
                // keep every idle worker busy
                while !pending.is_empty() && !idle.is_empty() {
                    let worker = idle.pop().unwrap();
                    let batch_id = pending.pop_front().unwrap();
                    let task = Task {
                        snapshot: Arc::new(params.clone()),
                        batch_id,
                        epoch,
                        issued_at: updates,
                    };
                    match task_txs[worker].as_ref() {
                        Some(tx) if tx.send(task).is_ok() => in_flight += 1,
                        _ => {
                            // worker is gone; requeue and forget it
                            task_txs[worker] = None;
                            pending.push_front(batch_id);
                            if task_txs.iter().all(Option::is_none) {
                                return Err(TrainError::WorkerFailed {
                                    worker,
                                    batch: batch_id,
                                });
                            }
                        }
                    }
                }
                if in_flight == 0 {
                    if pending.is_empty() {
                        break;
                    }
                    if idle.is_empty() {
                        // nothing running and nobody left to run it
                        return Err(TrainError::WorkerFailed {
                            worker: 0,
                            batch: pending.front().copied().unwrap_or(0),
                        });
                    }
                    continue;
                }
                let result = result_rx.recv().map_err(|_| TrainError::WorkerFailed {
                    worker: 0,
                    batch: pending.front().copied().unwrap_or(0),
                })?;
                in_flight -= 1;
                idle.push(result.worker);
                match result.outcome {
                    Ok((batch_loss, grad)) => {
                        if !batch_loss.is_finite() {
                            return Err(TrainError::Diverged { epoch });
                        }
                        drift_sum += (updates - result.issued_at) as f64;
                        applied += 1;
                        updates += 1;
                        epoch_loss += batch_loss;
                        epoch_weight += batches[result.batch_id].members.len() as f64;
                        params.add_scaled(&grad, -alpha);
                    }
                    Err(_) if !retried.contains(&result.batch_id) => {
                        retried.insert(result.batch_id);
                        pending.push_front(result.batch_id);
                    }
                    Err(_) => {
                        return Err(TrainError::WorkerFailed {
                            worker: result.worker,
                            batch: result.batch_id,
                        });
                    }
                }
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
                mean_drift: if applied > 0 {
                    drift_sum / applied as f64
                } else {
                    0.0
                },
            });
        }
        Ok(())
    })?;

    let best = validator.best.take().map(|(_, p)| p).unwrap_or(params);
    Ok((best, stats))
}
