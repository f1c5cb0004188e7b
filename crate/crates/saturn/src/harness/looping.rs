//! The looping orchestrator: an unguided baseline sweep collects the
//! first derivations; each later loop trains a model on exactly one
//! derivation per solved problem and re-sweeps under guidance.
//!
//! A problem solved only with guidance contributes its guided proof DAG
//! merged with the failed baseline run on that problem: the merged DAG
//! keeps the guided proof's labels and turns the baseline run's
//! selections into extra negatives. Derivations travel between sweep
//! and training as derivation-log files.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::derivation::{label_dag, merge_dags, parse_log, Dag, DagError};
use crate::fol::Problem;
use crate::model::{save_model, ModelConfig, ModelParams};
use crate::training::{train_parallel, train_sequential, write_stats_csv, TrainConfig, TrainError};

use super::select_revealed_axioms;
use super::sweep::{run_benchmark, summarize, write_records_jsonl, Guidance, SweepConfig, SweepReport};

#[derive(Clone, Debug)]
pub struct LoopConfig {
    /// Guided loops after the baseline loop 0.
    pub loops: usize,
    pub out_dir: PathBuf,
    pub sweep: SweepConfig,
    pub train: TrainConfig,
    /// Embedding dimension for the per-loop models.
    pub n: usize,
    /// Revealed-axiom budget; the actual table may be smaller.
    pub m: usize,
    pub sine_cap: u32,
    pub sine_enabled: bool,
    pub target_nodes: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LoopRow {
    pub loop_index: usize,
    /// Derivations available for training this loop (0 for loop 0).
    pub collected: usize,
    /// Revealed axioms of the model trained this loop.
    pub m: usize,
    /// Problems solved by this loop's sweep.
    pub performance: usize,
    /// Problems solved by any loop so far.
    pub cumulative: usize,
    /// performance / collected, when a model was trained.
    pub pct_collected: Option<f64>,
    pub v_plus: usize,
    pub v_minus: usize,
    pub best_val_loss: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LoopReport {
    pub rows: Vec<LoopRow>,
}

impl LoopReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "loop,collected,m,performance,cumulative,pct_collected,v_plus,v_minus,best_val_loss\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.loop_index,
                r.collected,
                r.m,
                r.performance,
                r.cumulative,
                r.pct_collected.map_or(String::new(), |p| format!("{p:.3}")),
                r.v_plus,
                r.v_minus,
                r.best_val_loss.map_or(String::new(), |l| format!("{l}")),
            ));
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum LoopError {
    #[error("loop {0} solved zero problems")]
    NoSolutions(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("training: {0}")]
    Train(#[from] TrainError),
    #[error("derivation: {0}")]
    Dag(#[from] DagError),
    #[error("model io: {0}")]
    ModelIo(#[from] crate::model::ModelIoError),
    #[error("batching: every collected derivation was degenerate")]
    NoTrainableDags,
}

struct SolvedEntry {
    first_loop: usize,
    log: PathBuf,
}

fn sweep_into(
    problems: &[(String, Problem)],
    config: &SweepConfig,
    guidance: Option<Guidance<'_>>,
    dir: PathBuf,
    log_failures: bool,
) -> Result<SweepReport, LoopError> {
    std::fs::create_dir_all(&dir)?;
    let sweep = SweepConfig {
        log_dir: Some(dir),
        log_failures,
        ..config.clone()
    };
    Ok(run_benchmark(problems, &sweep, guidance)?)
}

/// Runs loop 0 plus `config.loops` guided loops and writes the report,
/// per-loop records, models, and stats under `config.out_dir`.
pub fn run_loop(
    problems: &[(String, Problem)],
    config: &LoopConfig,
) -> Result<LoopReport, LoopError> {
    std::fs::create_dir_all(&config.out_dir)?;
    let mut rows: Vec<LoopRow> = Vec::new();
    let mut solved: BTreeMap<String, SolvedEntry> = BTreeMap::new();

    // loop 0: plain baseline; keep failed-run logs for augmentation
    let loop0_dir = config.out_dir.join("loop0");
    let report = sweep_into(
        problems,
        &config.sweep,
        None,
        loop0_dir.join("logs"),
        true,
    )?;
    write_records_jsonl(loop0_dir.join("records.jsonl"), &report.records)?;
    let baseline_records = report.records.clone();
    let mut failed_logs: BTreeMap<String, PathBuf> = BTreeMap::new();
    for record in &report.records {
        if let Some(log) = &record.log {
            if record.solved {
                solved.insert(
                    record.problem.clone(),
                    SolvedEntry {
                        first_loop: 0,
                        log: log.clone(),
                    },
                );
            } else {
                failed_logs.insert(record.problem.clone(), log.clone());
            }
        }
    }
    let baseline_solved = report.summary.solved;
    if baseline_solved == 0 {
        return Err(LoopError::NoSolutions(0));
    }
    rows.push(LoopRow {
        loop_index: 0,
        collected: 0,
        m: 0,
        performance: baseline_solved,
        cumulative: solved.len(),
        pct_collected: None,
        v_plus: 0,
        v_minus: 0,
        best_val_loss: None,
    });

    for loop_index in 1..=config.loops {
        let loop_dir = config.out_dir.join(format!("loop{loop_index}"));
        std::fs::create_dir_all(&loop_dir)?;

        // exactly one derivation per solved problem, earliest loop
        // first; guided solves are augmented with the failed baseline
        let mut dags: Vec<Dag> = Vec::with_capacity(solved.len());
        for (problem, entry) in &solved {
            let text = std::fs::read_to_string(&entry.log)?;
            let dag = parse_log(&text, problem.clone())?;
            let dag = if entry.first_loop == 0 {
                dag
            } else {
                match failed_logs.get(problem) {
                    Some(path) => {
                        let failed_text = std::fs::read_to_string(path)?;
                        let failed = parse_log(&failed_text, problem.clone())?;
                        merge_dags(&[&dag, &failed], problem.clone())
                    }
                    None => dag,
                }
            };
            if label_dag(&dag).is_ok() {
                dags.push(dag);
            }
        }
        if dags.is_empty() {
            return Err(LoopError::NoTrainableDags);
        }

        let revealed = select_revealed_axioms(&dags, config.m);
        let mut model_config = ModelConfig::new(config.n, revealed);
        model_config.sine_cap = config.sine_cap;
        model_config.sine_enabled = config.sine_enabled;
        model_config.has_generic = config.train.swapout_p > 0.0;
        let collapse = model_config.collapse_params();
        let batches = crate::derivation::build_batches(&dags, config.target_nodes, &collapse)?;

        let train_config = TrainConfig {
            seed: config.train.seed.wrapping_add(loop_index as u64),
            ..config.train.clone()
        };
        let initial = ModelParams::init(&model_config, train_config.seed);
        let (params, stats) = if train_config.workers > 1 {
            train_parallel(&model_config, initial, &batches, &train_config)?
        } else {
            train_sequential(&model_config, initial, &batches, &train_config)?
        };
        let best_val_loss = stats
            .iter()
            .map(|s| s.val_loss)
            .fold(f64::INFINITY, f64::min);
        save_model(&params, &model_config, loop_dir.join("model.bin"))?;
        write_stats_csv(loop_dir.join("stats.csv"), &stats)?;

        let guidance = Guidance {
            params: &params,
            config: &model_config,
            ablation: None,
        };
        let report = sweep_into(
            problems,
            &config.sweep,
            Some(guidance),
            loop_dir.join("logs"),
            false,
        )?;
        write_records_jsonl(loop_dir.join("records.jsonl"), &report.records)?;
        let summary = summarize(&report.records, Some(("loop0", &baseline_records)));
        std::fs::write(
            loop_dir.join("summary.json"),
            serde_json::to_string_pretty(&summary).expect("summary serializes"),
        )?;

        let performance = summary.solved;
        if performance == 0 {
            return Err(LoopError::NoSolutions(loop_index));
        }
        for record in &report.records {
            if record.solved {
                if let Some(log) = &record.log {
                    solved.entry(record.problem.clone()).or_insert(SolvedEntry {
                        first_loop: loop_index,
                        log: log.clone(),
                    });
                }
            }
        }
        rows.push(LoopRow {
            loop_index,
            collected: dags.len(),
            m: model_config.m(),
            performance,
            cumulative: solved.len(),
            pct_collected: Some(performance as f64 / dags.len() as f64),
            v_plus: summary.v_plus,
            v_minus: summary.v_minus,
            best_val_loss: if best_val_loss.is_finite() {
                Some(best_val_loss)
            } else {
                None
            },
        });
    }

    let report = LoopReport { rows };
    std::fs::write(config.out_dir.join("loop_report.csv"), report.to_csv())?;
    std::fs::write(
        config.out_dir.join("loop_report.json"),
        serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    Ok(report)
}
