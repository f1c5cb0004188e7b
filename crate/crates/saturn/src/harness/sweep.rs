//! Benchmark sweeps: run the prover over a problem set, collect one
//! record per problem, verify and persist derivation logs, and compare
//! against a named baseline run.
//!
//! With the `parallel` feature (the default) a sweep fans problems out
//! across a rayon thread pool; without it, or with `parallel: false`,
//! problems run sequentially. Per-problem results are identical either
//! way since runs share no state.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::fol::Problem;
use crate::model::{AblationMode, Guide, ModelConfig, ModelParams};
use crate::saturation::{replay, saturate, Limits, Outcome, ProverOutput, SelectorConfig};

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub selector: SelectorConfig,
    pub limits: Limits,
    /// Fan problems out over a rayon pool (needs the `parallel` feature).
    pub parallel: bool,
    /// Worker threads for the pool; 0 picks rayon's default.
    pub jobs: usize,
    /// Directory for derivation logs, one `<problem>.dlog` each.
    pub log_dir: Option<PathBuf>,
    /// Persist logs of unsolved runs too (the looping orchestrator
    /// needs failed baseline runs for augmentation).
    pub log_failures: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            selector: SelectorConfig::default(),
            limits: Limits::selections(10_000),
            parallel: cfg!(feature = "parallel"),
            jobs: 0,
            log_dir: None,
            log_failures: false,
        }
    }
}

/// A loaded model plus an optional evaluation-time override.
#[derive(Clone, Copy)]
pub struct Guidance<'m> {
    pub params: &'m ModelParams,
    pub config: &'m ModelConfig,
    pub ablation: Option<AblationMode>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem: String,
    pub outcome: String,
    pub solved: bool,
    pub selections: u64,
    pub generated: u64,
    pub retained: u64,
    pub model_evaluations: u64,
    pub wall_ms: f64,
    pub model_eval_ms: f64,
    pub eval_fraction: f64,
    pub log: Option<PathBuf>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SweepSummary {
    pub attempted: usize,
    pub solved: usize,
    pub saturated: usize,
    pub limit_reached: usize,
    pub quarantined: usize,
    pub mean_eval_fraction: f64,
    pub baseline: Option<String>,
    pub v_plus: usize,
    pub v_minus: usize,
    pub v_plus_problems: Vec<String>,
    pub v_minus_problems: Vec<String>,
}

/// Everything a sweep produced. Outputs line up with records; a
/// quarantined problem has no output.
pub struct SweepReport {
    pub records: Vec<RunRecord>,
    pub outputs: Vec<Option<ProverOutput>>,
    pub summary: SweepSummary,
}

fn run_one(
    name: &str,
    problem: &Problem,
    config: &SweepConfig,
    guidance: Option<Guidance<'_>>,
) -> (RunRecord, Option<ProverOutput>) {
    let started = Instant::now();
    let attempt = catch_unwind(AssertUnwindSafe(|| {
        match guidance {
            Some(g) => {
                let mut guide = Guide::new(g.params, g.config, g.ablation)
                    .map_err(|e| e.to_string())?;
                saturate(problem, &config.selector, &config.limits, Some(&mut guide))
                    .map_err(|e| e.to_string())
            }
            None => saturate(problem, &config.selector, &config.limits, None)
                .map_err(|e| e.to_string()),
        }
    }));
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;

    let mut record = RunRecord {
        problem: name.to_owned(),
        outcome: "error".to_owned(),
        solved: false,
        selections: 0,
        generated: 0,
        retained: 0,
        model_evaluations: 0,
        wall_ms,
        model_eval_ms: 0.0,
        eval_fraction: 0.0,
        log: None,
        error: None,
    };

    let mut output = match attempt {
        Ok(Ok(output)) => output,
        Ok(Err(message)) => {
            record.error = Some(message);
            return (record, None);
        }
        Err(_) => {
            record.error = Some("panicked".to_owned());
            return (record, None);
        }
    };
    output.dag.problem = name.to_owned();

    let stats = &output.result.stats;
    record.outcome = match output.result.outcome {
        Outcome::Proof { .. } => "proof",
        Outcome::Saturated => "saturated",
        Outcome::LimitReached => "limit",
    }
    .to_owned();
    record.solved = output.result.outcome.is_proof();
    record.selections = stats.selections;
    record.generated = stats.generated;
    record.retained = stats.retained;
    record.model_evaluations = stats.model_evaluations;
    record.model_eval_ms = stats.model_eval_time.as_secs_f64() * 1e3;
    record.eval_fraction = if wall_ms > 0.0 {
        (record.model_eval_ms / wall_ms).clamp(0.0, 1.0)
    } else {
        0.0
    };

    // a solved run must replay before its log may feed training
    if record.solved {
        if let Err(e) = replay(&output) {
            record.outcome = "error".to_owned();
            record.solved = false;
            record.error = Some(format!("replay failed: {e}"));
            return (record, None);
        }
    }
    (record, Some(output))
}

fn write_log_file(
    dir: &Path,
    record: &mut RunRecord,
    output: &ProverOutput,
) -> std::io::Result<()> {
    let path = dir.join(format!("{}.dlog", record.problem));
    std::fs::write(&path, crate::derivation::write_log(&output.dag))?;
    record.log = Some(path);
    Ok(())
}

/// Runs the prover over every problem and aggregates the records.
pub fn run_benchmark(
    problems: &[(String, Problem)],
    config: &SweepConfig,
    guidance: Option<Guidance<'_>>,
) -> std::io::Result<SweepReport> {
    let run_all = || -> Vec<(RunRecord, Option<ProverOutput>)> {
        #[cfg(feature = "parallel")]
        if config.parallel {
            use rayon::prelude::*;
            let body = || {
                problems
                    .par_iter()
                    .map(|(name, problem)| run_one(name, problem, config, guidance))
                    .collect()
            };
            return if config.jobs > 0 {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(config.jobs)
                    .build()
                    .expect("rayon pool")
                    .install(body)
            } else {
                body()
            };
        }
        problems
            .iter()
            .map(|(name, problem)| run_one(name, problem, config, guidance))
            .collect()
    };

    let mut records = Vec::with_capacity(problems.len());
    let mut outputs = Vec::with_capacity(problems.len());
    for (mut record, output) in run_all() {
        if let (Some(dir), Some(out)) = (&config.log_dir, &output) {
            if record.solved || config.log_failures {
                std::fs::create_dir_all(dir)?;
                write_log_file(dir, &mut record, out)?;
            }
        }
        records.push(record);
        outputs.push(output);
    }

    let summary = summarize(&records, None);
    Ok(SweepReport {
        records,
        outputs,
        summary,
    })
}

/// Builds the summary, optionally against a named baseline run.
pub fn summarize(records: &[RunRecord], baseline: Option<(&str, &[RunRecord])>) -> SweepSummary {
    let mut summary = SweepSummary {
        attempted: records.len(),
        ..SweepSummary::default()
    };
    let mut fraction_sum = 0.0;
    let mut fraction_count = 0usize;
    for r in records {
        match r.outcome.as_str() {
            "proof" => summary.solved += 1,
            "saturated" => summary.saturated += 1,
            "limit" => summary.limit_reached += 1,
            _ => summary.quarantined += 1,
        }
        if r.error.is_none() {
            fraction_sum += r.eval_fraction;
            fraction_count += 1;
        }
    }
    summary.mean_eval_fraction = if fraction_count > 0 {
        fraction_sum / fraction_count as f64
    } else {
        0.0
    };
    if let Some((name, base)) = baseline {
        let solved = |rs: &[RunRecord]| -> std::collections::BTreeSet<String> {
            rs.iter()
                .filter(|r| r.solved)
                .map(|r| r.problem.clone())
                .collect()
        };
        let ours = solved(records);
        let theirs = solved(base);
        summary.baseline = Some(name.to_owned());
        summary.v_plus_problems = ours.difference(&theirs).cloned().collect();
        summary.v_minus_problems = theirs.difference(&ours).cloned().collect();
        summary.v_plus = summary.v_plus_problems.len();
        summary.v_minus = summary.v_minus_problems.len();
    }
    summary
}

pub fn write_records_jsonl(path: impl AsRef<Path>, records: &[RunRecord]) -> std::io::Result<()> {
    use std::io::Write as _;
    let mut file = std::fs::File::create(path)?;
    for r in records {
        writeln!(file, "{}", serde_json::to_string(r).expect("record serializes"))?;
    }
    Ok(())
}

pub fn read_records_jsonl(path: impl AsRef<Path>) -> std::io::Result<Vec<RunRecord>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .map(|line| {
            serde_json::from_str(line)
                .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
        })
        .collect()
}
