//! Command-line interface: corpus generation, single proofs, benchmark
//! sweeps, training, ablation sweeps, and the looping orchestrator.

use std::path::PathBuf;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use saturn::derivation::{build_batches, label_dag, parse_log, write_log, Dag};
use saturn::fol::parse_problem;
use saturn::harness::{
    self, read_records_jsonl, run_benchmark, select_revealed_axioms, summarize,
    write_records_jsonl, CorpusSpec, Guidance, LoopConfig, SweepConfig,
};
use saturn::model::{load_model, save_model, AblationMode, Guide, ModelConfig, ModelParams};
use saturn::saturation::{saturate, Limits, Outcome, SelectorConfig};
use saturn::training::{train_parallel, train_sequential, write_stats_csv, TrainConfig};

#[derive(Parser)]
#[command(
    name = "saturn",
    about = "Saturation prover with derivation-history clause selection guidance",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic benchmark corpus.
    GenCorpus(GenCorpusArgs),
    /// Prove a single problem file.
    Prove(ProveArgs),
    /// Run the prover over a corpus directory.
    Sweep(SweepArgs),
    /// Train a model from derivation logs.
    Train(TrainArgs),
    /// Run a sweep with an evaluation-time ablation of a model.
    Ablate(AblateArgs),
    /// Baseline sweep, then train/sweep loops.
    Loop(LoopArgs),
}

fn parse_ratio(text: &str) -> std::result::Result<(u32, u32), String> {
    let (a, b) = text
        .split_once(':')
        .ok_or_else(|| format!("`{text}` is not of the form A:B"))?;
    let a: u32 = a.parse().map_err(|_| format!("bad ratio component `{a}`"))?;
    let b: u32 = b.parse().map_err(|_| format!("bad ratio component `{b}`"))?;
    if a + b == 0 {
        return Err("ratio needs a positive component".to_owned());
    }
    Ok((a, b))
}

fn parse_ablation(text: &str) -> std::result::Result<AblationMode, String> {
    AblationMode::parse(text).ok_or_else(|| {
        format!("`{text}` is not one of mask_axioms, generic_rules, fix_sine:<level>")
    })
}

#[derive(Args, Clone)]
struct ProverFlags {
    /// Second-level ratio between the model-positive view and all clauses.
    #[arg(long, value_parser = parse_ratio, default_value = "2:1")]
    ratio: (u32, u32),
    /// Age/weight alternation inside each view.
    #[arg(long, value_parser = parse_ratio, default_value = "1:1")]
    age_weight: (u32, u32),
    #[arg(long, default_value_t = 10_000)]
    max_selections: u64,
    /// Wall-clock limit per problem, in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long, default_value_t = saturn::sine::DEFAULT_TOLERANCE)]
    sine_tolerance: f64,
}

impl ProverFlags {
    fn selector(&self, record_trace: bool) -> SelectorConfig {
        SelectorConfig {
            age_weight_ratio: self.age_weight,
            second_level_ratio: self.ratio,
            sine_tolerance: self.sine_tolerance,
            record_trace,
        }
    }

    fn limits(&self) -> Limits {
        Limits {
            max_selections: Some(self.max_selections),
            wall_time: self.time_limit.map(Duration::from_secs_f64),
        }
    }
}

#[derive(Args)]
struct GenCorpusArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 200)]
    problems: usize,
    /// Every k-th problem is a satisfiable decoy (0 disables).
    #[arg(long, default_value_t = 5)]
    sat_every: usize,
    #[arg(long, default_value_t = 5)]
    chains: usize,
    #[arg(long, default_value_t = 6)]
    depth: usize,
    #[arg(long, default_value_t = 2)]
    constants: usize,
    #[arg(long, default_value_t = 2)]
    min_goal_depth: usize,
    #[arg(long, default_value_t = 6)]
    max_goal_depth: usize,
    #[arg(long, default_value_t = 0)]
    junk_min: usize,
    #[arg(long, default_value_t = 4)]
    junk_max: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Skip the oracle certification of every generated problem.
    #[arg(long)]
    no_verify: bool,
}

#[derive(Args)]
struct ProveArgs {
    file: PathBuf,
    #[command(flatten)]
    prover: ProverFlags,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, value_parser = parse_ablation)]
    ablate: Option<AblationMode>,
    /// Write the selection trace CSV: tick, source (A|B|fallback), clause id.
    #[arg(long)]
    trace_selections: Option<PathBuf>,
    /// Write the derivation log here.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Directory of `.p` problem files.
    #[arg(long)]
    problems: PathBuf,
    /// Output directory: records.jsonl, summary.json, logs/.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    prover: ProverFlags,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, value_parser = parse_ablation)]
    ablate: Option<AblationMode>,
    /// Records of a baseline run to compare against (records.jsonl).
    #[arg(long)]
    baseline: Option<PathBuf>,
    /// Thread count for the sweep (0 = rayon default).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Run problems one at a time even with the parallel feature on.
    #[arg(long)]
    sequential: bool,
    /// Persist derivation logs of unsolved runs too.
    #[arg(long)]
    log_failures: bool,
}

#[derive(Args)]
struct TrainArgs {
    /// Directory of `.dlog` derivation logs.
    #[arg(long)]
    logs: PathBuf,
    /// Model file to write.
    #[arg(long)]
    out: PathBuf,
    /// Per-epoch stats CSV.
    #[arg(long)]
    stats: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    epochs: u32,
    #[arg(long, default_value_t = 2.0e-4)]
    alpha_max: f64,
    #[arg(long, default_value_t = 40)]
    warmup: u32,
    #[arg(long, default_value_t = 0.9)]
    split: f64,
    #[arg(long, default_value_t = 0.0)]
    swapout: f64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Embedding dimension.
    #[arg(long, default_value_t = 64)]
    n: usize,
    /// Revealed-axiom budget.
    #[arg(long, default_value_t = 1000)]
    m: usize,
    #[arg(long, default_value_t = 16)]
    sine_cap: u32,
    /// Train without the SInE embedder.
    #[arg(long)]
    no_sine: bool,
    /// Target collapsed nodes per batch.
    #[arg(long, default_value_t = 20_000)]
    batch_nodes: usize,
}

#[derive(Args)]
struct AblateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_parser = parse_ablation)]
    mode: AblationMode,
    #[arg(long)]
    problems: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    prover: ProverFlags,
    #[arg(long)]
    baseline: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct LoopArgs {
    #[arg(long)]
    problems: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Guided loops after the baseline loop.
    #[arg(long, default_value_t = 1)]
    loops: usize,
    #[command(flatten)]
    prover: ProverFlags,
    #[arg(long, default_value_t = 30)]
    epochs: u32,
    #[arg(long, default_value_t = 2.0e-4)]
    alpha_max: f64,
    #[arg(long, default_value_t = 10)]
    warmup: u32,
    #[arg(long, default_value_t = 0.9)]
    split: f64,
    #[arg(long, default_value_t = 0.0)]
    swapout: f64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 32)]
    n: usize,
    #[arg(long, default_value_t = 50)]
    m: usize,
    #[arg(long, default_value_t = 16)]
    sine_cap: u32,
    #[arg(long)]
    no_sine: bool,
    #[arg(long, default_value_t = 20_000)]
    batch_nodes: usize,
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long)]
    sequential: bool,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::GenCorpus(args) => gen_corpus_cmd(args),
        Command::Prove(args) => prove_cmd(args),
        Command::Sweep(args) => sweep_cmd(args),
        Command::Train(args) => train_cmd(args),
        Command::Ablate(args) => ablate_cmd(args),
        Command::Loop(args) => loop_cmd(args),
    }
}

fn gen_corpus_cmd(args: GenCorpusArgs) -> Result<()> {
    let spec = CorpusSpec {
        problems: args.problems,
        sat_every: args.sat_every,
        chains: args.chains,
        chain_depth: args.depth,
        constants: args.constants,
        min_goal_depth: args.min_goal_depth,
        max_goal_depth: args.max_goal_depth.min(args.depth),
        junk_chains_min: args.junk_min,
        junk_chains_max: args.junk_max,
        goal_traps: true,
        wide_level: Some(2.min(args.depth.saturating_sub(1))),
        seed: args.seed,
        verify: !args.no_verify,
    };
    let manifest = harness::write_corpus(&args.out, &spec)
        .with_context(|| format!("writing corpus to {}", args.out.display()))?;
    let unsat = manifest.problems.iter().filter(|p| p.unsat).count();
    println!(
        "wrote {} problems ({} unsatisfiable, {} decoys) over a pool of {} axioms to {}",
        manifest.problems.len(),
        unsat,
        manifest.problems.len() - unsat,
        manifest.pool_size,
        args.out.display()
    );
    Ok(())
}

fn load_guidance(path: &std::path::Path) -> Result<(ModelParams, ModelConfig)> {
    load_model(path).with_context(|| format!("loading model {}", path.display()))
}

fn prove_cmd(args: ProveArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.file)
        .with_context(|| format!("reading {}", args.file.display()))?;
    let problem =
        parse_problem(&text).map_err(|e| anyhow::anyhow!("{}: {e}", args.file.display()))?;
    let selector = args.prover.selector(args.trace_selections.is_some());
    let limits = args.prover.limits();

    let loaded = match &args.model {
        Some(path) => Some(load_guidance(path)?),
        None => {
            if args.ablate.is_some() {
                bail!("--ablate needs --model");
            }
            None
        }
    };
    let output = match &loaded {
        Some((params, config)) => {
            let mut guide = Guide::new(params, config, args.ablate)?;
            if guide.fix_sine_is_noop() {
                eprintln!("note: this model ignores SInE levels; fix_sine changes nothing");
            }
            saturate(&problem, &selector, &limits, Some(&mut guide))?
        }
        None => saturate(&problem, &selector, &limits, None)?,
    };

    let stats = &output.result.stats;
    let verdict = match output.result.outcome {
        Outcome::Proof { .. } => "proof",
        Outcome::Saturated => "saturated",
        Outcome::LimitReached => "limit-reached",
    };
    println!("outcome: {verdict}");
    println!("selections: {}", stats.selections);
    println!("generated: {}", stats.generated);
    println!("retained: {}", stats.retained);
    if args.model.is_some() {
        println!("model-evaluations: {}", stats.model_evaluations);
        println!(
            "model-eval-time-ms: {:.3}",
            stats.model_eval_time.as_secs_f64() * 1e3
        );
    }
    if let Outcome::Proof { .. } = output.result.outcome {
        println!(
            "proof-nodes: {}",
            output.dag.proof.as_ref().map_or(0, |p| p.len())
        );
    }

    if let Some(path) = &args.trace_selections {
        let mut csv = String::from("tick,source,clause_id\n");
        for entry in output.trace.as_deref().unwrap_or(&[]) {
            csv.push_str(&format!(
                "{},{},{}\n",
                entry.tick,
                entry.source.as_str(),
                entry.clause
            ));
        }
        std::fs::write(path, csv)?;
    }
    if let Some(path) = &args.log {
        let mut dag = output.dag.clone();
        dag.problem = args
            .file
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("problem")
            .to_owned();
        std::fs::write(path, write_log(&dag))?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_sweep_like(
    problems_dir: &std::path::Path,
    out_dir: &std::path::Path,
    prover: &ProverFlags,
    model: Option<&std::path::Path>,
    ablation: Option<AblationMode>,
    baseline: Option<&std::path::Path>,
    jobs: usize,
    sequential: bool,
    log_failures: bool,
) -> Result<()> {
    let problems = harness::load_corpus(problems_dir)
        .with_context(|| format!("loading corpus {}", problems_dir.display()))?;
    std::fs::create_dir_all(out_dir)?;
    let config = SweepConfig {
        selector: prover.selector(false),
        limits: prover.limits(),
        parallel: !sequential,
        jobs,
        log_dir: Some(out_dir.join("logs")),
        log_failures,
    };
    let loaded = match model {
        Some(path) => Some(load_guidance(path)?),
        None => None,
    };
    if let (Some((params, model_config)), Some(mode)) = (&loaded, ablation) {
        // surface the documented noop case before a long sweep
        let guide = Guide::new(params, model_config, Some(mode))?;
        if guide.fix_sine_is_noop() {
            eprintln!("note: this model ignores SInE levels; fix_sine changes nothing");
        }
    }
    let guidance = loaded.as_ref().map(|(params, model_config)| Guidance {
        params,
        config: model_config,
        ablation,
    });
    let report = run_benchmark(&problems, &config, guidance)?;
    write_records_jsonl(out_dir.join("records.jsonl"), &report.records)?;
    let summary = match baseline {
        Some(path) => {
            let base = read_records_jsonl(path)
                .with_context(|| format!("reading baseline {}", path.display()))?;
            summarize(
                &report.records,
                Some((path.to_string_lossy().as_ref(), &base)),
            )
        }
        None => report.summary.clone(),
    };
    std::fs::write(
        out_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    println!(
        "solved {}/{} (saturated {}, limit {}, errors {}); mean eval fraction {:.3}",
        summary.solved,
        summary.attempted,
        summary.saturated,
        summary.limit_reached,
        summary.quarantined,
        summary.mean_eval_fraction
    );
    if summary.baseline.is_some() {
        println!("V+ {}  V- {}", summary.v_plus, summary.v_minus);
    }
    Ok(())
}

fn sweep_cmd(args: SweepArgs) -> Result<()> {
    if args.ablate.is_some() && args.model.is_none() {
        bail!("--ablate needs --model");
    }
    run_sweep_like(
        &args.problems,
        &args.out,
        &args.prover,
        args.model.as_deref(),
        args.ablate,
        args.baseline.as_deref(),
        args.jobs,
        args.sequential,
        args.log_failures,
    )
}

fn ablate_cmd(args: AblateArgs) -> Result<()> {
    run_sweep_like(
        &args.problems,
        &args.out,
        &args.prover,
        Some(&args.model),
        Some(args.mode),
        args.baseline.as_deref(),
        args.jobs,
        args.sequential,
        false,
    )
}

fn train_cmd(args: TrainArgs) -> Result<()> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&args.logs)
        .with_context(|| format!("reading {}", args.logs.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "dlog"))
        .collect();
    paths.sort();
    let mut dags: Vec<Dag> = Vec::new();
    let mut skipped = 0usize;
    for path in &paths {
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("derivation")
            .to_owned();
        let text = std::fs::read_to_string(path)?;
        let dag =
            parse_log(&text, name).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        if dag.proof.is_some() && label_dag(&dag).is_ok() {
            dags.push(dag);
        } else {
            skipped += 1;
        }
    }
    if dags.is_empty() {
        bail!("no labeled derivations under {}", args.logs.display());
    }
    if skipped > 0 {
        eprintln!("skipped {skipped} derivations without a usable proof");
    }

    let revealed = select_revealed_axioms(&dags, args.m);
    let mut model_config = ModelConfig::new(args.n, revealed);
    model_config.sine_cap = args.sine_cap;
    model_config.sine_enabled = !args.no_sine;
    model_config.has_generic = args.swapout > 0.0;
    let collapse = model_config.collapse_params();
    let batches = build_batches(&dags, args.batch_nodes, &collapse)?;
    println!(
        "training on {} derivations in {} batches; m = {}, {} parameters",
        dags.len(),
        batches.len(),
        model_config.m(),
        model_config.param_count()
    );

    let tc = TrainConfig {
        epochs: args.epochs,
        alpha_max: args.alpha_max,
        warmup_epochs: args.warmup,
        split: args.split,
        swapout_p: args.swapout,
        workers: args.workers,
        seed: args.seed,
    };
    let initial = ModelParams::init(&model_config, tc.seed);
    let (params, stats) = if tc.workers > 1 {
        train_parallel(&model_config, initial, &batches, &tc)?
    } else {
        train_sequential(&model_config, initial, &batches, &tc)?
    };
    if let Some(best) = stats
        .iter()
        .min_by(|a, b| a.val_loss.total_cmp(&b.val_loss))
    {
        println!(
            "best epoch {}: val loss {:.4}, TPR {:.3}, TNR {:.3}",
            best.epoch, best.val_loss, best.tpr, best.tnr
        );
    }
    save_model(&params, &model_config, &args.out)?;
    println!("model written to {}", args.out.display());
    if let Some(stats_path) = &args.stats {
        write_stats_csv(stats_path, &stats)?;
    }
    Ok(())
}

fn loop_cmd(args: LoopArgs) -> Result<()> {
    let problems = harness::load_corpus(&args.problems)
        .with_context(|| format!("loading corpus {}", args.problems.display()))?;
    let config = LoopConfig {
        loops: args.loops,
        out_dir: args.out.clone(),
        sweep: SweepConfig {
            selector: args.prover.selector(false),
            limits: args.prover.limits(),
            parallel: !args.sequential,
            jobs: args.jobs,
            log_dir: None,
            log_failures: false,
        },
        train: TrainConfig {
            epochs: args.epochs,
            alpha_max: args.alpha_max,
            warmup_epochs: args.warmup,
            split: args.split,
            swapout_p: args.swapout,
            workers: args.workers,
            seed: args.seed,
        },
        n: args.n,
        m: args.m,
        sine_cap: args.sine_cap,
        sine_enabled: !args.no_sine,
        target_nodes: args.batch_nodes,
    };
    let report = harness::run_loop(&problems, &config)?;
    println!("loop,collected,m,performance,cumulative,pct_collected,v_plus,v_minus");
    for row in &report.rows {
        println!(
            "{},{},{},{},{},{},{},{}",
            row.loop_index,
            row.collected,
            row.m,
            row.performance,
            row.cumulative,
            row.pct_collected
                .map_or(String::from("-"), |p| format!("{p:.3}")),
            row.v_plus,
            row.v_minus
        );
    }
    println!(
        "report written to {}",
        args.out.join("loop_report.csv").display()
    );
    Ok(())
}
