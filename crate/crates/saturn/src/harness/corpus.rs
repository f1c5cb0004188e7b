//! Synthetic benchmark corpus: a pool of named axioms shared by every
//! problem, from which each problem draws a provable chain plus junk.
//!
//! The pool for `chains` predicate families of depth `chain_depth` over
//! `constants` constants contains, with stable names and stable clause
//! shapes across all problems:
//!
//! * `step_{k}_{i}`: `~p{k}_{i}(X) | p{k}_{i+1}(X)`; at the designated
//!   wide level the step carries an extra `p{k}_{i+1}(Y)` literal, so
//!   proofs through it exercise factoring.
//! * `base_{k}_{c}`: `p{k}_0(cst{c})`.
//! * `trap_{k}_{i}`: `~p{k}_{i}(X) | t{k}_{i}(X)` — consumes a chain
//!   predicate but leads into a dead end no refutation can use.
//!
//! An unsatisfiable problem poses `~p{k*}_{d}(cst*)` and contains the
//! full useful path (its steps and base), goal-chain traps, and a
//! configurable amount of junk from other chains, which generates
//! derivable-but-useless clauses the unguided prover wastes selections
//! on. Satisfiable decoys keep the chain but base it on the wrong
//! constant (or drop a middle step when only one constant exists).
//! Every emitted problem is certified by the ground-resolution oracle:
//! unsatisfiable ones must be unsat and minimal (dropping any useful
//! axiom makes them sat), decoys must be sat.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fol::{parse_problem, Problem};

use super::oracle::{ground_resolution, OracleError};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub problems: usize,
    /// Every k-th problem is a satisfiable decoy; 0 disables decoys.
    pub sat_every: usize,
    pub chains: usize,
    pub chain_depth: usize,
    pub constants: usize,
    pub min_goal_depth: usize,
    pub max_goal_depth: usize,
    /// Junk chains mixed into each problem, drawn uniformly.
    pub junk_chains_min: usize,
    pub junk_chains_max: usize,
    /// Include the goal chain's trap axioms (junk the masked model
    /// cannot tell from real steps).
    pub goal_traps: bool,
    /// Chain level whose step is the wide three-literal variant.
    pub wide_level: Option<usize>,
    pub seed: u64,
    /// Certify every problem with the ground oracle while generating.
    pub verify: bool,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            problems: 200,
            sat_every: 5,
            chains: 5,
            chain_depth: 6,
            constants: 2,
            min_goal_depth: 2,
            max_goal_depth: 6,
            junk_chains_min: 0,
            junk_chains_max: 4,
            goal_traps: true,
            wide_level: Some(2),
            seed: 7,
            verify: true,
        }
    }
}

impl CorpusSpec {
    /// Trap levels per chain: an early one and a middle one.
    fn trap_levels(&self) -> Vec<usize> {
        let mid = self.chain_depth / 2;
        if mid <= 1 {
            vec![1]
        } else {
            vec![1, mid]
        }
    }

    /// Size of the shared named-axiom pool.
    pub fn pool_size(&self) -> usize {
        self.chains * self.chain_depth
            + self.chains * self.constants
            + self.chains * self.trap_levels().len()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProblemMeta {
    pub name: String,
    pub unsat: bool,
    pub goal_chain: usize,
    pub goal_depth: usize,
    pub junk_chains: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub spec: CorpusSpec,
    pub pool_size: usize,
    pub problems: Vec<ProblemMeta>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("problem {name}: expected {expected}, oracle says otherwise")]
    Certification { name: String, expected: &'static str },
    #[error("problem {name}: dropping useful axiom `{axiom}` keeps it unsatisfiable")]
    NotMinimal { name: String, axiom: String },
    #[error("oracle: {0}")]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("internal: generated problem fails to parse: {0}")]
    Reparse(#[from] crate::fol::ParseError),
}

struct PoolWriter<'s> {
    spec: &'s CorpusSpec,
}

impl PoolWriter<'_> {
    fn step(&self, chain: usize, level: usize) -> (String, String) {
        let name = format!("step_{chain}_{level}");
        let body = if self.spec.wide_level == Some(level) {
            format!("~p{chain}_{level}(X)|p{chain}_{next}(X)|p{chain}_{next}(Y)", next = level + 1)
        } else {
            format!("~p{chain}_{level}(X)|p{chain}_{next}(X)", next = level + 1)
        };
        (name, body)
    }

    fn base(&self, chain: usize, constant: usize) -> (String, String) {
        (
            format!("base_{chain}_{constant}"),
            format!("p{chain}_0(cst{constant})"),
        )
    }

    fn trap(&self, chain: usize, level: usize) -> (String, String) {
        (
            format!("trap_{chain}_{level}"),
            format!("~p{chain}_{level}(X)|t{chain}_{level}(X)"),
        )
    }
}

struct ProblemDraft {
    axioms: Vec<(String, String)>,
    conjecture: String,
}

impl ProblemDraft {
    fn render(&self) -> String {
        let mut out = String::new();
        for (name, body) in &self.axioms {
            out.push_str(&format!("cnf({name}, axiom, {body}).\n"));
        }
        out.push_str(&format!(
            "cnf(goal, negated_conjecture, {}).\n",
            self.conjecture
        ));
        out
    }

    fn without(&self, axiom: &str) -> String {
        let mut out = String::new();
        for (name, body) in &self.axioms {
            if name != axiom {
                out.push_str(&format!("cnf({name}, axiom, {body}).\n"));
            }
        }
        out.push_str(&format!(
            "cnf(goal, negated_conjecture, {}).\n",
            self.conjecture
        ));
        out
    }
}

/// One generated problem: its file text, parsed form, and metadata.
pub struct GeneratedProblem {
    pub meta: ProblemMeta,
    pub text: String,
    pub problem: Problem,
}

/// Generates the corpus deterministically from the spec.
pub fn gen_corpus(spec: &CorpusSpec) -> Result<Vec<GeneratedProblem>, CorpusError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pool = PoolWriter { spec };
    let mut out = Vec::with_capacity(spec.problems);

    for index in 0..spec.problems {
        let name = format!("prob_{index:03}");
        let sat = spec.sat_every > 0 && (index + 1) % spec.sat_every == 0;
        let goal_chain = rng.gen_range(0..spec.chains);
        let goal_depth = rng.gen_range(spec.min_goal_depth..=spec.max_goal_depth);
        let goal_const = rng.gen_range(0..spec.constants);
        let junk_count = rng.gen_range(spec.junk_chains_min..=spec.junk_chains_max);

        let mut axioms: Vec<(String, String)> = Vec::new();
        let mut useful: Vec<String> = Vec::new();

        // the useful path
        for level in 0..goal_depth {
            let (step_name, step_body) = pool.step(goal_chain, level);
            useful.push(step_name.clone());
            axioms.push((step_name, step_body));
        }
        if sat && spec.constants < 2 {
            // single-constant corpora break the chain instead
            let drop_level = rng.gen_range(0..goal_depth);
            let (drop_name, _) = pool.step(goal_chain, drop_level);
            axioms.retain(|(n, _)| n != &drop_name);
            useful.retain(|n| n != &drop_name);
        }
        let base_const = if sat && spec.constants >= 2 {
            // base the chain on a different constant: a near miss
            (goal_const + 1) % spec.constants
        } else {
            goal_const
        };
        let (base_name, base_body) = pool.base(goal_chain, base_const);
        if !sat {
            useful.push(base_name.clone());
        }
        axioms.push((base_name, base_body));

        // goal-chain traps: reachable junk the mask ablation cannot
        // tell apart from real steps
        if spec.goal_traps {
            for &level in &spec.trap_levels() {
                if level < goal_depth {
                    let (n, b) = pool.trap(goal_chain, level);
                    axioms.push((n, b));
                }
            }
        }

        // junk chains: full derivable machinery that never touches the
        // goal; full depth and every base, so each junk chain floods the
        // passive set with derivable-but-useless units
        let mut junk_pool: Vec<usize> = (0..spec.chains).filter(|&k| k != goal_chain).collect();
        for _ in 0..junk_count.min(junk_pool.len()) {
            let pick = rng.gen_range(0..junk_pool.len());
            let chain = junk_pool.swap_remove(pick);
            for level in 0..spec.chain_depth {
                let (n, b) = pool.step(chain, level);
                axioms.push((n, b));
            }
            for constant in 0..spec.constants {
                let (n, b) = pool.base(chain, constant);
                axioms.push((n, b));
            }
            for &level in &spec.trap_levels() {
                let (n, b) = pool.trap(chain, level);
                axioms.push((n, b));
            }
        }

        let draft = ProblemDraft {
            axioms,
            conjecture: format!("~p{goal_chain}_{goal_depth}(cst{goal_const})"),
        };
        let text = draft.render();
        let problem = parse_problem(&text)?;

        if spec.verify {
            let result = ground_resolution(&problem)?;
            if result.unsat == sat {
                return Err(CorpusError::Certification {
                    name,
                    expected: if sat { "sat" } else { "unsat" },
                });
            }
            if !sat {
                // minimality: every useful axiom is in every refutation
                for axiom in &useful {
                    let reduced = parse_problem(&draft.without(axiom))?;
                    if ground_resolution(&reduced)?.unsat {
                        return Err(CorpusError::NotMinimal {
                            name,
                            axiom: axiom.clone(),
                        });
                    }
                }
            }
        }

        out.push(GeneratedProblem {
            meta: ProblemMeta {
                name,
                unsat: !sat,
                goal_chain,
                goal_depth,
                junk_chains: junk_count,
            },
            text,
            problem,
        });
    }
    Ok(out)
}

/// Writes one `.p` file per problem plus `manifest.json`.
pub fn write_corpus(dir: impl AsRef<Path>, spec: &CorpusSpec) -> Result<CorpusManifest, CorpusError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let problems = gen_corpus(spec)?;
    let mut metas = Vec::with_capacity(problems.len());
    for generated in &problems {
        std::fs::write(dir.join(format!("{}.p", generated.meta.name)), &generated.text)?;
        metas.push(generated.meta.clone());
    }
    let manifest = CorpusManifest {
        spec: spec.clone(),
        pool_size: spec.pool_size(),
        problems: metas,
    };
    std::fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;
    Ok(manifest)
}

/// Loads every `.p` file of a corpus directory, sorted by file name.
pub fn load_corpus(dir: impl AsRef<Path>) -> Result<Vec<(String, Problem)>, CorpusError> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|e| e == "p"))
        .collect();
    entries.sort();
    let mut out = Vec::with_capacity(entries.len());
    for path in entries {
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_owned();
        let text = std::fs::read_to_string(&path)?;
        out.push((name, parse_problem(&text)?));
    }
    Ok(out)
}
