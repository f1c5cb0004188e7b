//! Benchmark harness: corpus generation, the satisfiability oracle,
//! sweeps, ablations, revealed-axiom selection, and the looping
//! orchestrator.

pub mod corpus;
pub mod looping;
pub mod oracle;
pub mod sweep;

pub use corpus::{gen_corpus, load_corpus, write_corpus, CorpusManifest, CorpusSpec};
pub use looping::{run_loop, LoopConfig, LoopError, LoopReport, LoopRow};
pub use oracle::{ground_resolution, GroundResult, OracleError};
pub use sweep::{
    read_records_jsonl, run_benchmark, summarize, write_records_jsonl, Guidance, RunRecord,
    SweepConfig, SweepReport, SweepSummary,
};

use std::collections::BTreeMap;

use crate::derivation::Dag;

/// The `m` axiom names occurring in the most derivations, ties broken
/// by name; everything else will embed as Unknown.
pub fn select_revealed_axioms(dags: &[Dag], m: usize) -> Vec<String> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for dag in dags {
        for name in dag.axiom_names() {
            *counts.entry(name).or_insert(0) += 1;
        }
    }
    let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked
        .into_iter()
        .take(m)
        .map(|(name, _)| name.to_owned())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::InitialTag;
    use crate::sine::SineLevel;

    fn dag_with(names: &[&str]) -> Dag {
        let mut dag = Dag::new("t");
        for name in names {
            dag.push_initial(InitialTag::Axiom((*name).to_owned()), SineLevel::Reached(1));
        }
        dag
    }

    #[test]
    fn revealed_axioms_rank_by_derivation_count_then_name() {
        let dags = [
            dag_with(&["alpha", "beta"]),
            dag_with(&["alpha", "gamma"]),
            dag_with(&["beta", "alpha"]),
        ];
        // alpha: 3, beta: 2, gamma: 1
        assert_eq!(
            select_revealed_axioms(&dags, 2),
            vec!["alpha".to_owned(), "beta".to_owned()]
        );
        // ties break lexicographically: beta before gamma at equal counts
        let dags = [dag_with(&["beta"]), dag_with(&["gamma"])];
        assert_eq!(
            select_revealed_axioms(&dags, 1),
            vec!["beta".to_owned()]
        );
    }

    #[test]
    fn m_zero_reveals_nothing() {
        let dags = [dag_with(&["alpha"])];
        assert!(select_revealed_axioms(&dags, 0).is_empty());
    }

    #[test]
    fn m_beyond_distinct_names_reveals_all() {
        let dags = [dag_with(&["alpha", "beta"])];
        assert_eq!(select_revealed_axioms(&dags, 10).len(), 2);
    }

    #[test]
    fn duplicate_names_in_one_dag_count_once() {
        let dags = [dag_with(&["alpha", "alpha"]), dag_with(&["beta"])];
        let table = select_revealed_axioms(&dags, 2);
        // alpha and beta both occur in exactly one derivation
        assert_eq!(table, vec!["alpha".to_owned(), "beta".to_owned()]);
    }
}
