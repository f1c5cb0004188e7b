//! Prover-side model evaluation. The guide keys every retained clause
//! by its collapse identity (tag and level for leaves, rule and premise
//! keys for derived clauses) and caches one embedding and score per
//! key, so structurally indistinguishable clauses cost one evaluation.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use ndarray::Array1;

use crate::derivation::{InitTag, NodeId};
use crate::fol::Clause;
use crate::saturation::{Advisor, AdvisorError, Provenance, RuleId};
use crate::sine::SineLevel;

use super::{classify, embed_derived, embed_initial, evaluate, ModelConfig, ModelError, ModelParams};

/// Evaluation-time behavior overrides mirroring the ablation studies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AblationMode {
    /// Present every initial clause except the conjecture as Unknown.
    MaskAxioms,
    /// Use the generic per-arity deriv blocks everywhere.
    GenericRules,
    /// Hardwire this SInE level on every initial clause.
    FixSine(u32),
}

impl AblationMode {
    pub fn parse(text: &str) -> Option<AblationMode> {
        match text {
            "mask_axioms" => Some(AblationMode::MaskAxioms),
            "generic_rules" => Some(AblationMode::GenericRules),
            other => other
                .strip_prefix("fix_sine:")
                .or_else(|| other.strip_prefix("fix_sine="))
                .and_then(|l| l.parse().ok())
                .map(AblationMode::FixSine),
        }
    }
}

impl std::fmt::Display for AblationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AblationMode::MaskAxioms => write!(f, "mask_axioms"),
            AblationMode::GenericRules => write!(f, "generic_rules"),
            AblationMode::FixSine(l) => write!(f, "fix_sine:{l}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum GuideKey {
    Initial { tag: InitTag, capped_level: u32 },
    Derived { rule: RuleId, premises: Vec<usize> },
}

/// A loaded model wired up as a prover [`Advisor`].
pub struct Guide<'m> {
    params: &'m ModelParams,
    config: &'m ModelConfig,
    ablation: Option<AblationMode>,
    fix_sine_noop: bool,
    revealed: HashMap<String, u32>,
    node_keys: HashMap<NodeId, usize>,
    interner: HashMap<GuideKey, usize>,
    cache: Vec<(Array1<f64>, f64)>,
    evaluations: u64,
    eval_time: Duration,
}

impl<'m> Guide<'m> {
    pub fn new(
        params: &'m ModelParams,
        config: &'m ModelConfig,
        ablation: Option<AblationMode>,
    ) -> Result<Self, ModelError> {
        let mut fix_sine_noop = false;
        match ablation {
            Some(AblationMode::GenericRules) if !config.has_generic => {
                return Err(ModelError::NoGenericBlocks);
            }
            Some(AblationMode::FixSine(_)) if !config.sine_enabled => {
                fix_sine_noop = true;
            }
            _ => {}
        }
        Ok(Guide {
            params,
            config,
            ablation,
            fix_sine_noop,
            revealed: config
                .revealed_axioms
                .iter()
                .enumerate()
                .map(|(i, name)| (name.clone(), i as u32))
                .collect(),
            node_keys: HashMap::new(),
            interner: HashMap::new(),
            cache: Vec::new(),
            evaluations: 0,
            eval_time: Duration::ZERO,
        })
    }

    /// True when a fix_sine ablation was requested on a model that
    /// never sees levels; the run proceeds but callers should tell the
    /// user the flag changes nothing.
    pub fn fix_sine_is_noop(&self) -> bool {
        self.fix_sine_noop
    }

    fn tag_for(&self, axiom: Option<&str>) -> InitTag {
        let Some(name) = axiom else {
            return InitTag::Goal;
        };
        if matches!(self.ablation, Some(AblationMode::MaskAxioms)) {
            return InitTag::Unknown;
        }
        match self.revealed.get(name) {
            Some(&idx) => InitTag::Named(idx),
            None => InitTag::Unknown,
        }
    }

    fn capped_level(&self, level: SineLevel) -> u32 {
        if !self.config.sine_enabled {
            return 0;
        }
        let level = match self.ablation {
            Some(AblationMode::FixSine(l)) => SineLevel::Reached(l),
            _ => level,
        };
        match level {
            SineLevel::Reached(l) => l.min(self.config.sine_cap),
            SineLevel::Unreached => self.config.sine_cap,
        }
    }

    fn score_key(&mut self, key: GuideKey) -> Result<usize, ModelError> {
        if let Some(&id) = self.interner.get(&key) {
            return Ok(id);
        }
        let started = Instant::now();
        let embedding = match &key {
            GuideKey::Initial { tag, capped_level } => {
                embed_initial(*tag, *capped_level, self.params, self.config)?
            }
            GuideKey::Derived { rule, premises } => {
                let vectors: Vec<Array1<f64>> = premises
                    .iter()
                    .map(|&k| self.cache[k].0.clone())
                    .collect();
                let use_generic = matches!(self.ablation, Some(AblationMode::GenericRules));
                embed_derived(*rule, &vectors, self.params, self.config, use_generic)?
            }
        };
        let score = evaluate(&embedding, self.params);
        self.eval_time += started.elapsed();
        self.evaluations += 1;
        let id = self.cache.len();
        self.cache.push((embedding, score));
        self.interner.insert(key, id);
        Ok(id)
    }
}

impl Advisor for Guide<'_> {
    fn classify(
        &mut self,
        node: NodeId,
        _clause: &Clause,
        provenance: Provenance<'_>,
    ) -> Result<bool, AdvisorError> {
        let key = match provenance {
            Provenance::Initial { axiom, level } => GuideKey::Initial {
                tag: self.tag_for(axiom),
                capped_level: self.capped_level(level),
            },
            Provenance::Derived { rule, premises } => GuideKey::Derived {
                rule,
                premises: premises.iter().map(|p| self.node_keys[p]).collect(),
            },
        };
        let key_id = self
            .score_key(key)
            .map_err(|e| AdvisorError(e.to_string()))?;
        self.node_keys.insert(node, key_id);
        Ok(classify(self.cache[key_id].1))
    }

    fn evaluations(&self) -> u64 {
        self.evaluations
    }

    fn eval_time(&self) -> Duration {
        self.eval_time
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fol::parse_problem;
    use crate::saturation::{saturate, Limits, SelectorConfig};

    fn guided_run(text: &str, guide: &mut Guide<'_>) -> crate::saturation::ProverOutput {
        let problem = parse_problem(text).unwrap();
        saturate(
            &problem,
            &SelectorConfig::default(),
            &Limits::selections(200),
            Some(guide),
        )
        .unwrap()
    }

    #[test]
    fn cache_hits_keep_evaluation_count_at_distinct_keys() {
        let config = ModelConfig::new(8, vec!["ax_a".into()]);
        let params = ModelParams::init(&config, 5);
        let mut guide = Guide::new(&params, &config, None).unwrap();
        // two unknown axioms at the same unreached level share one key;
        // the goal is another; derived clauses key on premises and rule
        let out = guided_run(
            "cnf(j1, axiom, q1(b)).\n\
             cnf(j2, axiom, q2(b)).\n\
             cnf(g, negated_conjecture, ~p(a)).",
            &mut guide,
        );
        // j1 and j2 are both Unknown at the same level: one evaluation,
        // plus one for the goal
        assert_eq!(out.result.stats.model_evaluations, 2);
    }

    #[test]
    fn mask_axioms_presents_everything_as_unknown() {
        let config = ModelConfig::new(8, vec!["ax_a".into(), "ax_b".into()]);
        let params = ModelParams::init(&config, 5);
        let guide = Guide::new(&params, &config, Some(AblationMode::MaskAxioms)).unwrap();
        assert_eq!(guide.tag_for(Some("ax_a")), InitTag::Unknown);
        assert_eq!(guide.tag_for(Some("not_revealed")), InitTag::Unknown);
        assert_eq!(guide.tag_for(None), InitTag::Goal);
    }

    #[test]
    fn fix_sine_overrides_levels_before_capping() {
        let config = ModelConfig::new(8, vec![]);
        let params = ModelParams::init(&config, 5);
        let guide = Guide::new(&params, &config, Some(AblationMode::FixSine(3))).unwrap();
        assert_eq!(guide.capped_level(SineLevel::Unreached), 3);
        assert_eq!(guide.capped_level(SineLevel::Reached(9)), 3);
        assert!(!guide.fix_sine_is_noop());
    }

    #[test]
    fn fix_sine_on_a_levelless_model_is_a_flagged_noop() {
        let mut config = ModelConfig::new(8, vec![]);
        config.sine_enabled = false;
        let params = ModelParams::init(&config, 5);
        let guide = Guide::new(&params, &config, Some(AblationMode::FixSine(3))).unwrap();
        assert!(guide.fix_sine_is_noop());
        assert_eq!(guide.capped_level(SineLevel::Reached(9)), 0);
    }

    #[test]
    fn generic_rules_needs_trained_generic_blocks() {
        let config = ModelConfig::new(8, vec![]);
        let params = ModelParams::init(&config, 5);
        assert_eq!(
            Guide::new(&params, &config, Some(AblationMode::GenericRules))
                .err()
                .unwrap(),
            ModelError::NoGenericBlocks
        );
        let mut trained = config.clone();
        trained.has_generic = true;
        assert!(Guide::new(&params, &trained, Some(AblationMode::GenericRules)).is_ok());
    }

    #[test]
    fn missing_rule_surfaces_as_prover_error() {
        let mut config = ModelConfig::new(8, vec![]);
        config.rules = vec![RuleId::Resolution, RuleId::SubsumptionResolution];
        let params = ModelParams::init(&config, 5);
        // go through an actual model file: the mismatch must survive a load
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("partial.bin");
        crate::model::save_model(&params, &config, &path).unwrap();
        let (params, config) = crate::model::load_model(&path).unwrap();
        let mut guide = Guide::new(&params, &config, None).unwrap();
        // a problem that factors: the guide must reject the unknown rule
        let problem = parse_problem(
            "cnf(w, axiom, p(X)|p(Y)).\ncnf(g, negated_conjecture, ~p(a)).",
        )
        .unwrap();
        let result = saturate(
            &problem,
            &SelectorConfig::default(),
            &Limits::selections(50),
            Some(&mut guide),
        );
        assert!(result.is_err());
    }

    #[test]
    fn ablation_mode_round_trips_through_text() {
        for mode in [
            AblationMode::MaskAxioms,
            AblationMode::GenericRules,
            AblationMode::FixSine(4),
        ] {
            assert_eq!(AblationMode::parse(&mode.to_string()), Some(mode));
        }
        assert_eq!(AblationMode::parse("nonsense"), None);
    }
}
