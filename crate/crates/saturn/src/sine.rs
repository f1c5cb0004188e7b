//! SInE levels: a heuristic distance of each input clause from the
//! conjecture along the symbol-trigger relation of the SInE premise
//! selection algorithm. The levels only annotate clauses here; no
//! premise filtering happens.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::fol::{ClauseId, Problem, Role, SymbolId};

pub const DEFAULT_TOLERANCE: f64 = 1.5;

/// Conjecture clauses sit at level 0; axioms the trigger fixpoint never
/// reaches stay `Unreached`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SineLevel {
    Reached(u32),
    Unreached,
}

impl SineLevel {
    pub fn is_reached(self) -> bool {
        matches!(self, SineLevel::Reached(_))
    }
}

#[derive(Clone, Debug)]
pub struct SineLevels {
    pub tolerance: f64,
    pub level: BTreeMap<ClauseId, SineLevel>,
}

impl SineLevels {
    pub fn of(&self, id: ClauseId) -> SineLevel {
        self.level[&id]
    }
}

/// Number of input clauses each symbol occurs in. A symbol occurring
/// several times within one clause counts once for that clause.
pub fn symbol_occurrences(problem: &Problem) -> HashMap<SymbolId, u32> {
    let mut counts = HashMap::new();
    for clause in &problem.clauses {
        let mut symbols = BTreeSet::new();
        clause.collect_symbols(&mut symbols);
        for sym in symbols {
            *counts.entry(sym).or_insert(0) += 1;
        }
    }
    counts
}

/// Runs the trigger fixpoint. Symbol `s` triggers clause `c` iff `s`
/// occurs in `c` and `occ(s) <= tolerance * min over symbols of c of
/// occ`. Level 0 is the conjecture clauses; level k+1 adds every
/// untouched axiom triggered by a symbol occurring in some clause of
/// level <= k.
///
/// Occurrence counts are taken over the axiom clauses only: the
/// conjecture seeds the iteration but does not contribute to the
/// statistics the trigger relation is built from.
pub fn sine_levels(problem: &Problem, tolerance: f64) -> SineLevels {
    debug_assert!(tolerance >= 1.0, "tolerance must be >= 1");

    let mut axiom_occ: HashMap<SymbolId, u32> = HashMap::new();
    let mut clause_symbols: Vec<BTreeSet<SymbolId>> = Vec::with_capacity(problem.clauses.len());
    for clause in &problem.clauses {
        let mut symbols = BTreeSet::new();
        clause.collect_symbols(&mut symbols);
        if !problem.is_conjecture(clause.id) {
            for &sym in &symbols {
                *axiom_occ.entry(sym).or_insert(0) += 1;
            }
        }
        clause_symbols.push(symbols);
    }

    // trigger symbols per axiom: occ(s) <= tolerance * min occ in the clause
    let triggers: Vec<BTreeSet<SymbolId>> = problem
        .clauses
        .iter()
        .map(|clause| {
            let symbols = &clause_symbols[clause.id as usize];
            let min_occ = symbols
                .iter()
                .map(|s| axiom_occ.get(s).copied().unwrap_or(0))
                .min()
                .unwrap_or(0);
            symbols
                .iter()
                .copied()
                .filter(|s| {
                    let occ = axiom_occ.get(s).copied().unwrap_or(0) as f64;
                    occ <= tolerance * min_occ as f64
                })
                .collect()
        })
        .collect();

    let mut level: BTreeMap<ClauseId, SineLevel> = BTreeMap::new();
    let mut active_symbols: BTreeSet<SymbolId> = BTreeSet::new();
    let mut untouched: Vec<ClauseId> = Vec::new();
    for clause in &problem.clauses {
        match problem.role(clause.id) {
            Role::NegatedConjecture => {
                level.insert(clause.id, SineLevel::Reached(0));
                active_symbols.extend(clause_symbols[clause.id as usize].iter().copied());
            }
            Role::Axiom(_) => untouched.push(clause.id),
        }
    }

    let mut current = 0u32;
    loop {
        let (reached, rest): (Vec<ClauseId>, Vec<ClauseId>) = untouched.iter().partition(|&&id| {
            triggers[id as usize]
                .iter()
                .any(|s| active_symbols.contains(s))
        });
        if reached.is_empty() {
            break;
        }
        current += 1;
        for id in &reached {
            level.insert(*id, SineLevel::Reached(current));
            active_symbols.extend(clause_symbols[*id as usize].iter().copied());
        }
        untouched = rest;
    }
    for id in untouched {
        level.insert(id, SineLevel::Unreached);
    }

    SineLevels { tolerance, level }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fol::parse_problem;

    #[test]
    fn counts_clauses_not_occurrences() {
        let p = parse_problem(
            "cnf(a, axiom, p(X)|p(f(X))).\n\
             cnf(b, axiom, p(c)).\n\
             cnf(g, negated_conjecture, ~q(c)).",
        )
        .unwrap();
        let occ = symbol_occurrences(&p);
        let sym = |name, kind| p.signature.lookup(name, kind).unwrap();
        use crate::fol::SymbolKind::*;
        // p appears in two clauses, twice in the first one
        assert_eq!(occ[&sym("p", Predicate)], 2);
        assert_eq!(occ[&sym("c", Function)], 2);
        assert_eq!(occ[&sym("q", Predicate)], 1);
        assert_eq!(occ.get(&sym("f", Function)), Some(&1));
    }

    #[test]
    fn worked_three_clause_example() {
        // hand-run: occ over axioms is p=1 q=1 r=1 b=1; with tolerance 1
        // both p and q trigger the p-axiom, so the conjecture symbol p
        // reaches it at level 1; nothing active ever triggers r(b).
        let p = parse_problem(
            "cnf(g, negated_conjecture, ~p(a)).\n\
             cnf(ax1, axiom, p(X)|~q(X)).\n\
             cnf(ax2, axiom, r(b)).",
        )
        .unwrap();
        let levels = sine_levels(&p, 1.0);
        assert_eq!(levels.of(0), SineLevel::Reached(0));
        assert_eq!(levels.of(1), SineLevel::Reached(1));
        assert_eq!(levels.of(2), SineLevel::Unreached);
    }

    #[test]
    fn no_axioms_gives_only_level_zero() {
        let p = parse_problem("cnf(g, negated_conjecture, ~p(a)).").unwrap();
        let levels = sine_levels(&p, 1.5);
        assert_eq!(levels.level.len(), 1);
        assert_eq!(levels.of(0), SineLevel::Reached(0));
    }

    #[test]
    fn levels_are_minimal_and_contiguous() {
        // chain: goal shares a symbol with ax1, ax1 with ax2, ...
        // tolerance 2 lets the middle predicates (each occurring in two
        // axioms) trigger the next link whose rarest symbol occurs once
        let p = parse_problem(
            "cnf(g, negated_conjecture, ~p0(a)).\n\
             cnf(s1, axiom, ~p0(X)|p1(X)).\n\
             cnf(s2, axiom, ~p1(X)|p2(X)).\n\
             cnf(s3, axiom, ~p2(X)|p3(X)).",
        )
        .unwrap();
        let levels = sine_levels(&p, 2.0);
        assert_eq!(levels.of(1), SineLevel::Reached(1));
        assert_eq!(levels.of(2), SineLevel::Reached(2));
        assert_eq!(levels.of(3), SineLevel::Reached(3));

        // at tolerance 1.5 the last link's only trigger symbol is its
        // own rare head, which never activates: the link stays unreached
        let levels = sine_levels(&p, 1.5);
        assert_eq!(levels.of(2), SineLevel::Reached(2));
        assert_eq!(levels.of(3), SineLevel::Unreached);
    }

    #[test]
    fn raising_tolerance_never_raises_a_level() {
        let text = "cnf(g, negated_conjecture, ~p(a)).\n\
                    cnf(ax1, axiom, p(X)|~q(X)).\n\
                    cnf(ax2, axiom, q(a)|r(b)).\n\
                    cnf(ax3, axiom, r(b)|s(b)).\n\
                    cnf(ax4, axiom, p(b)|q(b)|r(a)).";
        let p = parse_problem(text).unwrap();
        let tolerances = [1.0, 1.5, 3.0];
        for pair in tolerances.windows(2) {
            let lo = sine_levels(&p, pair[0]);
            let hi = sine_levels(&p, pair[1]);
            for (id, level) in &lo.level {
                assert!(hi.level[id] <= *level, "tolerance {} -> {}", pair[0], pair[1]);
            }
        }
    }

    #[test]
    fn deterministic_by_construction() {
        let text = "cnf(g, negated_conjecture, ~p(a)).\n\
                    cnf(ax1, axiom, p(X)|~q(X)).\n\
                    cnf(ax2, axiom, q(a)).";
        let p = parse_problem(text).unwrap();
        let a = sine_levels(&p, 1.5);
        let b = sine_levels(&p, 1.5);
        assert_eq!(a.level, b.level);
    }
}
