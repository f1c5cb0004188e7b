//! Resolution, factoring, subsumption, and subsumption resolution on
//! clauses. All binary operations expect their inputs renamed apart;
//! [`super::saturate`] guarantees this by shifting the second premise.

use std::collections::BTreeMap;

use crate::fol::{apply_substitution, match_literal, unify_atoms, Clause, Literal, Term, VarId};

#[cfg(debug_assertions)]
fn vars_disjoint(a: &Clause, b: &Clause) -> bool {
    use std::collections::BTreeSet;
    let mut va = BTreeSet::new();
    let mut vb = BTreeSet::new();
    a.literals.iter().for_each(|l| l.collect_vars(&mut va));
    b.literals.iter().for_each(|l| l.collect_vars(&mut vb));
    va.intersection(&vb).next().is_none()
}

/// Binary resolution on literal `i` of `c1` and literal `j` of `c2`,
/// which must have the same predicate and opposite polarity. Returns
/// the resolvent under the most general unifier of the two atoms, with
/// duplicate literals collapsed, or `None` if the atoms do not unify.
pub fn resolve(c1: &Clause, i: usize, c2: &Clause, j: usize) -> Option<Clause> {
    let l1 = &c1.literals[i];
    let l2 = &c2.literals[j];
    debug_assert!(l1.complements(l2), "resolution needs complementary literals");
    #[cfg(debug_assertions)]
    debug_assert!(vars_disjoint(c1, c2), "premises must be renamed apart");
    let subst = unify_atoms(l1, l2)?;
    let literals: Vec<Literal> = c1
        .literals
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != i)
        .map(|(_, l)| subst.apply_literal(l))
        .chain(
            c2.literals
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, l)| subst.apply_literal(l)),
        )
        .collect();
    Some(Clause::derived(Clause::dedup_literals(literals)))
}

/// Factoring on literals `i` and `j` (same polarity and predicate) of
/// one clause: the clause under the mgu of the two atoms, duplicates
/// merged.
pub fn factor(clause: &Clause, i: usize, j: usize) -> Option<Clause> {
    debug_assert!(i != j);
    let li = &clause.literals[i];
    let lj = &clause.literals[j];
    debug_assert_eq!(li.positive, lj.positive, "factoring needs equal polarity");
    let subst = unify_atoms(li, lj)?;
    Some(apply_substitution(clause, &subst).into_derived())
}

impl Clause {
    fn into_derived(mut self) -> Clause {
        self.id = 0;
        self.origin = crate::fol::Origin::Derived;
        self
    }
}

/// True iff some substitution maps `general` into a sub-multiset of
/// `specific`. The image is compared with set semantics: two literals
/// of `general` may land on the same literal of `specific`, so
/// `{p(X), p(Y)}` subsumes `{p(a)}`.
pub fn subsumes(general: &Clause, specific: &Clause) -> bool {
    let mut bindings = BTreeMap::new();
    subsume_from(&general.literals, 0, &specific.literals, &mut bindings)
}

fn subsume_from(
    general: &[Literal],
    next: usize,
    specific: &[Literal],
    bindings: &mut BTreeMap<VarId, Term>,
) -> bool {
    let Some(pattern) = general.get(next) else {
        return true;
    };
    for target in specific {
        let saved = bindings.clone();
        if match_literal(pattern, target, bindings)
            && subsume_from(general, next + 1, specific, bindings)
        {
            return true;
        }
        *bindings = saved;
    }
    false
}

/// Subsumption resolution: removes literal `l` from `main` when `side`
/// contains a literal `m` with `σ(m) = ¬l` and `σ(side \ {m})` a subset
/// of `main \ {l}` for some substitution `σ` binding only `side`'s
/// variables. Returns `main` without `l`.
pub fn subsumption_resolve(main: &Clause, side: &Clause) -> Option<Clause> {
    subsumption_resolvents(main, side).into_iter().next()
}

/// Every clause obtainable from `main` by one subsumption-resolution
/// cut with `side`, in cut-literal order. Used by proof replay, which
/// must accept any recorded application.
pub fn subsumption_resolvents(main: &Clause, side: &Clause) -> Vec<Clause> {
    let mut out = Vec::new();
    for (i, l) in main.literals.iter().enumerate() {
        let rest: Vec<Literal> = main
            .literals
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != i)
            .map(|(_, lit)| lit.clone())
            .collect();
        'side: for (j, m) in side.literals.iter().enumerate() {
            if !m.complements(l) {
                continue;
            }
            let mut bindings = BTreeMap::new();
            let negated = Literal {
                positive: !m.positive,
                predicate: m.predicate,
                args: m.args.clone(),
            };
            if !match_literal(&negated, l, &mut bindings) {
                continue;
            }
            let side_rest: Vec<Literal> = side
                .literals
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, lit)| lit.clone())
                .collect();
            if subsume_from(&side_rest, 0, &rest, &mut bindings) {
                out.push(Clause::derived(rest));
                break 'side; // one cut per main literal is enough
            }
        }
    }
    out
}
