//! Syntactic unification with occurs check, one-way matching, and
//! substitution application.

use std::collections::BTreeMap;

use super::{Clause, Literal, Term, VarId};

/// A variable-to-term binding set applied simultaneously. Unifiers
/// produced by [`unify_terms`] are kept idempotent: no bound variable
/// occurs in any right-hand side.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<VarId, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (VarId, Term)>) -> Self {
        Substitution {
            map: pairs.into_iter().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn get(&self, v: VarId) -> Option<&Term> {
        self.map.get(&v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &Term)> {
        self.map.iter().map(|(v, t)| (*v, t))
    }

    /// One simultaneous replacement pass.
    pub fn apply_term(&self, term: &Term) -> Term {
        match term {
            Term::Var(v) => self.map.get(v).cloned().unwrap_or_else(|| term.clone()),
            Term::App(f, args) => {
                Term::App(*f, args.iter().map(|a| self.apply_term(a)).collect())
            }
        }
    }

    pub fn apply_literal(&self, lit: &Literal) -> Literal {
        Literal {
            positive: lit.positive,
            predicate: lit.predicate,
            args: lit.args.iter().map(|a| self.apply_term(a)).collect(),
        }
    }

    /// Composes `{v -> t}` onto the current bindings, keeping the map
    /// idempotent. `t` must already have the current bindings applied
    /// and pass the occurs check.
    fn compose_bind(&mut self, v: VarId, t: Term) {
        let single = Substitution {
            map: BTreeMap::from([(v, t.clone())]),
        };
        for rhs in self.map.values_mut() {
            *rhs = single.apply_term(rhs);
        }
        self.map.insert(v, t);
    }
}

/// `v` occurs in `t`.
pub fn occurs(v: VarId, t: &Term) -> bool {
    match t {
        Term::Var(w) => v == *w,
        Term::App(_, args) => args.iter().any(|a| occurs(v, a)),
    }
}

/// Most general unifier of two terms, or `None`. The result is
/// idempotent; applying it to both inputs yields syntactically equal
/// terms.
pub fn unify_terms(a: &Term, b: &Term) -> Option<Substitution> {
    unify_term_lists(std::slice::from_ref(a), std::slice::from_ref(b))
}

/// Simultaneous unification of two equal-length term lists.
pub fn unify_term_lists(xs: &[Term], ys: &[Term]) -> Option<Substitution> {
    if xs.len() != ys.len() {
        return None;
    }
    let mut subst = Substitution::new();
    let mut work: Vec<(Term, Term)> = xs.iter().cloned().zip(ys.iter().cloned()).collect();
    while let Some((a, b)) = work.pop() {
        let a = subst.apply_term(&a);
        let b = subst.apply_term(&b);
        match (a, b) {
            (Term::Var(x), Term::Var(y)) if x == y => {}
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                if occurs(x, &t) {
                    return None;
                }
                subst.compose_bind(x, t);
            }
            (Term::App(f, fa), Term::App(g, ga)) => {
                if f != g || fa.len() != ga.len() {
                    return None;
                }
                work.extend(fa.into_iter().zip(ga));
            }
        }
    }
    Some(subst)
}

/// Unifies the atoms of two literals with the same predicate symbol.
/// Polarity is ignored; callers check it as their rule requires.
pub fn unify_atoms(a: &Literal, b: &Literal) -> Option<Substitution> {
    if a.predicate != b.predicate {
        return None;
    }
    unify_term_lists(&a.args, &b.args)
}

/// One-way matching: extends `bindings` (pattern variables only) so the
/// pattern becomes syntactically equal to the target. Target variables
/// are treated as rigid.
pub fn match_term(pattern: &Term, target: &Term, bindings: &mut BTreeMap<VarId, Term>) -> bool {
    match pattern {
        Term::Var(v) => match bindings.get(v) {
            Some(existing) => existing == target,
            None => {
                bindings.insert(*v, target.clone());
                true
            }
        },
        Term::App(f, pa) => match target {
            Term::App(g, ta) if f == g && pa.len() == ta.len() => {
                pa.iter().zip(ta).all(|(p, t)| match_term(p, t, bindings))
            }
            _ => false,
        },
    }
}

/// Matching on whole literals: polarity and predicate must agree.
pub fn match_literal(
    pattern: &Literal,
    target: &Literal,
    bindings: &mut BTreeMap<VarId, Term>,
) -> bool {
    pattern.positive == target.positive
        && pattern.predicate == target.predicate
        && pattern
            .args
            .iter()
            .zip(&target.args)
            .all(|(p, t)| match_term(p, t, bindings))
}

/// Applies a substitution to every literal and collapses duplicates:
/// the clause is treated as a set after substitution.
pub fn apply_substitution(clause: &Clause, subst: &Substitution) -> Clause {
    let literals = clause
        .literals
        .iter()
        .map(|l| subst.apply_literal(l))
        .collect();
    Clause {
        id: clause.id,
        literals: Clause::dedup_literals(literals),
        origin: clause.origin.clone(),
    }
}


#[cfg(test)]
mod mgu_tests {
    //! The returned unifier is most general: every unifier found by
    //! bounded brute-force enumeration factors through it.

    use std::collections::BTreeMap;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::fol::{SymbolId, VarId};

    // symbols: 0 = a/0, 1 = b/0, 2 = f/1, 3 = g/2
    fn random_term(rng: &mut ChaCha8Rng, depth: usize) -> Term {
        match rng.gen_range(0..if depth == 0 { 3 } else { 5 }) {
            0 => Term::Var(rng.gen_range(0..3)),
            1 => Term::App(SymbolId(0), vec![]),
            2 => Term::App(SymbolId(1), vec![]),
            3 => Term::App(SymbolId(2), vec![random_term(rng, depth - 1)]),
            _ => Term::App(
                SymbolId(3),
                vec![random_term(rng, depth - 1), random_term(rng, depth - 1)],
            ),
        }
    }

    /// Ground-ish universe for the brute-force enumeration: constants
    /// and one level of structure over them.
    fn universe() -> Vec<Term> {
        let a = Term::App(SymbolId(0), vec![]);
        let b = Term::App(SymbolId(1), vec![]);
        let mut terms = vec![a.clone(), b.clone()];
        for t in [a.clone(), b.clone()] {
            terms.push(Term::App(SymbolId(2), vec![t]));
        }
        terms.push(Term::App(SymbolId(3), vec![a.clone(), b.clone()]));
        terms.push(Term::App(SymbolId(3), vec![a, b.clone()]));
        terms
    }

    fn vars_of(term: &Term, out: &mut std::collections::BTreeSet<VarId>) {
        term.collect_vars(out);
    }

    /// sigma factors through the mgu: some tau satisfies
    /// tau(mgu(x)) = sigma(x) for every variable of interest.
    fn factors_through(mgu: &Substitution, sigma: &Substitution, vars: &[VarId]) -> bool {
        let mut tau: BTreeMap<VarId, Term> = BTreeMap::new();
        vars.iter().all(|&v| {
            let mgu_image = mgu.apply_term(&Term::Var(v));
            let sigma_image = sigma.apply_term(&Term::Var(v));
            match_term(&mgu_image, &sigma_image, &mut tau)
        })
    }

    #[test]
    fn returned_unifiers_are_most_general() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let universe = universe();
        let mut unifiable_pairs = 0;
        let mut checked_unifiers = 0;
        while unifiable_pairs < 200 {
            let left = random_term(&mut rng, 2);
            let right = random_term(&mut rng, 2);
            let Some(mgu) = unify_terms(&left, &right) else {
                continue;
            };
            unifiable_pairs += 1;
            let mut vars = std::collections::BTreeSet::new();
            vars_of(&left, &mut vars);
            vars_of(&right, &mut vars);
            let vars: Vec<VarId> = vars.into_iter().collect();
            // enumerate every assignment of the variables into the
            // bounded universe and test each induced unifier
            let mut assignments: Vec<Vec<Term>> = vec![vec![]];
            for _ in &vars {
                assignments = assignments
                    .iter()
                    .flat_map(|partial| {
                        universe.iter().map(move |t| {
                            let mut next = partial.clone();
                            next.push(t.clone());
                            next
                        })
                    })
                    .collect();
            }
            for assignment in assignments {
                let sigma = Substitution::from_pairs(
                    vars.iter().copied().zip(assignment),
                );
                if sigma.apply_term(&left) == sigma.apply_term(&right) {
                    checked_unifiers += 1;
                    assert!(
                        factors_through(&mgu, &sigma, &vars),
                        "unifier {sigma:?} does not factor through mgu {mgu:?} \
                         for {left:?} =? {right:?}"
                    );
                }
            }
        }
        // the enumeration actually found unifiers to check against
        assert!(checked_unifiers > 200, "only {checked_unifiers} unifiers enumerated");
    }
}
