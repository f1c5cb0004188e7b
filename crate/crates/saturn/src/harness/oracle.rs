//! Independent satisfiability oracle for function-free problems:
//! exhaustive ground resolution closure over the Herbrand base
//! restricted to constants. The corpus generator certifies every
//! emitted problem with it, and the acceptance suite checks the prover
//! against it. It shares nothing with the saturation loop.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::fol::{Literal, Problem, Substitution, SymbolKind, Term};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("symbol `{0}` has arity > 0; the ground oracle needs a function-free problem")]
    NotFunctionFree(String),
    #[error("clause {0} has {1} variables; grounding would explode")]
    TooManyVariables(u32, usize),
}

#[derive(Clone, Debug)]
pub struct GroundResult {
    pub unsat: bool,
    /// Total ground clauses in the closure.
    pub closure_size: usize,
    /// Nodes in the oracle's own proof DAG (ancestor closure of the
    /// empty clause, first derivation per clause), when unsat.
    pub proof_nodes: Option<usize>,
}

type GroundClause = Vec<Literal>;

fn canonical(mut literals: GroundClause) -> GroundClause {
    literals.sort();
    literals.dedup();
    literals
}

/// Runs the closure. Clauses with more than `max_vars` variables are
/// rejected rather than ground-instantiated blindly.
pub fn ground_resolution(problem: &Problem) -> Result<GroundResult, OracleError> {
    const MAX_VARS: usize = 6;

    for (_, symbol) in problem.signature.iter() {
        if symbol.kind == SymbolKind::Function && symbol.arity > 0 {
            return Err(OracleError::NotFunctionFree(symbol.name.clone()));
        }
    }
    let mut constants: Vec<Term> = problem
        .signature
        .iter()
        .filter(|(_, s)| s.kind == SymbolKind::Function)
        .map(|(id, _)| Term::constant(id))
        .collect();
    if constants.is_empty() {
        // a problem without constants still needs one element
        constants.push(Term::Var(u32::MAX));
    }

    // all ground instances of the input clauses
    let mut clauses: Vec<(GroundClause, Option<(usize, usize)>)> = Vec::new();
    let mut index: HashMap<GroundClause, usize> = HashMap::new();
    let add = |clause: GroundClause,
                   parents: Option<(usize, usize)>,
                   clauses: &mut Vec<(GroundClause, Option<(usize, usize)>)>,
                   index: &mut HashMap<GroundClause, usize>| {
        if index.contains_key(&clause) {
            return None;
        }
        let id = clauses.len();
        index.insert(clause.clone(), id);
        clauses.push((clause, parents));
        Some(id)
    };

    for clause in &problem.clauses {
        let mut vars = BTreeSet::new();
        for lit in &clause.literals {
            lit.collect_vars(&mut vars);
        }
        let vars: Vec<u32> = vars.into_iter().collect();
        if vars.len() > MAX_VARS {
            return Err(OracleError::TooManyVariables(clause.id, vars.len()));
        }
        let mut assignments: Vec<Vec<Term>> = vec![vec![]];
        for _ in &vars {
            assignments = assignments
                .iter()
                .flat_map(|partial| {
                    constants.iter().map(move |c| {
                        let mut next = partial.clone();
                        next.push(c.clone());
                        next
                    })
                })
                .collect();
        }
        for assignment in assignments {
            let subst =
                Substitution::from_pairs(vars.iter().copied().zip(assignment));
            let ground = canonical(
                clause
                    .literals
                    .iter()
                    .map(|l| subst.apply_literal(l))
                    .collect(),
            );
            add(ground, None, &mut clauses, &mut index);
        }
    }

    // naive closure: resolve every pair until fixpoint or the empty clause
    let mut empty_id = index.get(&Vec::new()).copied();
    let mut next = 0usize;
    while empty_id.is_none() && next < clauses.len() {
        let current = next;
        next += 1;
        for other in 0..current {
            let mut fresh: Vec<(GroundClause, (usize, usize))> = Vec::new();
            {
                let (a, _) = &clauses[current];
                let (b, _) = &clauses[other];
                for (i, la) in a.iter().enumerate() {
                    for (j, lb) in b.iter().enumerate() {
                        if la.complements(lb) && la.args == lb.args {
                            let mut resolvent: GroundClause = a
                                .iter()
                                .enumerate()
                                .filter(|&(k, _)| k != i)
                                .map(|(_, l)| l.clone())
                                .chain(
                                    b.iter()
                                        .enumerate()
                                        .filter(|&(k, _)| k != j)
                                        .map(|(_, l)| l.clone()),
                                )
                                .collect();
                            resolvent = canonical(resolvent);
                            // skip tautologies
                            let tautology = resolvent.iter().any(|x| {
                                resolvent
                                    .iter()
                                    .any(|y| x.complements(y) && x.args == y.args)
                            });
                            if !tautology {
                                fresh.push((resolvent, (current, other)));
                            }
                        }
                    }
                }
            }
            for (resolvent, parents) in fresh {
                let is_empty = resolvent.is_empty();
                if let Some(id) = add(resolvent, Some(parents), &mut clauses, &mut index) {
                    if is_empty {
                        empty_id = Some(id);
                    }
                }
            }
            if empty_id.is_some() {
                break;
            }
        }
    }

    let proof_nodes = empty_id.map(|id| {
        let mut seen = BTreeSet::new();
        let mut stack = vec![id];
        while let Some(c) = stack.pop() {
            if !seen.insert(c) {
                continue;
            }
            if let Some((a, b)) = clauses[c].1 {
                stack.push(a);
                stack.push(b);
            }
        }
        seen.len()
    });

    Ok(GroundResult {
        unsat: empty_id.is_some(),
        closure_size: clauses.len(),
        proof_nodes,
    })
}
