//! First-order clause representation, a CNF problem-file parser, and
//! unification.
//!
//! Everything here is immutable after construction. Variables are plain
//! indices scoped to their clause; callers must rename clauses apart
//! before cross-clause operations (the inference code asserts this in
//! debug builds).

mod parse;
mod unify;

pub use parse::{parse_problem, ParseError, ParseErrorKind};
pub use unify::{
    apply_substitution, match_literal, match_term, occurs, unify_atoms, unify_term_lists,
    unify_terms, Substitution,
};

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

/// Index of a variable, local to its clause.
pub type VarId = u32;

/// Interned symbol handle; resolve through the owning [`Signature`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymbolKind {
    Function,
    Predicate,
}

/// A function or predicate symbol. `(name, kind)` is unique within a
/// problem and the arity is fixed at first sight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
    pub kind: SymbolKind,
}

/// Arity mismatch between two uses of one symbol.
#[derive(Clone, Debug, Error)]
#[error("symbol `{name}` used with arity {new} but declared with arity {declared}")]
pub struct ArityConflict {
    pub name: String,
    pub declared: usize,
    pub new: usize,
}

/// Symbol table of one problem.
#[derive(Clone, Debug, Default)]
pub struct Signature {
    symbols: Vec<Symbol>,
    index: HashMap<(String, SymbolKind), SymbolId>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    /// Interns `(name, kind)`, checking that the arity matches any
    /// previous occurrence. Returns the existing id on a repeat.
    pub fn intern(
        &mut self,
        name: &str,
        arity: usize,
        kind: SymbolKind,
    ) -> Result<SymbolId, ArityConflict> {
        if let Some(&id) = self.index.get(&(name.to_owned(), kind)) {
            let declared = self.symbols[id.0 as usize].arity;
            if declared != arity {
                return Err(ArityConflict {
                    name: name.to_owned(),
                    declared,
                    new: arity,
                });
            }
            return Ok(id);
        }
        let id = SymbolId(self.symbols.len() as u32);
        self.symbols.push(Symbol {
            name: name.to_owned(),
            arity,
            kind,
        });
        self.index.insert((name.to_owned(), kind), id);
        Ok(id)
    }

    pub fn lookup(&self, name: &str, kind: SymbolKind) -> Option<SymbolId> {
        self.index.get(&(name.to_owned(), kind)).copied()
    }

    pub fn symbol(&self, id: SymbolId) -> &Symbol {
        &self.symbols[id.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (SymbolId, &Symbol)> {
        self.symbols
            .iter()
            .enumerate()
            .map(|(i, s)| (SymbolId(i as u32), s))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(VarId),
    App(SymbolId, Vec<Term>),
}

impl Term {
    pub fn constant(sym: SymbolId) -> Self {
        Term::App(sym, Vec::new())
    }

    /// Total count of symbol and variable occurrences.
    pub fn symbol_count(&self) -> u32 {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::symbol_count).sum::<u32>(),
        }
    }

    pub fn max_var(&self) -> Option<VarId> {
        match self {
            Term::Var(v) => Some(*v),
            Term::App(_, args) => args.iter().filter_map(Term::max_var).max(),
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<VarId>) {
        match self {
            Term::Var(v) => {
                out.insert(*v);
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn collect_symbols(&self, out: &mut BTreeSet<SymbolId>) {
        if let Term::App(f, args) = self {
            out.insert(*f);
            args.iter().for_each(|a| a.collect_symbols(out));
        }
    }

    fn shift_vars(&self, offset: u32) -> Term {
        match self {
            Term::Var(v) => Term::Var(v + offset),
            Term::App(f, args) => Term::App(*f, args.iter().map(|a| a.shift_vars(offset)).collect()),
        }
    }

    fn map_vars(&self, map: &HashMap<VarId, VarId>) -> Term {
        match self {
            Term::Var(v) => Term::Var(map[v]),
            Term::App(f, args) => Term::App(*f, args.iter().map(|a| a.map_vars(map)).collect()),
        }
    }

    /// Variable-blind copy: every variable index replaced by 0.
    fn erase_vars(&self) -> Term {
        match self {
            Term::Var(_) => Term::Var(0),
            Term::App(f, args) => Term::App(*f, args.iter().map(Term::erase_vars).collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub positive: bool,
    pub predicate: SymbolId,
    pub args: Vec<Term>,
}

impl Literal {
    pub fn new(positive: bool, predicate: SymbolId, args: Vec<Term>) -> Self {
        Literal {
            positive,
            predicate,
            args,
        }
    }

    /// Same predicate, opposite polarity. Says nothing about the
    /// argument terms.
    pub fn complements(&self, other: &Literal) -> bool {
        self.predicate == other.predicate && self.positive != other.positive
    }

    pub fn symbol_count(&self) -> u32 {
        1 + self.args.iter().map(Term::symbol_count).sum::<u32>()
    }

    pub fn max_var(&self) -> Option<VarId> {
        self.args.iter().filter_map(Term::max_var).max()
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<VarId>) {
        self.args.iter().for_each(|a| a.collect_vars(out));
    }

    pub fn collect_symbols(&self, out: &mut BTreeSet<SymbolId>) {
        out.insert(self.predicate);
        self.args.iter().for_each(|a| a.collect_symbols(out));
    }

    fn shift_vars(&self, offset: u32) -> Literal {
        Literal {
            positive: self.positive,
            predicate: self.predicate,
            args: self.args.iter().map(|a| a.shift_vars(offset)).collect(),
        }
    }

    fn map_vars(&self, map: &HashMap<VarId, VarId>) -> Literal {
        Literal {
            positive: self.positive,
            predicate: self.predicate,
            args: self.args.iter().map(|a| a.map_vars(map)).collect(),
        }
    }

    fn erase_vars(&self) -> Literal {
        Literal {
            positive: self.positive,
            predicate: self.predicate,
            args: self.args.iter().map(Term::erase_vars).collect(),
        }
    }
}

pub type ClauseId = u32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Role {
    Axiom(String),
    NegatedConjecture,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    Input(Role),
    Derived,
}

/// A multiset of literals. The empty clause is the contradiction ⊥.
#[derive(Clone, Debug)]
pub struct Clause {
    pub id: ClauseId,
    pub literals: Vec<Literal>,
    pub origin: Origin,
}

impl Clause {
    pub fn derived(literals: Vec<Literal>) -> Self {
        Clause {
            id: 0,
            literals,
            origin: Origin::Derived,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    /// Total symbol-occurrence count (predicates, functions, variables).
    pub fn weight(&self) -> u32 {
        self.literals.iter().map(Literal::symbol_count).sum()
    }

    pub fn max_var(&self) -> Option<VarId> {
        self.literals.iter().filter_map(Literal::max_var).max()
    }

    pub fn collect_symbols(&self, out: &mut BTreeSet<SymbolId>) {
        self.literals.iter().for_each(|l| l.collect_symbols(out));
    }

    /// Copy with every variable index shifted up by `offset`.
    pub fn rename_apart(&self, offset: u32) -> Clause {
        Clause {
            id: self.id,
            literals: self.literals.iter().map(|l| l.shift_vars(offset)).collect(),
            origin: self.origin.clone(),
        }
    }

    /// Collapses duplicate literals, keeping first occurrences in order.
    pub fn dedup_literals(literals: Vec<Literal>) -> Vec<Literal> {
        let mut out: Vec<Literal> = Vec::with_capacity(literals.len());
        for lit in literals {
            if !out.contains(&lit) {
                out.push(lit);
            }
        }
        out
    }

    /// A literal and its exact negation both present.
    pub fn is_tautology(&self) -> bool {
        self.literals.iter().enumerate().any(|(i, a)| {
            self.literals[i + 1..]
                .iter()
                .any(|b| a.complements(b) && a.args == b.args)
        })
    }

    /// Literal list in a renaming-independent normal form: literals are
    /// ordered by a variable-blind key, variables renamed in traversal
    /// order, and the result sorted. Two clauses equal up to variable
    /// renaming canonicalize identically (symmetric variable patterns
    /// aside, which the inference tests steer clear of).
    pub fn canonical_literals(&self) -> Vec<Literal> {
        let mut order: Vec<usize> = (0..self.literals.len()).collect();
        order.sort_by_key(|&i| self.literals[i].erase_vars());
        let mut rename: HashMap<VarId, VarId> = HashMap::new();
        let mut collect = |t: &Term| collect_rename(t, &mut rename);
        for &i in &order {
            self.literals[i].args.iter().for_each(&mut collect);
        }
        let mut lits: Vec<Literal> = order
            .iter()
            .map(|&i| self.literals[i].map_vars(&rename))
            .collect();
        lits.sort();
        lits
    }

    /// Equality of literal multisets up to variable renaming.
    pub fn same_clause(&self, other: &Clause) -> bool {
        self.canonical_literals() == other.canonical_literals()
    }
}

fn collect_rename(t: &Term, rename: &mut HashMap<VarId, VarId>) {
    match t {
        Term::Var(v) => {
            let next = rename.len() as u32;
            rename.entry(*v).or_insert(next);
        }
        Term::App(_, args) => args.iter().for_each(|a| collect_rename(a, rename)),
    }
}

/// A parsed problem: the signature plus the input clauses, whose ids
/// are their positions in the file.
#[derive(Clone, Debug)]
pub struct Problem {
    pub signature: Signature,
    pub clauses: Vec<Clause>,
}

impl Problem {
    pub fn role(&self, id: ClauseId) -> &Role {
        match &self.clauses[id as usize].origin {
            Origin::Input(role) => role,
            Origin::Derived => panic!("input clause expected"),
        }
    }

    pub fn axiom_name(&self, id: ClauseId) -> Option<&str> {
        match self.role(id) {
            Role::Axiom(name) => Some(name),
            Role::NegatedConjecture => None,
        }
    }

    pub fn is_conjecture(&self, id: ClauseId) -> bool {
        matches!(self.role(id), Role::NegatedConjecture)
    }

    /// Renders the problem back into the file dialect.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for (i, clause) in self.clauses.iter().enumerate() {
            let (name, role) = match &clause.origin {
                Origin::Input(Role::Axiom(name)) => (name.clone(), "axiom"),
                Origin::Input(Role::NegatedConjecture) => {
                    (format!("goal_{i}"), "negated_conjecture")
                }
                Origin::Derived => panic!("derived clause in problem"),
            };
            let _ = writeln!(
                out,
                "cnf({name}, {role}, {}).",
                format_clause(clause, &self.signature)
            );
        }
        out
    }
}

pub fn format_term(term: &Term, sig: &Signature, out: &mut String) {
    match term {
        Term::Var(v) => {
            let _ = write!(out, "X{v}");
        }
        Term::App(f, args) => {
            out.push_str(&sig.symbol(*f).name);
            if !args.is_empty() {
                out.push('(');
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    format_term(arg, sig, out);
                }
                out.push(')');
            }
        }
    }
}

pub fn format_literal(lit: &Literal, sig: &Signature, out: &mut String) {
    if !lit.positive {
        out.push('~');
    }
    out.push_str(&sig.symbol(lit.predicate).name);
    if !lit.args.is_empty() {
        out.push('(');
        for (i, arg) in lit.args.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            format_term(arg, sig, out);
        }
        out.push(')');
    }
}

/// `|`-joined literal list; the empty clause prints as `$false`.
pub fn format_clause(clause: &Clause, sig: &Signature) -> String {
    if clause.literals.is_empty() {
        return "$false".to_owned();
    }
    let mut out = String::new();
    for (i, lit) in clause.literals.iter().enumerate() {
        if i > 0 {
            out.push('|');
        }
        format_literal(lit, sig, &mut out);
    }
    out
}
