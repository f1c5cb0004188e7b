//! Parser for the CNF problem dialect.
//!
//! One statement per period-terminated `cnf(<name>, <role>, <clause>).`
//! form, where role is `axiom` or `negated_conjecture`, the clause is a
//! `|`-separated literal list (optionally parenthesised), `~` negates,
//! variables start uppercase, `$false` denotes the empty clause, and
//! `%` starts a line comment.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use super::{Clause, Literal, Origin, Problem, Role, Signature, SymbolKind, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    DuplicateAxiomName(String),
    ArityConflict {
        name: String,
        declared: usize,
        new: usize,
    },
    EmptyProblem,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax(msg) => write!(f, "{msg}"),
            ParseErrorKind::DuplicateAxiomName(name) => {
                write!(f, "duplicate axiom name `{name}`")
            }
            ParseErrorKind::ArityConflict {
                name,
                declared,
                new,
            } => write!(
                f,
                "symbol `{name}` used with arity {new} but declared with arity {declared}"
            ),
            ParseErrorKind::EmptyProblem => write!(f, "problem contains no clauses"),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub kind: ParseErrorKind,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Lower(String),
    Upper(String),
    DollarFalse,
    LParen,
    RParen,
    Comma,
    Period,
    Pipe,
    Tilde,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Lower(s) | Tok::Upper(s) => write!(f, "`{s}`"),
            Tok::DollarFalse => write!(f, "`$false`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Period => write!(f, "`.`"),
            Tok::Pipe => write!(f, "`|`"),
            Tok::Tilde => write!(f, "`~`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<u8> {
        let b = *self.src.get(self.pos)?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(b)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(b) if b.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'%') => {
                    while let Some(b) = self.bump() {
                        if b == b'\n' {
                            break;
                        }
                    }
                }
                _ => return,
            }
        }
    }

    /// Next token plus the position where it starts.
    fn next_tok(&mut self) -> Result<(Tok, u32, u32), ParseError> {
        self.skip_trivia();
        let (line, col) = (self.line, self.col);
        let Some(b) = self.peek() else {
            return Ok((Tok::Eof, line, col));
        };
        let tok = match b {
            b'(' => {
                self.bump();
                Tok::LParen
            }
            b')' => {
                self.bump();
                Tok::RParen
            }
            b',' => {
                self.bump();
                Tok::Comma
            }
            b'.' => {
                self.bump();
                Tok::Period
            }
            b'|' => {
                self.bump();
                Tok::Pipe
            }
            b'~' => {
                self.bump();
                Tok::Tilde
            }
            b'$' => {
                self.bump();
                let word = self.ident_tail();
                if word == "false" {
                    Tok::DollarFalse
                } else {
                    return Err(ParseError {
                        line,
                        col,
                        kind: ParseErrorKind::Syntax(format!("unknown builtin `${word}`")),
                    });
                }
            }
            b'a'..=b'z' => {
                let mut s = String::new();
                s.push(self.bump().unwrap() as char);
                s.push_str(&self.ident_tail());
                Tok::Lower(s)
            }
            b'A'..=b'Z' => {
                let mut s = String::new();
                s.push(self.bump().unwrap() as char);
                s.push_str(&self.ident_tail());
                Tok::Upper(s)
            }
            other => {
                return Err(ParseError {
                    line,
                    col,
                    kind: ParseErrorKind::Syntax(format!(
                        "unexpected character `{}`",
                        other as char
                    )),
                })
            }
        };
        Ok((tok, line, col))
    }

    fn ident_tail(&mut self) -> String {
        let mut s = String::new();
        while let Some(b) = self.peek() {
            if b.is_ascii_alphanumeric() || b == b'_' {
                s.push(b as char);
                self.bump();
            } else {
                break;
            }
        }
        s
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    tok_line: u32,
    tok_col: u32,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ParseError> {
        let mut lexer = Lexer::new(src);
        let (tok, tok_line, tok_col) = lexer.next_tok()?;
        Ok(Parser {
            lexer,
            tok,
            tok_line,
            tok_col,
        })
    }

    fn advance(&mut self) -> Result<Tok, ParseError> {
        let (tok, line, col) = self.lexer.next_tok()?;
        self.tok_line = line;
        self.tok_col = col;
        Ok(std::mem::replace(&mut self.tok, tok))
    }

    fn error_here(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: self.tok_line,
            col: self.tok_col,
            kind,
        }
    }

    fn expect(&mut self, want: &Tok) -> Result<(), ParseError> {
        if &self.tok == want {
            self.advance()?;
            Ok(())
        } else {
            Err(self.error_here(ParseErrorKind::Syntax(format!(
                "expected {want}, found {}",
                self.tok
            ))))
        }
    }

    fn lower_ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.tok.clone() {
            Tok::Lower(s) => {
                self.advance()?;
                Ok(s)
            }
            other => Err(self.error_here(ParseErrorKind::Syntax(format!(
                "expected {what}, found {other}"
            )))),
        }
    }
}

/// Parses a whole problem file.
pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    let mut parser = Parser::new(text)?;
    let mut signature = Signature::new();
    let mut clauses = Vec::new();
    let mut seen_names: HashMap<String, ()> = HashMap::new();

    while parser.tok != Tok::Eof {
        let kw = parser.lower_ident("`cnf`")?;
        if kw != "cnf" {
            return Err(parser.error_here(ParseErrorKind::Syntax(format!(
                "expected `cnf`, found `{kw}`"
            ))));
        }
        parser.expect(&Tok::LParen)?;
        let (name_line, name_col) = (parser.tok_line, parser.tok_col);
        let name = parser.lower_ident("a clause name")?;
        parser.expect(&Tok::Comma)?;
        let role_word = parser.lower_ident("a role")?;
        let role = match role_word.as_str() {
            "axiom" => {
                if seen_names.insert(name.clone(), ()).is_some() {
                    return Err(ParseError {
                        line: name_line,
                        col: name_col,
                        kind: ParseErrorKind::DuplicateAxiomName(name),
                    });
                }
                Role::Axiom(name)
            }
            "negated_conjecture" => Role::NegatedConjecture,
            other => {
                return Err(parser.error_here(ParseErrorKind::Syntax(format!(
                    "unknown role `{other}`"
                ))))
            }
        };
        parser.expect(&Tok::Comma)?;
        let literals = parse_clause_body(&mut parser, &mut signature)?;
        parser.expect(&Tok::RParen)?;
        parser.expect(&Tok::Period)?;

        clauses.push(Clause {
            id: clauses.len() as u32,
            literals,
            origin: Origin::Input(role),
        });
    }

    if clauses.is_empty() {
        return Err(parser.error_here(ParseErrorKind::EmptyProblem));
    }
    Ok(Problem { signature, clauses })
}

fn parse_clause_body(
    parser: &mut Parser<'_>,
    sig: &mut Signature,
) -> Result<Vec<Literal>, ParseError> {
    // optional parentheses around the whole disjunction
    let parenthesised = parser.tok == Tok::LParen;
    if parenthesised {
        parser.advance()?;
    }
    let mut vars: HashMap<String, u32> = HashMap::new();
    let mut literals = Vec::new();
    if parser.tok == Tok::DollarFalse {
        parser.advance()?;
    } else {
        loop {
            literals.push(parse_literal(parser, sig, &mut vars)?);
            if parser.tok == Tok::Pipe {
                parser.advance()?;
            } else {
                break;
            }
        }
    }
    if parenthesised {
        parser.expect(&Tok::RParen)?;
    }
    Ok(literals)
}

fn parse_literal(
    parser: &mut Parser<'_>,
    sig: &mut Signature,
    vars: &mut HashMap<String, u32>,
) -> Result<Literal, ParseError> {
    let positive = if parser.tok == Tok::Tilde {
        parser.advance()?;
        false
    } else {
        true
    };
    let (line, col) = (parser.tok_line, parser.tok_col);
    let name = parser.lower_ident("a predicate symbol")?;
    let args = parse_args(parser, sig, vars)?;
    let predicate = sig
        .intern(&name, args.len(), SymbolKind::Predicate)
        .map_err(|e| ParseError {
            line,
            col,
            kind: ParseErrorKind::ArityConflict {
                name: e.name,
                declared: e.declared,
                new: e.new,
            },
        })?;
    Ok(Literal {
        positive,
        predicate,
        args,
    })
}

fn parse_args(
    parser: &mut Parser<'_>,
    sig: &mut Signature,
    vars: &mut HashMap<String, u32>,
) -> Result<Vec<Term>, ParseError> {
    let mut args = Vec::new();
    if parser.tok == Tok::LParen {
        parser.advance()?;
        loop {
            args.push(parse_term(parser, sig, vars)?);
            if parser.tok == Tok::Comma {
                parser.advance()?;
            } else {
                break;
            }
        }
        parser.expect(&Tok::RParen)?;
    }
    Ok(args)
}

fn parse_term(
    parser: &mut Parser<'_>,
    sig: &mut Signature,
    vars: &mut HashMap<String, u32>,
) -> Result<Term, ParseError> {
    match parser.tok.clone() {
        Tok::Upper(name) => {
            parser.advance()?;
            let next = vars.len() as u32;
            let id = *vars.entry(name).or_insert(next);
            Ok(Term::Var(id))
        }
        Tok::Lower(name) => {
            let (line, col) = (parser.tok_line, parser.tok_col);
            parser.advance()?;
            let args = parse_args(parser, sig, vars)?;
            let sym = sig
                .intern(&name, args.len(), SymbolKind::Function)
                .map_err(|e| ParseError {
                    line,
                    col,
                    kind: ParseErrorKind::ArityConflict {
                        name: e.name,
                        declared: e.declared,
                        new: e.new,
                    },
                })?;
            Ok(Term::App(sym, args))
        }
        other => Err(parser.error_here(ParseErrorKind::Syntax(format!(
            "expected a term, found {other}"
        )))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fol::format_clause;

    #[test]
    fn parses_a_named_axiom() {
        let p = parse_problem("cnf(ax_refl, axiom, eq(X,X)).").unwrap();
        assert_eq!(p.clauses.len(), 1);
        let clause = &p.clauses[0];
        assert_eq!(clause.literals.len(), 1);
        assert!(clause.literals[0].positive);
        assert_eq!(p.axiom_name(0), Some("ax_refl"));
        // both argument positions are the same variable
        assert_eq!(clause.literals[0].args[0], clause.literals[0].args[1]);
    }

    #[test]
    fn parses_a_negated_conjecture() {
        let p = parse_problem("cnf(goal, negated_conjecture, ~p(a)).").unwrap();
        assert!(p.is_conjecture(0));
        assert!(!p.clauses[0].literals[0].positive);
    }

    #[test]
    fn reports_missing_terminator_position() {
        let err = parse_problem("cnf(x, axiom, p(a)").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Syntax(_)));
        assert_eq!(err.line, 1);
        assert_eq!(err.col, 19);
    }

    #[test]
    fn rejects_duplicate_axiom_names() {
        let err = parse_problem("cnf(a, axiom, p(c)).\ncnf(a, axiom, q(c)).").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::DuplicateAxiomName("a".into()));
        assert_eq!(err.line, 2);
    }

    #[test]
    fn rejects_arity_conflicts() {
        let err = parse_problem("cnf(a, axiom, p(c)).\ncnf(b, axiom, p(c,c)).").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::ArityConflict { .. }));
    }

    #[test]
    fn accepts_comments_parens_and_empty_clause() {
        let text = "% a comment\ncnf(a, axiom, (p(b)|~q)).\ncnf(bad, axiom, $false).\n";
        let p = parse_problem(text).unwrap();
        assert_eq!(p.clauses.len(), 2);
        assert!(p.clauses[1].is_empty());
        assert_eq!(format_clause(&p.clauses[1], &p.signature), "$false");
    }

    #[test]
    fn print_parse_round_trip_is_stable() {
        let text = "cnf(a1, axiom, p(f(X),Y)|~q(Y)).\ncnf(g, negated_conjecture, ~p(c,c)).\n";
        let p1 = parse_problem(text).unwrap();
        let printed = p1.to_file_string();
        let p2 = parse_problem(&printed).unwrap();
        assert_eq!(printed, p2.to_file_string());
        assert_eq!(p1.clauses.len(), p2.clauses.len());
        for (a, b) in p1.clauses.iter().zip(&p2.clauses) {
            assert!(a.same_clause(b));
        }
    }
}
