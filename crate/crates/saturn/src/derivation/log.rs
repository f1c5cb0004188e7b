//! Line-oriented derivation log, the exchange format between prover
//! and trainer. One node per line in topological order:
//!
//! ```text
//! i <id> <axiom-name|$unknown|$goal> <level|*>
//! d <id> <rule> <premise-id>...
//! s <id>        (selected, trailer)
//! p <id>        (on the proof, trailer)
//! ```
//!
//! The writer emits node lines in id order followed by sorted `s` and
//! `p` trailers; parsing that form back reproduces the bytes exactly.

use std::fmt::Write as _;

use crate::saturation::RuleId;
use crate::sine::SineLevel;

use super::{Dag, DagError, InitialTag, NodeId, NodeLabel};

pub fn write_log(dag: &Dag) -> String {
    let mut out = String::new();
    for (id, node) in dag.nodes.iter().enumerate() {
        match node {
            NodeLabel::Initial { tag, level } => {
                let tag = match tag {
                    InitialTag::Axiom(name) => name.as_str(),
                    InitialTag::Unknown => "$unknown",
                    InitialTag::Goal => "$goal",
                };
                match level {
                    SineLevel::Reached(l) => {
                        let _ = writeln!(out, "i {id} {tag} {l}");
                    }
                    SineLevel::Unreached => {
                        let _ = writeln!(out, "i {id} {tag} *");
                    }
                }
            }
            NodeLabel::Derived { rule, premises } => {
                let _ = write!(out, "d {id} {}", rule.code());
                for p in premises {
                    let _ = write!(out, " {p}");
                }
                out.push('\n');
            }
        }
    }
    for id in &dag.selected {
        let _ = writeln!(out, "s {id}");
    }
    if let Some(proof) = &dag.proof {
        for id in proof {
            let _ = writeln!(out, "p {id}");
        }
    }
    out
}

pub fn parse_log(text: &str, problem: impl Into<String>) -> Result<Dag, DagError> {
    let mut dag = Dag::new(problem);
    let mut saw_proof_line = false;
    let mut proof = std::collections::BTreeSet::new();

    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let err = |msg: &str| DagError::Log {
            line: lineno,
            msg: msg.to_owned(),
        };
        let mut fields = line.split(' ');
        let kind = fields.next().ok_or_else(|| err("empty line"))?;
        match kind {
            "i" | "d" => {
                let id: NodeId = fields
                    .next()
                    .and_then(|f| f.parse().ok())
                    .ok_or_else(|| err("missing or malformed node id"))?;
                if id as usize != dag.nodes.len() {
                    return Err(err(&format!(
                        "node id {id} out of order, expected {}",
                        dag.nodes.len()
                    )));
                }
                if kind == "i" {
                    let tag = match fields.next().ok_or_else(|| err("missing tag"))? {
                        "$unknown" => InitialTag::Unknown,
                        "$goal" => InitialTag::Goal,
                        name if !name.starts_with('$') => InitialTag::Axiom(name.to_owned()),
                        other => return Err(err(&format!("unknown tag `{other}`"))),
                    };
                    let level = match fields.next().ok_or_else(|| err("missing level"))? {
                        "*" => SineLevel::Unreached,
                        digits => SineLevel::Reached(
                            digits
                                .parse()
                                .map_err(|_| err("malformed SInE level"))?,
                        ),
                    };
                    dag.nodes.push(NodeLabel::Initial { tag, level });
                } else {
                    let rule = fields
                        .next()
                        .and_then(RuleId::from_code)
                        .ok_or_else(|| err("unknown rule code"))?;
                    let mut premises = Vec::new();
                    for field in fields.by_ref() {
                        let p: NodeId =
                            field.parse().map_err(|_| err("malformed premise id"))?;
                        if p >= id {
                            return Err(err(&format!(
                                "premise {p} does not precede node {id}"
                            )));
                        }
                        premises.push(p);
                    }
                    if premises.len() != rule.arity() {
                        return Err(err(&format!(
                            "rule {} expects {} premises, got {}",
                            rule.code(),
                            rule.arity(),
                            premises.len()
                        )));
                    }
                    dag.nodes.push(NodeLabel::Derived { rule, premises });
                }
            }
            "s" | "p" => {
                let id: NodeId = fields
                    .next()
                    .and_then(|f| f.parse().ok())
                    .ok_or_else(|| err("missing or malformed node id"))?;
                if id as usize >= dag.nodes.len() {
                    return Err(err(&format!("trailer references unknown node {id}")));
                }
                if kind == "s" {
                    dag.selected.insert(id);
                } else {
                    saw_proof_line = true;
                    proof.insert(id);
                }
            }
            other => return Err(err(&format!("unknown line kind `{other}`"))),
        }
        if fields.next().is_some() && kind != "d" {
            return Err(err("trailing fields"));
        }
    }

    if saw_proof_line {
        dag.proof = Some(proof);
    }
    Ok(dag)
}
