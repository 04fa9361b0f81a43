//! A small mode-directed ILP engine: saturation into a bottom clause,
//! θ-subsumption, clause sampling, coverage and the relation-learning loop.
//!
//! Clauses are function-free. Variables are numbered per clause; constants
//! are [`Value`]s, which are either atoms or lists of atoms (the reified atom
//! sets of `has_struc`, `fused` and `connected`).

mod bottom;
mod facts;
mod learn;
mod modes;
mod sample;
mod subsume;

use std::fmt;
use std::sync::Arc;

pub use bottom::build_bottom_clause;
pub use facts::{molecule_facts, Background, Example, FactStore, QueryBudget};
pub use learn::{
    clause_coverage, eval_relation_on_graph, learn_rels, parse_relations, write_relations, Coverage, LearnConfig,
    LearnedRelation,
};
pub use modes::{default_modes, parse_modes, ArgMode, ModeArg, ModeDecl, ModeSet};
pub use sample::{redundant, sample_clause, ClauseSampler, SamplerKind};
pub use subsume::theta_subsumes;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IlpError {
    #[error("mode file: {0}")]
    Modes(String),
    #[error("saturation depth must be at least 1")]
    ZeroDepth,
    #[error("unknown example molecule `{0}`")]
    UnknownMolecule(String),
    #[error("relation file line {line}: {msg}")]
    RelationFile { line: usize, msg: String },
}

/// A ground constant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Atom(Arc<str>),
    List(Arc<[Arc<str>]>),
}

impl Value {
    pub fn atom(s: &str) -> Self {
        Value::Atom(s.into())
    }

    pub fn list<S: AsRef<str>>(items: impl IntoIterator<Item = S>) -> Self {
        Value::List(items.into_iter().map(|s| Arc::from(s.as_ref())).collect())
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Value::Atom(a) => Some(a),
            Value::List(_) => None,
        }
    }
}

fn needs_quotes(s: &str) -> bool {
    let mut chars = s.chars();
    let plain_name = chars.next().is_some_and(|c| c.is_ascii_lowercase()) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
    let number = {
        let t = s.strip_prefix('-').unwrap_or(s);
        !t.is_empty() && t.chars().all(|c| c.is_ascii_digit() || c == '.') && t.chars().next().unwrap().is_ascii_digit()
    };
    !(plain_name || number)
}

fn write_atom(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    if needs_quotes(s) {
        write!(f, "'{s}'")
    } else {
        f.write_str(s)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Atom(a) => write_atom(f, a),
            Value::List(items) => {
                f.write_str("[")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write_atom(f, it)?;
                }
                f.write_str("]")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arg {
    Var(usize),
    Const(Value),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub pred: Arc<str>,
    pub args: Vec<Arg>,
}

impl Literal {
    pub fn new(pred: &str, args: Vec<Arg>) -> Self {
        Self { pred: pred.into(), args }
    }

    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.args.iter().filter_map(|a| match a {
            Arg::Var(v) => Some(*v),
            Arg::Const(_) => None,
        })
    }
}

/// A definite clause. `var_types[v]` is the mode type of variable `v`, or an
/// empty string when unknown.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    pub head: Literal,
    pub body: Vec<Literal>,
    pub var_types: Vec<Arc<str>>,
}

/// Variable names in the usual Prolog style: `A`..`Z`, then `A1`, `B1`, ...
pub fn var_name(v: usize) -> String {
    let letter = (b'A' + (v % 26) as u8) as char;
    match v / 26 {
        0 => letter.to_string(),
        k => format!("{letter}{k}"),
    }
}

fn write_literal(f: &mut fmt::Formatter<'_>, lit: &Literal) -> fmt::Result {
    write_atom(f, &lit.pred)?;
    if lit.args.is_empty() {
        return Ok(());
    }
    f.write_str("(")?;
    for (i, a) in lit.args.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        match a {
            Arg::Var(v) => f.write_str(&var_name(*v))?,
            Arg::Const(c) => write!(f, "{c}")?,
        }
    }
    f.write_str(")")
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_literal(f, self)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_literal(f, &self.head)?;
        for (i, l) in self.body.iter().enumerate() {
            f.write_str(if i == 0 { " :- " } else { ", " })?;
            write_literal(f, l)?;
        }
        f.write_str(".")
    }
}

impl Clause {
    pub fn head_only(&self) -> Clause {
        Clause { head: self.head.clone(), body: Vec::new(), var_types: self.var_types.clone() }
    }

    /// Body variables whose type is a vertex or vertex-set type, in order of
    /// first occurrence.
    pub fn vertex_vars(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for l in &self.body {
            for v in l.vars() {
                let ty = self.var_types.get(v).map(|t| &**t).unwrap_or("");
                if is_vertex_type(ty) && !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }
}

/// Mode types whose values denote atoms (vertices) or atom sets.
pub fn is_vertex_type(ty: &str) -> bool {
    matches!(ty, "atomid" | "atomids")
}

/// The `class` label name used for a class index: `pos` for 1, `neg` for 0,
/// `c<k>` otherwise.
pub fn class_name(class: usize) -> String {
    match class {
        0 => "neg".into(),
        1 => "pos".into(),
        k => format!("c{k}"),
    }
}
