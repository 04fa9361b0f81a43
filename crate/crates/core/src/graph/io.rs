//! Text formats: the line-oriented graph document and `bond/6` fact files.
//!
//! Graph document grammar (one or more graphs per file):
//!
//! ```text
//! graph <id>
//! v <id> <label>[,<label>]*
//! e <u> <v> <label>[,<label>]*
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Relation labels are
//! written `Name/arity`.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use super::{GraphBuilder, GraphError, LabelSymbol, LabeledGraph, VertexId};
use crate::prolog::{self, Term};

fn write_labels<'a>(out: &mut String, labels: impl IntoIterator<Item = &'a LabelSymbol>) {
    let mut first = true;
    for l in labels {
        out.push(if first { ' ' } else { ',' });
        first = false;
        let _ = write!(out, "{l}");
    }
}

pub fn serialize_graph(g: &LabeledGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "graph {}", g.id());
    for (i, v) in g.vertices().iter().enumerate() {
        let _ = write!(out, "v {v}");
        write_labels(&mut out, g.labels_at(i));
        out.push('\n');
    }
    for (u, v, labels) in g.edges() {
        let _ = write!(out, "e {u} {v}");
        write_labels(&mut out, labels);
        out.push('\n');
    }
    out
}

pub fn serialize_graphs<'a>(graphs: impl IntoIterator<Item = &'a LabeledGraph>) -> String {
    graphs.into_iter().map(serialize_graph).collect()
}

fn parse_err(line: usize, msg: impl Into<String>) -> GraphError {
    GraphError::Parse { line, msg: msg.into() }
}

fn parse_labels(field: Option<&str>, line: usize) -> Result<BTreeSet<LabelSymbol>, GraphError> {
    let Some(field) = field else { return Ok(BTreeSet::new()) };
    field
        .split(',')
        .map(|s| LabelSymbol::parse(s).map_err(|e| parse_err(line, e.to_string())))
        .collect()
}

fn parse_id(tok: Option<&str>, line: usize) -> Result<VertexId, GraphError> {
    let tok = tok.ok_or_else(|| parse_err(line, "missing vertex id"))?;
    tok.parse().map_err(|_| parse_err(line, format!("invalid vertex id `{tok}`")))
}

/// Parses a document that may contain several graphs.
pub fn parse_graphs(text: &str) -> Result<Vec<LabeledGraph>, GraphError> {
    let mut graphs = Vec::new();
    let mut current: Option<(GraphBuilder, usize)> = None;
    let finish = |cur: Option<(GraphBuilder, usize)>, graphs: &mut Vec<LabeledGraph>| -> Result<(), GraphError> {
        if let Some((b, line)) = cur {
            graphs.push(b.build().map_err(|e| parse_err(line, e.to_string()))?);
        }
        Ok(())
    };
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let kind = fields.next().unwrap_or_default();
        match kind {
            "graph" => {
                finish(current.take(), &mut graphs)?;
                let id = fields.next().ok_or_else(|| parse_err(line, "missing graph id"))?;
                current = Some((GraphBuilder::new(id), line));
            }
            "v" | "e" => {
                let (b, _) = current.as_mut().ok_or_else(|| parse_err(line, "record before `graph` header"))?;
                if kind == "v" {
                    let id = parse_id(fields.next(), line)?;
                    if b.has_vertex(id) {
                        return Err(parse_err(line, format!("duplicate vertex {id}")));
                    }
                    b.add_vertex(id, parse_labels(fields.next(), line)?);
                } else {
                    let u = parse_id(fields.next(), line)?;
                    let v = parse_id(fields.next(), line)?;
                    b.add_edge(u, v, parse_labels(fields.next(), line)?);
                }
            }
            other => return Err(parse_err(line, format!("unknown record `{other}`"))),
        }
        if fields.next().is_some() {
            return Err(parse_err(line, "trailing fields"));
        }
    }
    finish(current, &mut graphs)?;
    Ok(graphs)
}

/// Parses a document holding exactly one graph.
pub fn parse_graph(text: &str) -> Result<LabeledGraph, GraphError> {
    let mut graphs = parse_graphs(text)?;
    match graphs.len() {
        1 => Ok(graphs.pop().unwrap()),
        n => Err(parse_err(0, format!("expected one graph, found {n}"))),
    }
}

fn atom_text(t: &Term, line: usize) -> Result<&str, GraphError> {
    match t {
        Term::Atom(a) => Ok(a),
        other => Err(parse_err(line, format!("expected a constant, found `{other}`"))),
    }
}

/// Reads `bond(Mol, Atom1, Atom2, Type1, Type2, BondType).` facts into one
/// graph per molecule, in order of first appearance. Other well-formed facts
/// and directives are ignored.
pub fn ingest_facts(text: &str) -> Result<Vec<LabeledGraph>, GraphError> {
    let mut order: Vec<String> = Vec::new();
    let mut builders: HashMap<String, GraphBuilder> = HashMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let sentences = prolog::parse_program(trimmed).map_err(|e| parse_err(line, e.msg))?;
        for s in sentences {
            let Some(head) = s.head else { continue };
            match head.functor() {
                Some(("bond", 6)) if s.body.is_empty() => {}
                Some(("bond", n)) => return Err(parse_err(line, format!("bond/{n}: expected bond/6 facts"))),
                _ => continue,
            }
            let args = head.args();
            let mol = atom_text(&args[0], line)?;
            let ids = [parse_id(Some(atom_text(&args[1], line)?), line)?, parse_id(Some(atom_text(&args[2], line)?), line)?];
            let types = [atom_text(&args[3], line)?, atom_text(&args[4], line)?];
            let bond = LabelSymbol::try_base(atom_text(&args[5], line)?).map_err(|e| parse_err(line, e.to_string()))?;
            if !builders.contains_key(mol) {
                order.push(mol.to_string());
                builders.insert(mol.to_string(), GraphBuilder::new(mol));
            }
            let b = builders.get_mut(mol).unwrap();
            for (id, ty) in ids.into_iter().zip(types) {
                let sym = LabelSymbol::try_base(ty).map_err(|e| parse_err(line, e.to_string()))?;
                if let Some(existing) = b.vertex_labels(id).and_then(|l| l.iter().next()) {
                    if *existing != sym {
                        return Err(GraphError::ConflictingAtomType {
                            mol: mol.to_string(),
                            atom: id,
                            first: existing.to_string(),
                            second: ty.to_string(),
                        });
                    }
                }
                b.add_vertex(id, [sym]);
            }
            if ids[0] == ids[1] {
                return Err(parse_err(line, format!("self-loop on atom {}", ids[0])));
            }
            b.add_edge(ids[0], ids[1], [bond]);
        }
    }
    order.into_iter().map(|m| builders.remove(&m).unwrap().build()).collect()
}
