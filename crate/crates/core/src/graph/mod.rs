//! Labelled undirected graphs, hypergraphs and the label vocabulary.

mod io;
mod vocab;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

pub use io::{ingest_facts, parse_graph, parse_graphs, serialize_graph, serialize_graphs};
pub use vocab::{encode_features, Vocabulary};

pub type VertexId = u32;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GraphError {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("invalid label `{0}`")]
    InvalidLabel(String),
    #[error("symbol `{0}` is not in the vocabulary")]
    UnknownSymbol(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("molecule {mol}: atom {atom} has conflicting types `{first}` and `{second}`")]
    ConflictingAtomType { mol: String, atom: VertexId, first: String, second: String },
    #[error("hyperedge must be non-empty")]
    EmptyHyperedge,
}

/// A vertex or edge label. Base labels are plain atom or bond types; relation
/// labels are predicate symbols written `Name/arity`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LabelSymbol {
    Base(Arc<str>),
    Relation { name: Arc<str>, arity: u32 },
}

fn valid_name(name: &str) -> bool {
    !name.is_empty() && !name.chars().any(|c| c.is_whitespace() || c == ',' || c == '/')
}

impl LabelSymbol {
    pub fn base(name: &str) -> Self {
        Self::try_base(name).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn try_base(name: &str) -> Result<Self, GraphError> {
        if !valid_name(name) {
            return Err(GraphError::InvalidLabel(name.to_string()));
        }
        Ok(Self::Base(name.into()))
    }

    pub fn relation(name: &str, arity: u32) -> Self {
        Self::try_relation(name, arity).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn try_relation(name: &str, arity: u32) -> Result<Self, GraphError> {
        if !valid_name(name) || arity == 0 {
            return Err(GraphError::InvalidLabel(format!("{name}/{arity}")));
        }
        Ok(Self::Relation { name: name.into(), arity })
    }

    pub fn name(&self) -> &str {
        match self {
            Self::Base(n) => n,
            Self::Relation { name, .. } => name,
        }
    }

    pub fn arity(&self) -> Option<u32> {
        match self {
            Self::Base(_) => None,
            Self::Relation { arity, .. } => Some(*arity),
        }
    }

    pub fn is_relation(&self) -> bool {
        matches!(self, Self::Relation { .. })
    }

    /// Parses `Name/n` as a relation label and anything else as a base label.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        match text.rsplit_once('/') {
            Some((name, arity)) => {
                let arity = arity
                    .parse::<u32>()
                    .map_err(|_| GraphError::InvalidLabel(text.to_string()))?;
                Self::try_relation(name, arity)
            }
            None => Self::try_base(text),
        }
    }
}

impl fmt::Display for LabelSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Base(n) => f.write_str(n),
            Self::Relation { name, arity } => write!(f, "{name}/{arity}"),
        }
    }
}

pub type LabelSet = BTreeSet<LabelSymbol>;

/// An undirected vertex- and edge-labelled graph without self-loops.
///
/// Vertices are kept sorted by id; internal indices follow that order, so
/// row `i` of any per-vertex matrix corresponds to `vertices()[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledGraph {
    id: String,
    vertices: Vec<VertexId>,
    index: HashMap<VertexId, usize>,
    psi: Vec<LabelSet>,
    edges: BTreeMap<(usize, usize), LabelSet>,
    adjacency: Vec<Vec<usize>>,
}

impl LabeledGraph {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn index_of(&self, v: VertexId) -> Option<usize> {
        self.index.get(&v).copied()
    }

    fn require(&self, v: VertexId) -> Result<usize, GraphError> {
        self.index_of(v).ok_or(GraphError::UnknownVertex(v))
    }

    pub fn labels(&self, v: VertexId) -> Result<&LabelSet, GraphError> {
        Ok(&self.psi[self.require(v)?])
    }

    pub fn labels_at(&self, idx: usize) -> &LabelSet {
        &self.psi[idx]
    }

    pub fn label_sets(&self) -> &[LabelSet] {
        &self.psi
    }

    /// The set of vertices adjacent to `v`.
    pub fn neighbourhood(&self, v: VertexId) -> Result<BTreeSet<VertexId>, GraphError> {
        let i = self.require(v)?;
        Ok(self.adjacency[i].iter().map(|&j| self.vertices[j]).collect())
    }

    /// Neighbour indices of the vertex at index `idx`, ascending.
    pub fn neighbours_of_index(&self, idx: usize) -> &[usize] {
        &self.adjacency[idx]
    }

    pub fn degree_at(&self, idx: usize) -> usize {
        self.adjacency[idx].len()
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        match (self.index_of(u), self.index_of(v)) {
            (Some(a), Some(b)) => self.edges.contains_key(&(a.min(b), a.max(b))),
            _ => false,
        }
    }

    pub fn edge_labels(&self, u: VertexId, v: VertexId) -> Option<&LabelSet> {
        let (a, b) = (self.index_of(u)?, self.index_of(v)?);
        self.edges.get(&(a.min(b), a.max(b)))
    }

    pub fn edge_labels_at(&self, a: usize, b: usize) -> Option<&LabelSet> {
        self.edges.get(&(a.min(b), a.max(b)))
    }

    /// Edges as `(u, v, labels)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, &LabelSet)> + '_ {
        self.edges
            .iter()
            .map(|(&(a, b), l)| (self.vertices[a], self.vertices[b], l))
    }

    /// Edges as index pairs `(a, b)` with `a < b`.
    pub fn edge_indices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.keys().copied()
    }

    /// The directed-pair view: both `(u, v)` and `(v, u)` for every edge.
    pub fn directed_pairs(&self) -> Vec<(VertexId, VertexId)> {
        let mut out: Vec<_> = self.edges().flat_map(|(u, v, _)| [(u, v), (v, u)]).collect();
        out.sort_unstable();
        out
    }

    /// Same vertices and edges with a replacement vertex labelling.
    pub fn with_vertex_labels(&self, psi: Vec<LabelSet>) -> LabeledGraph {
        assert_eq!(psi.len(), self.vertices.len(), "one label set per vertex");
        LabeledGraph { psi, ..self.clone() }
    }

    /// Renames every vertex through `map`, which must be injective.
    pub fn relabel_vertices(&self, map: impl Fn(VertexId) -> VertexId) -> LabeledGraph {
        let mut b = GraphBuilder::new(&self.id);
        for (i, &v) in self.vertices.iter().enumerate() {
            b.add_vertex(map(v), self.psi[i].iter().cloned());
        }
        for (u, v, l) in self.edges() {
            b.add_edge(map(u), map(v), l.iter().cloned());
        }
        b.build().expect("relabelling through an injective map preserves validity")
    }
}

/// Incremental construction of a [`LabeledGraph`]; validation happens in
/// [`GraphBuilder::build`].
#[derive(Clone, Debug, Default)]
pub struct GraphBuilder {
    id: String,
    vertices: BTreeMap<VertexId, LabelSet>,
    edges: BTreeMap<(VertexId, VertexId), LabelSet>,
}

impl GraphBuilder {
    pub fn new(id: &str) -> Self {
        Self { id: id.to_string(), ..Default::default() }
    }

    /// Declares `v` (if new) and adds `labels` to its label set.
    pub fn add_vertex(&mut self, v: VertexId, labels: impl IntoIterator<Item = LabelSymbol>) -> &mut Self {
        self.vertices.entry(v).or_default().extend(labels);
        self
    }

    pub fn has_vertex(&self, v: VertexId) -> bool {
        self.vertices.contains_key(&v)
    }

    pub fn vertex_labels(&self, v: VertexId) -> Option<&LabelSet> {
        self.vertices.get(&v)
    }

    /// Adds an undirected edge; `(u, v)` and `(v, u)` denote the same edge and
    /// their labels are merged.
    pub fn add_edge(&mut self, u: VertexId, v: VertexId, labels: impl IntoIterator<Item = LabelSymbol>) -> &mut Self {
        self.edges.entry((u.min(v), u.max(v))).or_default().extend(labels);
        self
    }

    pub fn build(self) -> Result<LabeledGraph, GraphError> {
        let vertices: Vec<VertexId> = self.vertices.keys().copied().collect();
        let index: HashMap<VertexId, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let psi: Vec<LabelSet> = self.vertices.into_values().collect();
        let mut adjacency = vec![Vec::new(); vertices.len()];
        let mut edges = BTreeMap::new();
        for ((u, v), labels) in self.edges {
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            let a = *index.get(&u).ok_or(GraphError::UnknownVertex(u))?;
            let b = *index.get(&v).ok_or(GraphError::UnknownVertex(v))?;
            adjacency[a].push(b);
            adjacency[b].push(a);
            edges.insert((a, b), labels);
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        Ok(LabeledGraph { id: self.id, vertices, index, psi, edges, adjacency })
    }
}

/// A vertex set with labelled hyperedges.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Hypergraph {
    vertices: BTreeSet<VertexId>,
    hyperedges: BTreeMap<BTreeSet<VertexId>, LabelSet>,
    vertex_labels: BTreeMap<VertexId, LabelSet>,
}

impl Hypergraph {
    pub fn new(vertices: impl IntoIterator<Item = VertexId>) -> Self {
        let vertices: BTreeSet<_> = vertices.into_iter().collect();
        let vertex_labels = vertices.iter().map(|&v| (v, LabelSet::new())).collect();
        Self { vertices, hyperedges: BTreeMap::new(), vertex_labels }
    }

    /// Adds `label` to hyperedge `edge`, creating it if needed.
    pub fn add_hyperedge(&mut self, edge: BTreeSet<VertexId>, label: LabelSymbol) -> Result<(), GraphError> {
        if edge.is_empty() {
            return Err(GraphError::EmptyHyperedge);
        }
        if !label.is_relation() {
            return Err(GraphError::InvalidLabel(label.to_string()));
        }
        if let Some(v) = edge.iter().find(|v| !self.vertices.contains(v)) {
            return Err(GraphError::UnknownVertex(*v));
        }
        self.hyperedges.entry(edge).or_default().insert(label);
        Ok(())
    }

    pub fn add_vertex_labels(&mut self, v: VertexId, labels: impl IntoIterator<Item = LabelSymbol>) {
        self.vertex_labels.entry(v).or_default().extend(labels);
    }

    pub fn vertices(&self) -> &BTreeSet<VertexId> {
        &self.vertices
    }

    pub fn hyperedges(&self) -> &BTreeMap<BTreeSet<VertexId>, LabelSet> {
        &self.hyperedges
    }

    pub fn hyperedge_labels(&self, edge: &BTreeSet<VertexId>) -> Option<&LabelSet> {
        self.hyperedges.get(edge)
    }

    pub fn vertex_labels(&self, v: VertexId) -> Option<&LabelSet> {
        self.vertex_labels.get(&v)
    }

    /// Merges `other` into `self`: hyperedges and both labellings are unioned.
    pub fn union_with(&mut self, other: &Hypergraph) {
        self.vertices.extend(other.vertices.iter().copied());
        for (e, l) in &other.hyperedges {
            self.hyperedges.entry(e.clone()).or_default().extend(l.iter().cloned());
        }
        for (v, l) in &other.vertex_labels {
            self.vertex_labels.entry(*v).or_default().extend(l.iter().cloned());
        }
    }
}
