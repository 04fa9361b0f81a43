//! n-ary relations as hypergraphs and vertex enrichment.
//!
//! A relation maps a graph to a set of hyperedges. Enrichment adds the
//! relation's symbol `R/n` to the label set of every vertex in one of those
//! hyperedges; edges and their labels are left untouched.

use std::cell::OnceCell;
use std::collections::{BTreeSet, HashSet};

use crate::chem::{Catalog, StructureAnalysis, DEFAULT_MAX_RING_LEN};
use crate::graph::{Hypergraph, LabelSet, LabelSymbol, LabeledGraph, VertexId};
use crate::ilp::{eval_relation_on_graph, molecule_facts, FactStore, IlpError, LearnedRelation, QueryBudget};

/// Largest hyperedge a relation may contribute.
pub const DEFAULT_MAX_ARITY: usize = 8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnrichError {
    #[error("relation `{0}` appears twice")]
    DuplicateRelation(String),
    #[error("relation learning failed: {0}")]
    Learner(#[from] IlpError),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Relation {
    /// Every detected structure carrying this label.
    Structure(LabelSymbol),
    /// A learned relation; contributes at most one hyperedge per graph.
    Learned(LearnedRelation),
}

impl Relation {
    pub fn symbol(&self) -> LabelSymbol {
        match self {
            Relation::Structure(s) => s.clone(),
            Relation::Learned(r) => r.symbol(),
        }
    }
}

/// An ordered list of relations with unique names.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RelationSet {
    relations: Vec<Relation>,
}

impl RelationSet {
    pub fn new(relations: Vec<Relation>) -> Result<Self, EnrichError> {
        let mut seen = HashSet::new();
        for r in &relations {
            let s = r.symbol();
            if !seen.insert(s.name().to_string()) {
                return Err(EnrichError::DuplicateRelation(s.to_string()));
            }
        }
        Ok(Self { relations })
    }

    /// One relation per label the catalog can produce.
    pub fn from_catalog(catalog: &Catalog, max_ring_len: usize) -> Self {
        let mut seen = HashSet::new();
        let relations = catalog
            .relation_symbols(max_ring_len)
            .into_iter()
            .filter(|s| seen.insert(s.name().to_string()))
            .map(Relation::Structure)
            .collect();
        Self { relations }
    }

    pub fn from_symbols(symbols: impl IntoIterator<Item = LabelSymbol>) -> Result<Self, EnrichError> {
        Self::new(symbols.into_iter().map(Relation::Structure).collect())
    }

    /// `self` followed by `learned`.
    pub fn with_learned(&self, learned: impl IntoIterator<Item = LearnedRelation>) -> Result<Self, EnrichError> {
        let mut all = self.relations.clone();
        all.extend(learned.into_iter().map(Relation::Learned));
        Self::new(all)
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn symbols(&self) -> Vec<LabelSymbol> {
        self.relations.iter().map(Relation::symbol).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnrichOptions {
    /// Also add the labels of catalog ancestors of each detected structure.
    pub expand_hierarchy: bool,
    pub max_arity: usize,
    pub max_ring_len: usize,
    pub budget: QueryBudget,
}

impl Default for EnrichOptions {
    fn default() -> Self {
        Self {
            expand_hierarchy: false,
            max_arity: DEFAULT_MAX_ARITY,
            max_ring_len: DEFAULT_MAX_RING_LEN,
            budget: QueryBudget::default(),
        }
    }
}

/// Per-graph cache of structure detections and background facts.
pub struct GraphContext<'a> {
    pub graph: &'a LabeledGraph,
    catalog: &'a Catalog,
    max_ring_len: usize,
    analysis: OnceCell<StructureAnalysis>,
    facts: OnceCell<FactStore>,
}

impl<'a> GraphContext<'a> {
    pub fn new(graph: &'a LabeledGraph, catalog: &'a Catalog, max_ring_len: usize) -> Self {
        Self { graph, catalog, max_ring_len, analysis: OnceCell::new(), facts: OnceCell::new() }
    }

    pub fn analysis(&self) -> &StructureAnalysis {
        self.analysis.get_or_init(|| StructureAnalysis::new(self.graph, self.catalog, self.max_ring_len))
    }

    pub fn facts(&self) -> &FactStore {
        self.facts.get_or_init(|| molecule_facts(self.graph, self.analysis()))
    }
}

/// Applies relations to graphs using one catalog and one set of options.
#[derive(Clone, Debug)]
pub struct Enricher<'a> {
    pub catalog: &'a Catalog,
    pub options: EnrichOptions,
}

impl<'a> Enricher<'a> {
    pub fn new(catalog: &'a Catalog) -> Self {
        Self { catalog, options: EnrichOptions::default() }
    }

    pub fn with_options(catalog: &'a Catalog, options: EnrichOptions) -> Self {
        Self { catalog, options }
    }

    pub fn context<'g>(&self, g: &'g LabeledGraph) -> GraphContext<'g>
    where
        'a: 'g,
    {
        GraphContext::new(g, self.catalog, self.options.max_ring_len)
    }

    /// Hyperedges of `r` on the context's graph, each with the extra labels it
    /// contributes beyond `R/n` (catalog ancestors when expanding the
    /// hierarchy).
    fn hyperedges(&self, ctx: &GraphContext<'_>, r: &Relation) -> Vec<(BTreeSet<VertexId>, Vec<LabelSymbol>)> {
        let mut out = Vec::new();
        match r {
            Relation::Structure(sym) => {
                for s in ctx.analysis().structures.iter().filter(|s| &s.label == sym) {
                    let extra = if self.options.expand_hierarchy {
                        self.catalog
                            .ancestors(&s.struc_type)
                            .iter()
                            .map(|e| LabelSymbol::relation(&e.label_name(s.length), s.length as u32))
                            .collect()
                    } else {
                        Vec::new()
                    };
                    out.push((s.atoms.clone(), extra));
                }
            }
            Relation::Learned(l) => {
                if let Some(h) = eval_relation_on_graph(l, ctx.facts(), self.options.budget) {
                    out.push((h, Vec::new()));
                }
            }
        }
        out.retain(|(h, _)| {
            let ok = h.len() <= self.options.max_arity;
            if !ok {
                log::warn!("{}: dropping a {}-vertex hyperedge of {}", ctx.graph.id(), h.len(), r.symbol());
            }
            ok
        });
        out
    }

    /// The hypergraph of one relation: its hyperedges labelled `{R/n}`;
    /// member vertices labelled with their original labels plus `R/n`, all
    /// other vertices with the empty set.
    pub fn relation_to_hypergraph(&self, g: &LabeledGraph, r: &Relation) -> Hypergraph {
        self.relation_hypergraph_in(&self.context(g), r)
    }

    fn relation_hypergraph_in(&self, ctx: &GraphContext<'_>, r: &Relation) -> Hypergraph {
        let g = ctx.graph;
        let sym = r.symbol();
        let mut h = Hypergraph::new(g.vertices().iter().copied());
        for (edge, _) in self.hyperedges(ctx, r) {
            for &v in &edge {
                let own = g.labels(v).expect("hyperedge members are graph vertices");
                h.add_vertex_labels(v, own.iter().cloned().chain([sym.clone()]));
            }
            h.add_hyperedge(edge, sym.clone()).expect("non-empty hyperedge over graph vertices");
        }
        h
    }

    /// The union of the hypergraphs of every relation in `rs`.
    pub fn union_relations(&self, g: &LabeledGraph, rs: &RelationSet) -> Hypergraph {
        let ctx = self.context(g);
        let mut h = Hypergraph::new(g.vertices().iter().copied());
        for r in rs.relations() {
            h.union_with(&self.relation_hypergraph_in(&ctx, r));
        }
        h
    }

    /// Vertex enrichment: a copy of `g` in which every vertex of every
    /// hyperedge of `R_i` also carries `R_i/n`.
    pub fn enrich_graph(&self, g: &LabeledGraph, rs: &RelationSet) -> LabeledGraph {
        let ctx = self.context(g);
        let mut psi: Vec<LabelSet> = g.label_sets().to_vec();
        for r in rs.relations() {
            let sym = r.symbol();
            for (edge, extra) in self.hyperedges(&ctx, r) {
                for v in edge {
                    let i = g.index_of(v).expect("hyperedge members are graph vertices");
                    psi[i].insert(sym.clone());
                    psi[i].extend(extra.iter().cloned());
                }
            }
        }
        g.with_vertex_labels(psi)
    }

    /// Learns `n` draws worth of relations with `learner` and enriches with
    /// `rs` plus the result. With `n = 0` the learner is not called.
    pub fn augment_rels(
        &self,
        g: &LabeledGraph,
        rs: &RelationSet,
        n: usize,
        learner: impl FnOnce(usize) -> Result<Vec<LearnedRelation>, IlpError>,
    ) -> Result<LabeledGraph, EnrichError> {
        let all = if n == 0 { rs.clone() } else { rs.with_learned(learner(n)?)? };
        Ok(self.enrich_graph(g, &all))
    }
}

/// Enrichment with the given catalog and default options.
pub fn enrich_graph(g: &LabeledGraph, rs: &RelationSet, catalog: &Catalog) -> LabeledGraph {
    Enricher::new(catalog).enrich_graph(g, rs)
}
