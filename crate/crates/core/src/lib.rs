//! Core data model and symbolic machinery for vertex-enriched graph neural
//! networks: labelled graphs, a small chemistry knowledge base, vertex
//! enrichment from n-ary relations, and a desk-scale ILP engine that invents
//! new relations from labelled examples.

pub mod chem;
pub mod dataset;
pub mod enrich;
pub mod graph;
pub mod ilp;
pub mod prolog;
pub mod seed;
pub mod synth;

pub use graph::{GraphBuilder, GraphError, Hypergraph, LabelSymbol, LabeledGraph, VertexId, Vocabulary};
