use std::sync::Arc;

use vegnn_core::graph::{encode_features, GraphError, LabeledGraph, Vocabulary};
use vegnn_tensor::{Csr, Mat};

/// One graph as a feature matrix plus undirected edges over row indices.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphTensor {
    pub x: Mat,
    /// Each undirected edge once, `(a, b)` with `a < b`.
    pub edges: Vec<(usize, usize)>,
}

impl GraphTensor {
    pub fn from_graph(g: &LabeledGraph, vocab: &Vocabulary) -> Result<Self, GraphError> {
        Ok(Self { x: encode_features(g, vocab)?, edges: g.edge_indices().collect() })
    }

    pub fn num_vertices(&self) -> usize {
        self.x.nrows()
    }
}

/// The structure a layer sees: a disjoint union of graphs.
#[derive(Clone, Debug, PartialEq)]
pub struct Topology {
    /// Graph index of every row.
    pub graph_of: Arc<[usize]>,
    pub n_graphs: usize,
    /// Undirected edges, `(a, b)` with `a < b`, each once.
    pub edges: Vec<(usize, usize)>,
}

impl Topology {
    pub fn num_vertices(&self) -> usize {
        self.graph_of.len()
    }

    /// Vertex counts per graph.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.n_graphs];
        for &g in self.graph_of.iter() {
            s[g] += 1;
        }
        s
    }

    fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.num_vertices()];
        for &(a, b) in &self.edges {
            d[a] += 1;
            d[b] += 1;
        }
        d
    }

    /// `D̃^{-1/2} (A + I) D̃^{-1/2}`.
    pub fn gcn_norm(&self) -> Csr {
        let n = self.num_vertices();
        let d: Vec<f64> = self.degrees().iter().map(|&d| (d + 1) as f64).collect();
        let mut t: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, i, 1.0 / d[i])).collect();
        for &(a, b) in &self.edges {
            let w = 1.0 / (d[a] * d[b]).sqrt();
            t.push((a, b, w));
            t.push((b, a, w));
        }
        Csr::from_triplets(n, n, t)
    }

    pub fn adjacency(&self) -> Csr {
        let n = self.num_vertices();
        let t = self.edges.iter().flat_map(|&(a, b)| [(a, b, 1.0), (b, a, 1.0)]).collect();
        Csr::from_triplets(n, n, t)
    }

    /// Row-normalised adjacency; rows of isolated vertices are empty.
    pub fn mean_adjacency(&self) -> Csr {
        let n = self.num_vertices();
        let deg = self.degrees();
        let t = self
            .edges
            .iter()
            .flat_map(|&(a, b)| [(a, b, 1.0 / deg[a] as f64), (b, a, 1.0 / deg[b] as f64)])
            .collect();
        Csr::from_triplets(n, n, t)
    }

    /// `(source, target)` pairs covering every neighbourhood plus self loops,
    /// grouped by target.
    pub fn attention_pairs(&self) -> (Arc<[usize]>, Arc<[usize]>) {
        let n = self.num_vertices();
        let mut pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
        for &(a, b) in &self.edges {
            pairs.push((a, b));
            pairs.push((b, a));
        }
        pairs.sort_by_key(|&(s, t)| (t, s));
        let src: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let dst: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        (src.into(), dst.into())
    }

    /// The induced subgraph on `kept` (sorted global rows); rows are
    /// renumbered in the order of `kept`.
    pub fn induced(&self, kept: &[usize]) -> Topology {
        let mut new_index = vec![usize::MAX; self.num_vertices()];
        for (i, &k) in kept.iter().enumerate() {
            new_index[k] = i;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(a, b)| new_index[a] != usize::MAX && new_index[b] != usize::MAX)
            .map(|&(a, b)| {
                let (x, y) = (new_index[a], new_index[b]);
                (x.min(y), x.max(y))
            })
            .collect();
        Topology { graph_of: kept.iter().map(|&k| self.graph_of[k]).collect(), n_graphs: self.n_graphs, edges }
    }
}

/// Several graphs stacked into one feature matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Batch {
    pub x: Mat,
    pub topo: Topology,
}

impl Batch {
    pub fn new(graphs: &[&GraphTensor]) -> Self {
        let cols = graphs.first().map_or(0, |g| g.x.ncols());
        let views: Vec<_> = graphs.iter().map(|g| g.x.view()).collect();
        let x = if views.is_empty() {
            Mat::zeros((0, cols))
        } else {
            ndarray::concatenate(ndarray::Axis(0), &views).expect("equal feature widths")
        };
        let mut graph_of = Vec::with_capacity(x.nrows());
        let mut edges = Vec::new();
        let mut off = 0;
        for (gi, g) in graphs.iter().enumerate() {
            graph_of.extend(std::iter::repeat(gi).take(g.num_vertices()));
            edges.extend(g.edges.iter().map(|&(a, b)| (a + off, b + off)));
            off += g.num_vertices();
        }
        Self { x, topo: Topology { graph_of: graph_of.into(), n_graphs: graphs.len(), edges } }
    }
}
