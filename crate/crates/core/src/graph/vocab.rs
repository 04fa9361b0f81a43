use std::collections::HashMap;

use ndarray::Array2;

use super::{GraphError, LabelSymbol, LabeledGraph};

/// An append-only, index-stable list of label symbols used as feature columns.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Vocabulary {
    symbols: Vec<LabelSymbol>,
    index: HashMap<LabelSymbol, usize>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Base labels found in `graphs`, in sorted order.
    pub fn from_base_labels<'a>(graphs: impl IntoIterator<Item = &'a LabeledGraph>) -> Self {
        let mut base: std::collections::BTreeSet<LabelSymbol> = Default::default();
        for g in graphs {
            for set in g.label_sets() {
                base.extend(set.iter().filter(|s| !s.is_relation()).cloned());
            }
        }
        let mut v = Self::new();
        v.extend(base);
        v
    }

    /// Appends `sym` if absent; returns its column either way.
    pub fn push(&mut self, sym: LabelSymbol) -> usize {
        if let Some(&i) = self.index.get(&sym) {
            return i;
        }
        self.index.insert(sym.clone(), self.symbols.len());
        self.symbols.push(sym);
        self.symbols.len() - 1
    }

    pub fn extend(&mut self, syms: impl IntoIterator<Item = LabelSymbol>) {
        for s in syms {
            self.push(s);
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, sym: &LabelSymbol) -> Option<usize> {
        self.index.get(sym).copied()
    }

    pub fn symbols(&self) -> &[LabelSymbol] {
        &self.symbols
    }
}

/// Many-hot encoding of vertex label sets, one row per vertex in id order.
pub fn encode_features(g: &LabeledGraph, vocab: &Vocabulary) -> Result<Array2<f64>, GraphError> {
    let mut x = Array2::zeros((g.vertex_count(), vocab.len()));
    for (row, labels) in g.label_sets().iter().enumerate() {
        for s in labels {
            let col = vocab.index_of(s).ok_or_else(|| GraphError::UnknownSymbol(s.to_string()))?;
            x[[row, col]] = 1.0;
        }
    }
    Ok(x)
}
