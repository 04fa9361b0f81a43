use std::collections::BTreeSet;

use vegnn_core::graph::{LabelSymbol, LabeledGraph, Vocabulary};
use vegnn_gnn::GraphTensor;

use crate::TrainError;

/// Feature columns: sorted base labels, then `relations` in order, then any
/// other label found in `graphs`, sorted.
pub fn vocabulary(graphs: &[LabeledGraph], relations: &[LabelSymbol]) -> Vocabulary {
    let mut v = Vocabulary::from_base_labels(graphs);
    v.extend(relations.iter().cloned());
    let rest: BTreeSet<LabelSymbol> = graphs.iter().flat_map(|g| g.label_sets().iter().flatten().cloned()).collect();
    v.extend(rest);
    v
}

/// A dataset as model input.
#[derive(Clone, Debug)]
pub struct EncodedDataset {
    pub name: String,
    pub graphs: Vec<GraphTensor>,
    pub labels: Vec<usize>,
    pub vocab: Vocabulary,
    /// Columns that are non-zero in at least one graph.
    pub fan_in: usize,
}

impl EncodedDataset {
    pub fn in_dim(&self) -> usize {
        self.vocab.len()
    }
}

pub fn encode_dataset(
    name: &str,
    graphs: &[LabeledGraph],
    labels: &[usize],
    relations: &[LabelSymbol],
) -> Result<EncodedDataset, TrainError> {
    let vocab = vocabulary(graphs, relations);
    let tensors = graphs.iter().map(|g| GraphTensor::from_graph(g, &vocab)).collect::<Result<Vec<_>, _>>()?;
    let mut active = vec![false; vocab.len()];
    for t in &tensors {
        for row in t.x.rows() {
            for (a, &x) in active.iter_mut().zip(row) {
                *a |= x != 0.0;
            }
        }
    }
    let fan_in = active.iter().filter(|&&a| a).count().max(1);
    Ok(EncodedDataset { name: name.to_string(), graphs: tensors, labels: labels.to_vec(), vocab, fan_in })
}
