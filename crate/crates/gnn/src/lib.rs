//! Graph classifiers over labelled graphs: five convolution variants,
//! self-attention top-k pooling, per-block `[mean ∥ max]` readouts summed
//! into one graph vector, and an MLP head.

mod layers;
mod model;
mod topo;

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use vegnn_core::seed::derive_seed;

pub use layers::{pooled_size, readout, select_top, Conv, Init, Mlp, Pooled, SagPool};
pub use model::{GnnConfig, Model};
pub use topo::{Batch, GraphTensor, Topology};

#[derive(Debug, thiserror::Error)]
pub enum GnnError {
    #[error(transparent)]
    Tensor(#[from] vegnn_tensor::TensorError),
    #[error(transparent)]
    Graph(#[from] vegnn_core::graph::GraphError),
    #[error("graph {0} of the batch has no vertices")]
    EmptyGraph(usize),
    #[error("feature width {got} does not match the model's {want}")]
    InputWidth { got: usize, want: usize },
    #[error("model checkpoint: {0}")]
    Checkpoint(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Gcn,
    Multiscale,
    Gat,
    Sage,
    Arma,
}

impl Variant {
    pub const ALL: [Variant; 5] = [Variant::Gcn, Variant::Multiscale, Variant::Gat, Variant::Sage, Variant::Arma];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Gcn => "gcn",
            Variant::Multiscale => "multiscale",
            Variant::Gat => "gat",
            Variant::Sage => "sage",
            Variant::Arma => "arma",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown variant `{0}` (expected gcn, multiscale, gat, sage or arma)")]
pub struct UnknownVariant(pub String);

impl FromStr for Variant {
    type Err = UnknownVariant;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL.into_iter().find(|v| v.name() == s).ok_or_else(|| UnknownVariant(s.to_string()))
    }
}

/// Glorot-uniform `rows × cols` matrix with bound `sqrt(6 / (fan_in +
/// fan_out))`, filled row-major from a stream keyed by `(seed, name)`.
/// Appending rows leaves the earlier rows unchanged.
pub fn glorot(seed: u64, name: &str, rows: usize, cols: usize, fan_in: usize, fan_out: usize) -> Array2<f64> {
    let bound = (6.0 / (fan_in.max(1) + fan_out.max(1)) as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, name));
    Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-bound..bound))
}
