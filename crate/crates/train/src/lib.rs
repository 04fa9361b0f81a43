//! Splitting, training, model selection over `m`, the Wilcoxon signed-rank
//! comparison and the two experiment drivers.

pub mod encode;
pub mod experiment;
pub mod select;
pub mod split;
pub mod train;
pub mod wilcoxon;

pub use encode::{encode_dataset, vocabulary, EncodedDataset};
pub use experiment::{
    augmented_system, compare, compare_records, comparison_table, budget_table, format_p, inert_relations, median_seed_gain,
    parse_records_tsv, records_tsv, run_experiment1, run_experiment2, Augmentation, ComparisonResult, Experiment1Report,
    Experiment2Report, ExperimentConfig, RunRecord, GNN, VEGNN,
};
pub use select::{select_m, Selection};
pub use split::{split_dataset, Split};
pub use train::{accuracy, evaluate, train_model, EarlyStopping, EpochStats, Examples, Stop, TrainConfig, Trained};
pub use wilcoxon::{wilcoxon_signed_rank, Wilcoxon, EXACT_MAX_N};

use vegnn_core::enrich::EnrichError;
use vegnn_core::graph::GraphError;
use vegnn_core::ilp::IlpError;
use vegnn_gnn::GnnError;
use vegnn_tensor::TensorError;

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error("cannot split: {0}")]
    Split(String),
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("{0} partition is empty")]
    EmptyPartition(&'static str),
    #[error("loss became {loss} at epoch {epoch}")]
    NonFinite { epoch: usize, loss: f64 },
    #[error("accuracy lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error(transparent)]
    Gnn(#[from] GnnError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Enrich(#[from] EnrichError),
    #[error(transparent)]
    Ilp(#[from] IlpError),
    #[error("thread pool: {0}")]
    Pool(String),
}
