//! A small dense autodiff kernel: `f64` matrices on a reverse-mode tape, the
//! graph operations message passing needs (sparse propagation, gather and
//! scatter, per-segment softmax/mean/max), NLL loss, Adam and a text
//! checkpoint format.

mod adam;
mod gradcheck;
mod params;
mod sparse;
mod tape;

pub use adam::Adam;
pub use gradcheck::{check_gradients, rel_error, GradCheck, REL_ERROR_FLOOR};
pub use params::{ParamId, ParamStore};
pub use sparse::Csr;
pub use tape::{Gradients, Tape, Var};

pub type Mat = ndarray::Array2<f64>;

#[derive(Debug, thiserror::Error)]
pub enum TensorError {
    #[error("{op}: shape mismatch {lhs:?} vs {rhs:?}")]
    Shape { op: &'static str, lhs: (usize, usize), rhs: (usize, usize) },
    #[error("{op}: {msg}")]
    Domain { op: &'static str, msg: String },
    #[error("tape already consumed by an earlier backward pass")]
    TapeConsumed,
    #[error("backward needs a 1x1 loss, got {0:?}")]
    NotScalar((usize, usize)),
    #[error("checkpoint line {line}: {msg}")]
    Checkpoint { line: usize, msg: String },
}
