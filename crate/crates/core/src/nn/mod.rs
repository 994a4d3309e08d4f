//! CNN-LSTM network with hand-written forward and backward passes.
//!
//! All arithmetic is `f64`. Layers are exposed both as free functions (used by
//! the gradient tests) and through [`Model`], which chains them:
//! conv/relu/dropout blocks with max pooling after every pair, a stack of
//! sequence-to-sequence LSTMs, and a dense head over the last hidden state
//! concatenated with the clip-level globals.

mod activation;
mod checkpoint;
mod conv;
mod dense;
mod dropout;
mod lstm;
mod model;
mod optim;
mod pool;
mod tensor;

use thiserror::Error;

pub use activation::{cross_entropy, relu, relu_backward, softmax, softmax_cross_entropy_backward, PROB_FLOOR};
pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, CHECKPOINT_MAGIC};
pub use conv::{conv1d_backward, conv1d_forward};
pub use dense::{dense_backward, dense_forward};
pub use dropout::{dropout, dropout_mask, DropoutMode};
pub use lstm::{lstm_backward, lstm_forward, LstmCache, LstmParams};
pub use model::{ConvParams, DenseParams, ForwardCache, Model, ModelConfig, ModelInput, Params};
pub use optim::{RmsProp, RmsPropConfig};
pub use pool::{maxpool_backward, maxpool_forward};
pub use tensor::Tensor;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("dropout rate {0} outside [0, 1)")]
    BadRate(f64),
    #[error("invalid model config: {0}")]
    Config(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, NnError>;

pub(crate) fn mismatch(what: impl Into<String>) -> NnError {
    NnError::DimensionMismatch(what.into())
}
