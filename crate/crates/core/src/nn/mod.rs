//! A small feed-forward Q-network with hand-written backpropagation.
//!
//! Layers are valid convolutions, dense layers and rectifiers; the last layer
//! is always dense with one linear output per action.

mod checkpoint;
mod gradcheck;
mod network;
mod optim;
mod params;
mod spec;

use thiserror::Error;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CheckpointError, CheckpointMeta};
pub use gradcheck::{grad_check, relative_error, test_matrix};
pub use network::QNetwork;
pub use optim::{apply_sgd, Optimizer, OptimizerKind, OptimizerSpec};
pub use params::{init_params, NetworkParams, Tensor};
pub use spec::{InputShape, LayerSpec, NetworkSpec, Shape};

#[derive(Debug, Error)]
pub enum NetError {
    #[error("invalid network spec: {0}")]
    Spec(String),
    #[error("input has {got} values, network expects {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite values in {0}")]
    NonFinite(&'static str),
    #[error("empty batch")]
    EmptyBatch,
    #[error("action {action} out of range for {actions} outputs")]
    BadAction { action: usize, actions: usize },
}
