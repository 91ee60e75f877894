//! Stacked LSTM regressor trained with backpropagation through time and
//! Adam on a mean-squared-error loss.
//!
//! The default architecture is two LSTM layers (150 then 50 units) whose
//! final hidden state passes through inverted dropout into a single linear
//! output unit. Gates use the logistic sigmoid; the cell candidate and the
//! cell output use `tanh`:
//!
//! ```text
//! i = σ(W_i x + U_i h + b_i)      f = σ(W_f x + U_f h + b_f)
//! g = tanh(W_g x + U_g h + b_g)   o = σ(W_o x + U_o h + b_o)
//! c' = f ⊙ c + i ⊙ g              h' = o ⊙ tanh(c')
//! ```

mod adam;
mod checkpoint;
mod network;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::{
    load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_VERSION,
};
pub use network::{
    lstm_backward, lstm_forward, ForwardCache, ForwardOutput, Gate, Gradients, LstmLayer,
    LstmNetwork, LstmParams, Sequence,
};
pub use train::{train, Sample, TrainConfig};

use thiserror::Error;

/// Hidden sizes of the reference architecture.
pub const DEFAULT_HIDDEN: [usize; 2] = [150, 50];
pub const DEFAULT_DROPOUT: f64 = 0.2;

#[derive(Debug, Error)]
pub enum LstmError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("input contains non-finite values")]
    NonFiniteInput,
    #[error(
        "forward cache was produced for parameter version {cache}, network is at version {network}"
    )]
    StaleCache { cache: u64, network: u64 },
    #[error("dataset of {samples} samples yields no full batch of size {batch_size}")]
    EmptyDataset { samples: usize, batch_size: usize },
    #[error("training loss became non-finite in epoch {epoch}, batch {batch}")]
    DivergedLoss { epoch: usize, batch: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
