use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamConfig, AdamState};
use super::network::{lstm_backward, lstm_forward, LstmNetwork, Sequence};
use super::LstmError;

/// One supervised example: an input window and the next-step target.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub input: Sequence,
    pub target: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    /// Seeds the per-epoch shuffle and the dropout masks.
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            batch_size: 32,
            adam: AdamConfig::default(),
            seed: 0,
            shuffle: true,
        }
    }
}

/// Mini-batch Adam on the mean squared error. The last incomplete batch of
/// every epoch is dropped. Returns the mean training loss of each epoch.
pub fn train(
    net: &mut LstmNetwork,
    data: &[Sample],
    config: &TrainConfig,
) -> Result<Vec<f64>, LstmError> {
    if config.epochs == 0 || config.batch_size == 0 {
        return Err(LstmError::InvalidConfig(format!(
            "epochs ({}) and batch size ({}) must be positive",
            config.epochs, config.batch_size
        )));
    }
    let batches = data.len() / config.batch_size;
    if batches == 0 {
        return Err(LstmError::EmptyDataset {
            samples: data.len(),
            batch_size: config.batch_size,
        });
    }

    let lens: Vec<usize> = net.params().tensors().iter().map(|t| t.len()).collect();
    let mut adam = AdamState::new(config.adam, &lens);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut trace = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        if config.shuffle {
            order.shuffle(&mut rng);
        }
        let mut epoch_loss = 0.0;
        for (b, idx) in order.chunks_exact(config.batch_size).enumerate() {
            let inputs: Vec<&Sequence> = idx.iter().map(|&i| &data[i].input).collect();
            let targets: Vec<f64> = idx.iter().map(|&i| data[i].target).collect();
            let out = lstm_forward(net, &inputs, true, &mut rng)?;
            let grads = lstm_backward(net, &out.cache, &targets)?;
            if !grads.loss.is_finite() {
                return Err(LstmError::DivergedLoss { epoch, batch: b });
            }
            epoch_loss += grads.loss;
            let grad_tensors = grads.grads.tensors();
            let mut params = net.params_mut().tensors_mut();
            adam_step(&mut params, &grad_tensors, &mut adam)?;
        }
        if !net.params().is_finite() {
            return Err(LstmError::DivergedLoss {
                epoch,
                batch: batches - 1,
            });
        }
        trace.push(epoch_loss / batches as f64);
    }
    Ok(trace)
}
