use std::borrow::Borrow;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{loss_and_gradients, predict, ModelParams, Optimizer, OptimizerKind};
use crate::error::{Error, Result};
use crate::tensor::{Scalar, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
    #[serde(default)]
    pub optimizer: OptimizerKind,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            batch_size: 32,
            lr: 1e-4,
            seed: 0,
            optimizer: OptimizerKind::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome<T = f32> {
    pub params: ModelParams<T>,
    /// Mean per-example loss of each epoch, measured during the epoch.
    pub loss_trace: Vec<f64>,
}

/// Mini-batch training with a per-epoch shuffle drawn from `config.seed`.
/// The final-epoch parameters are returned.
pub fn train<T: Scalar, X: Borrow<Tensor<T>>>(
    params: ModelParams<T>,
    inputs: &[X],
    labels: &[usize],
    config: &TrainConfig,
) -> Result<TrainOutcome<T>> {
    if inputs.is_empty() {
        return Err(Error::EmptyInput);
    }
    if inputs.len() != labels.len() {
        return Err(Error::LengthMismatch(inputs.len(), labels.len()));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::InvalidLabel {
            label: bad,
            num_classes: 2,
        });
    }
    if config.batch_size == 0 {
        return Err(Error::InvalidConfig("batch_size must be positive".into()));
    }

    let mut params = params;
    let mut optimizer = Optimizer::new(config.optimizer, &params);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    let mut loss_trace = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&Tensor<T>> = chunk.iter().map(|&i| inputs[i].borrow()).collect();
            let batch_labels: Vec<usize> = chunk.iter().map(|&i| labels[i]).collect();
            let (loss, grads) = loss_and_gradients(&params, &batch, &batch_labels)?;
            epoch_loss += loss.as_f64() * chunk.len() as f64;
            optimizer.step(&mut params, &grads, config.lr)?;
        }
        let mean = epoch_loss / inputs.len() as f64;
        log::info!("epoch {}/{} loss {:.6}", epoch + 1, config.epochs, mean);
        loss_trace.push(mean);
    }
    Ok(TrainOutcome { params, loss_trace })
}

/// Fraction of inputs whose predicted class equals the label.
pub fn accuracy<T: Scalar, X: Borrow<Tensor<T>>>(
    params: &ModelParams<T>,
    inputs: &[X],
    labels: &[usize],
) -> Result<f64> {
    if inputs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut correct = 0;
    for (x, &y) in inputs.iter().zip(labels) {
        if predict(params, x.borrow())? == y {
            correct += 1;
        }
    }
    Ok(correct as f64 / inputs.len() as f64)
}
