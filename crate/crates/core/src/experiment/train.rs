use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MultiMdModel, Sample};
use crate::numeric::{adam_step, AdamConfig, AdamState};
use crate::scalar::Scalar;

/// Optimizer schedule. Dropout and the auxiliary-loss weight live on
/// [`ModelConfig`](crate::model::ModelConfig) because they shape the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 0.01,
            epochs: 200,
            batch_size: 64,
            seed: 0,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!("learning rate {} must be finite and >= 0", self.lr)));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean training loss of each epoch (dropout active).
    pub history: Vec<f64>,
}

impl TrainReport {
    pub fn final_loss(&self) -> f64 {
        self.history.last().copied().unwrap_or(f64::NAN)
    }
}

/// Mini-batch Adam on the dual-learning loss.
pub fn train<T: Scalar>(model: &mut MultiMdModel<T>, samples: &[Sample<T>], cfg: &TrainConfig) -> Result<TrainReport> {
    cfg.validate()?;
    if samples.is_empty() {
        return Err(Error::Training("training set is empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = AdamState::new(&model.tensor_lens(), AdamConfig::default());
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        if cfg.shuffle {
            order.shuffle(&mut rng);
        }
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let scale = T::one() / T::of(batch.len() as f64);
            let mut grads = model.zero_gradients();
            for &i in batch {
                let s = &samples[i];
                let trace = model.forward_traced(s, Some(&mut rng))?;
                let out = trace.output().expect("traced forward");
                epoch_loss += model.sample_loss(out, s.label, s.consistency_target)?.as_f64();
                model.backward(&trace, s.label, s.consistency_target, scale, &mut grads)?;
            }
            let g = grads.tensors();
            adam_step(&mut model.tensors_mut(), &g, &mut adam, cfg.lr)?;
        }
        let mean = epoch_loss / samples.len() as f64;
        if !mean.is_finite() {
            return Err(Error::Training(format!("loss diverged at epoch {epoch}")));
        }
        history.push(mean);
    }
    Ok(TrainReport { history })
}
