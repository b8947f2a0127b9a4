use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::checkpoint::Checkpoint;
use super::params::clip_to_norm;
use super::Model;
use crate::corpus::{derive_labels, Corpus};
use crate::decode::{decode, DecodeMethod};
use crate::error::{Error, Result};
use crate::eval::edit_prf;
use crate::features::FeatureVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub rho: f64,
    pub epsilon: f64,
    pub max_epochs: usize,
    /// Extra epochs tolerated without a dev improvement before stopping.
    pub patience: usize,
    /// Training sentences longer than this are dropped.
    pub max_train_len: usize,
    pub clip_norm: f64,
    /// Seeds the batch order.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 50,
            rho: 0.95,
            epsilon: 1e-6,
            max_epochs: 50,
            patience: 5,
            max_train_len: 50,
            clip_norm: 5.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::Config(
                "rho must lie strictly between 0 and 1".into(),
            ));
        }
        if !(self.epsilon > 0.0) || !(self.clip_norm > 0.0) {
            return Err(Error::Config(
                "epsilon and clip_norm must be positive".into(),
            ));
        }
        if self.max_train_len == 0 {
            return Err(Error::Config("max_train_len must be at least 1".into()));
        }
        Ok(())
    }
}

/// Adadelta accumulators (running averages of squared gradients and squared
/// updates).
#[derive(Debug, Clone, PartialEq)]
pub struct Adadelta {
    pub rho: f64,
    pub epsilon: f64,
    pub sq_grad: Vec<f64>,
    pub sq_update: Vec<f64>,
}

impl Adadelta {
    pub fn new(len: usize, rho: f64, epsilon: f64) -> Self {
        Self {
            rho,
            epsilon,
            sq_grad: vec![0.0; len],
            sq_update: vec![0.0; len],
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        adadelta_step(self, params, grad);
    }
}

/// One Adadelta update:
/// `E[g²] ← ρE[g²] + (1−ρ)g²`, `Δx = −√(E[Δx²]+ε)/√(E[g²]+ε)·g`,
/// `E[Δx²] ← ρE[Δx²] + (1−ρ)Δx²`, `x ← x + Δx`.
pub fn adadelta_step(state: &mut Adadelta, params: &mut [f64], grad: &[f64]) {
    let (rho, eps) = (state.rho, state.epsilon);
    for i in 0..params.len() {
        let g = grad[i];
        state.sq_grad[i] = rho * state.sq_grad[i] + (1.0 - rho) * g * g;
        let dx = -((state.sq_update[i] + eps).sqrt() / (state.sq_grad[i] + eps).sqrt()) * g;
        state.sq_update[i] = rho * state.sq_update[i] + (1.0 - rho) * dx * dx;
        params[i] += dx;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_f: f64,
}

impl std::fmt::Display for EpochRecord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}\t{:.6}\t{:.6}",
            self.epoch, self.train_loss, self.dev_f
        )
    }
}

fn examples(model: &Model, corpus: &Corpus) -> Result<Vec<(FeatureVector, Vec<usize>)>> {
    corpus
        .sentences
        .iter()
        .map(|s| {
            let labels = derive_labels(s, &model.scheme)?;
            Ok((model.featurizer.extract(s), labels))
        })
        .collect()
}

/// Dev edit F of `model` under constrained (DP) decoding.
pub(crate) fn dev_f(model: &Model, dev: &Corpus, features: &[FeatureVector]) -> Result<f64> {
    let pred: Vec<Vec<usize>> = features
        .iter()
        .map(|fv| decode(&model.forward(fv), &model.scheme, DecodeMethod::Dp))
        .collect();
    Ok(edit_prf(&pred, dev, &model.scheme)?.f1)
}

/// Trains with Adadelta on length-bucketed mini-batches, evaluating dev edit
/// F after every epoch and keeping the best parameters. Training stops once
/// more than `patience` consecutive epochs fail to improve on the best dev F,
/// or after `max_epochs`.
pub fn train(
    mut model: Model,
    train: &Corpus,
    dev: &Corpus,
    tc: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<Checkpoint> {
    tc.validate()?;
    let train = train.filter_by_length(tc.max_train_len);
    if train.is_empty() {
        return Err(Error::Model("training corpus is empty".into()));
    }
    if dev.is_empty() {
        return Err(Error::Model("dev corpus is empty".into()));
    }
    let data = examples(&model, &train)?;
    let dev_features: Vec<FeatureVector> = dev
        .sentences
        .iter()
        .map(|s| model.featurizer.extract(s))
        .collect();

    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by_key(|&i| data[i].0.len());
    let mut batches: Vec<Vec<usize>> = order.chunks(tc.batch_size).map(|c| c.to_vec()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(tc.seed);
    let mut opt = Adadelta::new(model.params.len(), tc.rho, tc.epsilon);
    let mut history = Vec::new();
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    let mut stale = 0;

    for epoch in 1..=tc.max_epochs {
        batches.shuffle(&mut rng);
        let (mut loss_sum, mut tokens) = (0.0, 0usize);
        for batch in &batches {
            let items: Vec<(&FeatureVector, &[usize])> = batch
                .iter()
                .map(|&i| (&data[i].0, data[i].1.as_slice()))
                .collect();
            let n: usize = items.iter().map(|(fv, _)| fv.len()).sum();
            let (loss, mut grad) = model.loss_and_gradients(&items);
            clip_to_norm(&mut grad, tc.clip_norm);
            opt.step(&mut model.params.values, &grad);
            model.params.round();
            loss_sum += loss * n as f64;
            tokens += n;
        }
        if !model.params.is_finite() {
            return Err(Error::Model(format!(
                "parameters became non-finite in epoch {epoch}"
            )));
        }
        let record = EpochRecord {
            epoch,
            train_loss: loss_sum / tokens.max(1) as f64,
            dev_f: dev_f(&model, dev, &dev_features)?,
        };
        on_epoch(&record);
        history.push(record);
        if best.as_ref().is_none_or(|(f, _, _)| record.dev_f > *f) {
            best = Some((record.dev_f, epoch, model.params.values.clone()));
            stale = 0;
        } else {
            stale += 1;
            if stale > tc.patience {
                break;
            }
        }
    }
    let best_epoch = best.as_ref().map(|(_, e, _)| *e);
    if let Some((_, _, values)) = best {
        model.params.values = values;
    }
    Ok(Checkpoint {
        model,
        history,
        best_epoch,
        train_config: Some(tc.clone()),
    })
}
