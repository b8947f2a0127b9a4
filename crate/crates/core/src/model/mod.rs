//! The LSTM/BLSTM tagger: feature embeddings, recurrence, softmax output,
//! exact gradients, training and checkpointing.

mod checkpoint;
mod lstm;
mod params;
mod pretrain;
mod train;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use checkpoint::{load, save, Checkpoint, CheckpointError, FORMAT_VERSION, MAGIC};
pub use params::{clip_to_norm, global_norm, Params, TensorSpec};
pub use pretrain::{pretrain_backward_lm, EmbeddingTable, PretrainConfig, Pretrained};
pub use train::{adadelta_step, train, Adadelta, EpochRecord, TrainConfig};

use crate::corpus::{LabelScheme, Sentence};
use crate::decode::{decode, DecodeMethod, Posteriors};
use crate::error::{Error, Result};
use crate::features::{FeatureVector, Featurizer};
use lstm::{LstmLayout, LstmTrace};
use params::{glorot, mat_vec_acc, outer_acc, softmax_in_place, vec_mat_acc};

pub const DEFAULT_FEAT_DIM: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
    Bidirectional,
}

impl Direction {
    fn reversals(self) -> &'static [bool] {
        match self {
            Direction::Forward => &[false],
            Direction::Backward => &[true],
            Direction::Bidirectional => &[false, true],
        }
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" | "fwd" => Ok(Direction::Forward),
            "backward" | "bwd" => Ok(Direction::Backward),
            "bidirectional" | "bi" => Ok(Direction::Bidirectional),
            _ => Err(Error::Config(format!(
                "unknown direction `{s}` (expected forward, backward or bidirectional)"
            ))),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
            Direction::Bidirectional => "bidirectional",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub direction: Direction,
    /// Name of the label scheme the output layer predicts.
    pub scheme: String,
    pub word_dim: usize,
    pub pos_dim: usize,
    /// Embedding sizes for features other than word and POS; features not
    /// listed use `default_feat_dim`.
    pub feat_dims: BTreeMap<u8, usize>,
    pub default_feat_dim: usize,
    pub hidden_dim: usize,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            direction: Direction::Bidirectional,
            scheme: "eight".into(),
            word_dim: 150,
            pos_dim: 5,
            feat_dims: BTreeMap::new(),
            default_feat_dim: DEFAULT_FEAT_DIM,
            hidden_dim: 150,
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn feat_dim(&self, id: u8) -> usize {
        match id {
            1 => self.word_dim,
            2 => self.pos_dim,
            _ => self
                .feat_dims
                .get(&id)
                .copied()
                .unwrap_or(self.default_feat_dim),
        }
    }

    pub fn input_dim(&self, ids: &[u8]) -> usize {
        ids.iter().map(|&id| self.feat_dim(id)).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            self.word_dim,
            self.pos_dim,
            self.hidden_dim,
            self.default_feat_dim,
        ];
        if dims.contains(&0) || self.feat_dims.values().any(|&d| d == 0) {
            return Err(Error::Config(
                "all model dimensions must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct EmbSlot {
    id: u8,
    offset: usize,
    dim: usize,
    row_offset: usize,
}

#[derive(Debug, Clone)]
struct Layout {
    emb: Vec<EmbSlot>,
    dirs: Vec<(bool, LstmLayout)>,
    input_dim: usize,
    out_dim: usize,
    out_w: usize,
    out_b: usize,
    states: usize,
}

/// A tagger: configuration, featurizer, label scheme and weights.
#[derive(Debug, Clone)]
pub struct Model {
    pub config: ModelConfig,
    pub featurizer: Featurizer,
    pub scheme: LabelScheme,
    pub params: Params,
    layout: Layout,
}

struct Activations {
    xs: Vec<Vec<f64>>,
    traces: Vec<LstmTrace>,
    hidden: Vec<Vec<f64>>,
    logits: Vec<Vec<f64>>,
}

fn dir_name(reverse: bool) -> &'static str {
    if reverse {
        "bwd"
    } else {
        "fwd"
    }
}

fn build_params(config: &ModelConfig, featurizer: &Featurizer, states: usize) -> (Params, Layout) {
    let mut params = Params::new();
    let ids = featurizer.ids();
    let emb = ids
        .iter()
        .map(|&id| {
            let dim = config.feat_dim(id);
            let offset = params.add(format!("emb.{id}"), featurizer.table_rows(id), dim);
            EmbSlot {
                id,
                offset,
                dim,
                row_offset: Featurizer::row_offset(id),
            }
        })
        .collect();
    let input = config.input_dim(&ids);
    let hidden = config.hidden_dim;
    let dirs: Vec<(bool, LstmLayout)> = config
        .direction
        .reversals()
        .iter()
        .map(|&rev| {
            let name = dir_name(rev);
            let wx = params.add(format!("{name}.wx"), input, 4 * hidden);
            let wh = params.add(format!("{name}.wh"), hidden, 4 * hidden);
            let b = params.add(format!("{name}.b"), 1, 4 * hidden);
            (
                rev,
                LstmLayout {
                    wx,
                    wh,
                    b,
                    input,
                    hidden,
                },
            )
        })
        .collect();
    let out_dim = hidden * dirs.len();
    let out_w = params.add("out.w", out_dim, states);
    let out_b = params.add("out.b", 1, states);
    let layout = Layout {
        emb,
        dirs,
        input_dim: input,
        out_dim,
        out_w,
        out_b,
        states,
    };
    (params, layout)
}

impl Model {
    /// Builds a freshly initialised model. Embedding tables in `pretrained`
    /// are copied row by row for every word they share with the featurizer's
    /// vocabulary.
    pub fn new(
        config: ModelConfig,
        featurizer: Featurizer,
        scheme: LabelScheme,
        pretrained: Option<&Pretrained>,
    ) -> Result<Self> {
        config.validate()?;
        if config.scheme != scheme.name() {
            return Err(Error::Config(format!(
                "model config names scheme `{}` but scheme `{}` was supplied",
                config.scheme,
                scheme.name()
            )));
        }
        let (mut params, layout) = build_params(&config, &featurizer, scheme.num_states());
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let tensors = params.tensors.clone();
        for t in &tensors {
            if t.name.starts_with("emb.") {
                params.fill_uniform(&t.name, glorot(t.rows, t.cols), &mut rng);
                params.values[t.offset..t.offset + t.cols]
                    .iter_mut()
                    .for_each(|v| *v = 0.0);
            } else if t.name.ends_with(".wx") || t.name.ends_with(".wh") {
                params.fill_uniform(&t.name, glorot(t.rows, t.cols / 4), &mut rng);
            } else if t.name == "out.w" {
                params.fill_uniform(&t.name, glorot(t.rows, t.cols), &mut rng);
            }
        }
        let h = config.hidden_dim;
        for (_, l) in &layout.dirs {
            params.values[l.b + h..l.b + 2 * h]
                .iter_mut()
                .for_each(|v| *v = 1.0);
        }
        if let Some(pre) = pretrained {
            for (id, table, vocab) in [
                (1u8, &pre.words, &featurizer.words),
                (2, &pre.pos, &featurizer.pos),
            ] {
                let Some(table) = table else { continue };
                let dim = config.feat_dim(id);
                if table.dim != dim {
                    return Err(Error::Model(format!(
                        "pretrained {} table has dimension {} but the model expects {dim}",
                        if id == 1 { "word" } else { "POS" },
                        table.dim
                    )));
                }
                if let Some(slot) = layout.emb.iter().find(|s| s.id == id) {
                    for row in 1..vocab.size() {
                        if let Some(src) = table.row(vocab.word(row)) {
                            let dst = slot.offset + row * dim;
                            params.values[dst..dst + dim].copy_from_slice(src);
                        }
                    }
                }
            }
        }
        params.round();
        Ok(Self {
            config,
            featurizer,
            scheme,
            params,
            layout,
        })
    }

    /// Reassembles a model from stored parts, checking tensor shapes.
    pub fn from_parts(
        config: ModelConfig,
        featurizer: Featurizer,
        scheme: LabelScheme,
        params: Params,
    ) -> Result<Self> {
        config.validate()?;
        let (expected, layout) = build_params(&config, &featurizer, scheme.num_states());
        if expected.tensors != params.tensors {
            return Err(Error::Model(
                "parameter tensors do not match the model configuration".into(),
            ));
        }
        Ok(Self {
            config,
            featurizer,
            scheme,
            params,
            layout,
        })
    }

    pub fn num_states(&self) -> usize {
        self.layout.states
    }

    fn inputs(&self, fv: &FeatureVector) -> Vec<Vec<f64>> {
        let p = &self.params.values;
        (0..fv.len())
            .map(|t| {
                let mut x = Vec::with_capacity(self.layout.input_dim);
                for (slot, &v) in self.layout.emb.iter().zip(fv.row(t)) {
                    let start = slot.offset + (v as usize + slot.row_offset) * slot.dim;
                    x.extend_from_slice(&p[start..start + slot.dim]);
                }
                x
            })
            .collect()
    }

    fn activate(&self, fv: &FeatureVector) -> Activations {
        debug_assert_eq!(fv.ids, self.featurizer.ids());
        let p = &self.params.values;
        let n = fv.len();
        let xs = self.inputs(fv);
        let mut hidden = vec![Vec::with_capacity(self.layout.out_dim); n];
        let mut traces = Vec::new();
        for &(rev, ref l) in &self.layout.dirs {
            let trace = if rev {
                let rx: Vec<Vec<f64>> = xs.iter().rev().cloned().collect();
                l.forward(p, &rx)
            } else {
                l.forward(p, &xs)
            };
            for (t, h) in hidden.iter_mut().enumerate() {
                let step = if rev { n - 1 - t } else { t };
                h.extend_from_slice(&trace.hidden[step]);
            }
            traces.push(trace);
        }
        let k = self.layout.states;
        let w = &p[self.layout.out_w..self.layout.out_w + self.layout.out_dim * k];
        let logits = hidden
            .iter()
            .map(|h| {
                let mut z = p[self.layout.out_b..self.layout.out_b + k].to_vec();
                vec_mat_acc(h, w, &mut z);
                z
            })
            .collect();
        Activations {
            xs,
            traces,
            hidden,
            logits,
        }
    }

    /// Per-token distributions over the scheme's states.
    pub fn forward(&self, fv: &FeatureVector) -> Posteriors {
        let acts = self.activate(fv);
        let k = self.layout.states;
        let mut data = Vec::with_capacity(fv.len() * k);
        for mut z in acts.logits {
            softmax_in_place(&mut z);
            data.extend(z);
        }
        Posteriors::new(fv.len(), k, data)
    }

    /// Posteriors for several sentences of different lengths. Each sentence's
    /// recurrence runs over its own tokens only, so padding a batch to a
    /// common length never changes a result.
    pub fn forward_batch(&self, batch: &[&FeatureVector]) -> Vec<Posteriors> {
        batch.iter().map(|fv| self.forward(fv)).collect()
    }

    pub fn posteriors(&self, s: &Sentence) -> Posteriors {
        self.forward(&self.featurizer.extract(s))
    }

    pub fn tag(&self, s: &Sentence, method: DecodeMethod) -> Vec<usize> {
        decode(&self.posteriors(s), &self.scheme, method)
    }

    /// Mean per-token cross-entropy over the batch.
    pub fn loss(&self, batch: &[(&FeatureVector, &[usize])]) -> f64 {
        let tokens: usize = batch.iter().map(|(fv, _)| fv.len()).sum();
        if tokens == 0 {
            return 0.0;
        }
        let total: f64 = batch
            .iter()
            .map(|(fv, labels)| {
                let acts = self.activate(fv);
                acts.logits
                    .iter()
                    .zip(labels.iter())
                    .map(|(z, &y)| cross_entropy(z, y))
                    .sum::<f64>()
            })
            .sum();
        total / tokens as f64
    }

    /// Mean per-token cross-entropy and its exact gradient with respect to
    /// every parameter (same layout as [`Params::values`]).
    pub fn loss_and_gradients(&self, batch: &[(&FeatureVector, &[usize])]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.params.len()];
        let tokens: usize = batch.iter().map(|(fv, _)| fv.len()).sum();
        if tokens == 0 {
            return (0.0, grad);
        }
        let scale = 1.0 / tokens as f64;
        let mut total = 0.0;
        for (fv, labels) in batch {
            assert_eq!(fv.len(), labels.len(), "one label per token");
            total += self.backprop(fv, labels, scale, &mut grad);
        }
        (total * scale, grad)
    }

    fn backprop(&self, fv: &FeatureVector, labels: &[usize], scale: f64, grad: &mut [f64]) -> f64 {
        let p = &self.params.values;
        let acts = self.activate(fv);
        let n = fv.len();
        let k = self.layout.states;
        let (out_dim, out_w, out_b) = (self.layout.out_dim, self.layout.out_w, self.layout.out_b);
        let w = &p[out_w..out_w + out_dim * k];
        let mut loss = 0.0;
        let mut dhidden = vec![vec![0.0; out_dim]; n];
        for t in 0..n {
            let z = &acts.logits[t];
            loss += cross_entropy(z, labels[t]);
            let mut dz = z.clone();
            softmax_in_place(&mut dz);
            dz[labels[t]] -= 1.0;
            dz.iter_mut().for_each(|v| *v *= scale);
            outer_acc(&acts.hidden[t], &dz, &mut grad[out_w..out_w + out_dim * k]);
            for (g, d) in grad[out_b..out_b + k].iter_mut().zip(&dz) {
                *g += d;
            }
            mat_vec_acc(w, &dz, &mut dhidden[t]);
        }
        let h = self.config.hidden_dim;
        let mut dxs = vec![vec![0.0; self.layout.input_dim]; n];
        for (d, (&(rev, ref l), trace)) in self.layout.dirs.iter().zip(&acts.traces).enumerate() {
            let order = |t: usize| if rev { n - 1 - t } else { t };
            let xs: Vec<Vec<f64>> = (0..n).map(|s| acts.xs[order(s)].clone()).collect();
            let dh: Vec<Vec<f64>> = (0..n)
                .map(|s| dhidden[order(s)][d * h..(d + 1) * h].to_vec())
                .collect();
            let dx = l.backward(p, &xs, trace, &dh, grad);
            for (s, row) in dx.into_iter().enumerate() {
                for (a, b) in dxs[order(s)].iter_mut().zip(row) {
                    *a += b;
                }
            }
        }
        for (t, dx) in dxs.iter().enumerate() {
            let mut pos = 0;
            for (slot, &v) in self.layout.emb.iter().zip(fv.row(t)) {
                let row = v as usize + slot.row_offset;
                if row != 0 {
                    let start = slot.offset + row * slot.dim;
                    for (g, d) in grad[start..start + slot.dim]
                        .iter_mut()
                        .zip(&dx[pos..pos + slot.dim])
                    {
                        *g += d;
                    }
                }
                pos += slot.dim;
            }
        }
        loss
    }
}

fn cross_entropy(z: &[f64], y: usize) -> f64 {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
    lse - z[y]
}
