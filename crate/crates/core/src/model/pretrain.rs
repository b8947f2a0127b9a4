use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::lstm::LstmLayout;
use super::params::{
    clip_to_norm, glorot, mat_vec_acc, outer_acc, softmax_in_place, vec_mat_acc, Params,
};
use super::train::Adadelta;
use crate::corpus::{lexicon, Corpus};
use crate::error::{Error, Result};
use crate::features::Vocab;

/// Embedding rows keyed by the word (or POS tag) they represent.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub words: Vec<String>,
    pub dim: usize,
    pub data: Vec<f64>,
    index: HashMap<String, usize>,
}

impl EmbeddingTable {
    pub fn new(words: Vec<String>, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != words.len() * dim {
            return Err(Error::Model(format!(
                "embedding table has {} values for {} rows of dimension {dim}",
                data.len(),
                words.len()
            )));
        }
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Ok(Self {
            words,
            dim,
            data,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn row(&self, word: &str) -> Option<&[f64]> {
        self.index
            .get(word)
            .map(|&i| &self.data[i * self.dim..(i + 1) * self.dim])
    }
}

/// Pretrained word and POS tables, stored together in one text file:
///
/// ```text
/// # words <rows> <dim>
/// <word> <v1> ... <vdim>
/// # pos <rows> <dim>
/// <tag> <v1> ... <vdim>
/// ```
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Pretrained {
    pub words: Option<EmbeddingTable>,
    pub pos: Option<EmbeddingTable>,
}

impl Pretrained {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (name, table) in [("words", &self.words), ("pos", &self.pos)] {
            let Some(t) = table else { continue };
            let _ = writeln!(out, "# {name} {} {}", t.len(), t.dim);
            for (i, w) in t.words.iter().enumerate() {
                out.push_str(w);
                for v in &t.data[i * t.dim..(i + 1) * t.dim] {
                    let _ = write!(out, " {}", *v as f32);
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Format {
            path: source.to_string(),
            line,
            message,
        };
        let mut out = Pretrained::default();
        let mut lines = text.lines().enumerate().peekable();
        while let Some((i, line)) = lines.next() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let (name, rows, dim) = match fields.as_slice() {
                ["#", name, rows, dim] => (
                    *name,
                    rows.parse::<usize>()
                        .map_err(|e| err(i + 1, e.to_string()))?,
                    dim.parse::<usize>()
                        .map_err(|e| err(i + 1, e.to_string()))?,
                ),
                _ => return Err(err(i + 1, "expected `# words|pos <rows> <dim>`".into())),
            };
            let mut words = Vec::with_capacity(rows);
            let mut data = Vec::with_capacity(rows * dim);
            for _ in 0..rows {
                let (j, row) = lines
                    .next()
                    .ok_or_else(|| err(i + 1, format!("table `{name}` is truncated")))?;
                let mut f = row.split_whitespace();
                words.push(
                    f.next()
                        .ok_or_else(|| err(j + 1, "empty row".into()))?
                        .to_string(),
                );
                let values: Vec<f64> = f
                    .map(|v| v.parse::<f32>().map(f64::from))
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| err(j + 1, e.to_string()))?;
                if values.len() != dim {
                    return Err(err(
                        j + 1,
                        format!("expected {dim} values, found {}", values.len()),
                    ));
                }
                data.extend(values);
            }
            let table = EmbeddingTable::new(words, dim, data)?;
            match name {
                "words" => out.words = Some(table),
                "pos" => out.pos = Some(table),
                other => return Err(err(i + 1, format!("unknown table `{other}`"))),
            }
        }
        Ok(out)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PretrainConfig {
    pub word_dim: usize,
    pub pos_dim: usize,
    pub epochs: usize,
    pub seed: u64,
    pub batch_size: usize,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        Self {
            word_dim: 150,
            pos_dim: 5,
            epochs: 5,
            seed: 0,
            batch_size: 20,
        }
    }
}

/// A one-layer LSTM language model run over reversed sequences: at each step
/// it predicts the token that precedes the current one in the original text.
struct BackwardLm {
    params: Params,
    emb: usize,
    lstm: LstmLayout,
    out_w: usize,
    out_b: usize,
    vocab: usize,
    dim: usize,
}

impl BackwardLm {
    /// `vocab` includes one extra id (the last) marking sentence boundaries.
    fn new(vocab: usize, dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut params = Params::new();
        let emb = params.add("emb", vocab, dim);
        let wx = params.add("wx", dim, 4 * dim);
        let wh = params.add("wh", dim, 4 * dim);
        let b = params.add("b", 1, 4 * dim);
        let out_w = params.add("out.w", dim, vocab);
        let out_b = params.add("out.b", 1, vocab);
        params.fill_uniform("emb", glorot(vocab, dim), rng);
        params.fill_uniform("wx", glorot(dim, dim), rng);
        params.fill_uniform("wh", glorot(dim, dim), rng);
        params.fill_uniform("out.w", glorot(dim, vocab), rng);
        params.values[b + dim..b + 2 * dim]
            .iter_mut()
            .for_each(|v| *v = 1.0);
        params.round();
        let lstm = LstmLayout {
            wx,
            wh,
            b,
            input: dim,
            hidden: dim,
        };
        Self {
            params,
            emb,
            lstm,
            out_w,
            out_b,
            vocab,
            dim,
        }
    }

    /// Cross-entropy summed over `seq` (already reversed, boundary-wrapped),
    /// accumulating its gradient scaled by `scale`.
    fn backprop(&self, seq: &[usize], scale: f64, grad: &mut [f64]) -> f64 {
        let p = &self.params.values;
        let (d, v) = (self.dim, self.vocab);
        let inputs = &seq[..seq.len() - 1];
        let targets = &seq[1..];
        let xs: Vec<Vec<f64>> = inputs
            .iter()
            .map(|&w| p[self.emb + w * d..self.emb + (w + 1) * d].to_vec())
            .collect();
        let trace = self.lstm.forward(p, &xs);
        let w_out = &p[self.out_w..self.out_w + d * v];
        let mut loss = 0.0;
        let mut dh = vec![vec![0.0; d]; xs.len()];
        for (t, &y) in targets.iter().enumerate() {
            let mut z = p[self.out_b..self.out_b + v].to_vec();
            vec_mat_acc(&trace.hidden[t], w_out, &mut z);
            softmax_in_place(&mut z);
            loss -= z[y].max(1e-300).ln();
            z[y] -= 1.0;
            z.iter_mut().for_each(|g| *g *= scale);
            outer_acc(
                &trace.hidden[t],
                &z,
                &mut grad[self.out_w..self.out_w + d * v],
            );
            for (g, dz) in grad[self.out_b..self.out_b + v].iter_mut().zip(&z) {
                *g += dz;
            }
            mat_vec_acc(w_out, &z, &mut dh[t]);
        }
        let dxs = self.lstm.backward(p, &xs, &trace, &dh, grad);
        for (&w, dx) in inputs.iter().zip(dxs) {
            for (g, x) in grad[self.emb + w * d..self.emb + (w + 1) * d]
                .iter_mut()
                .zip(dx)
            {
                *g += x;
            }
        }
        loss
    }

    fn train(
        &mut self,
        seqs: &[Vec<usize>],
        epochs: usize,
        batch_size: usize,
        rng: &mut ChaCha8Rng,
    ) {
        let mut opt = Adadelta::new(self.params.len(), 0.95, 1e-6);
        let mut order: Vec<usize> = (0..seqs.len()).collect();
        for _ in 0..epochs {
            order.shuffle(rng);
            for batch in order.chunks(batch_size.max(1)) {
                let tokens: usize = batch.iter().map(|&i| seqs[i].len() - 1).sum();
                let mut grad = vec![0.0; self.params.len()];
                for &i in batch {
                    self.backprop(&seqs[i], 1.0 / tokens as f64, &mut grad);
                }
                clip_to_norm(&mut grad, 5.0);
                opt.step(&mut self.params.values, &grad);
                self.params.round();
            }
        }
    }

    fn table(&self, vocab: &Vocab) -> Result<EmbeddingTable> {
        let d = self.dim;
        let words: Vec<String> = vocab.words().to_vec();
        let data = self.params.values[self.emb..self.emb + words.len() * d].to_vec();
        EmbeddingTable::new(words, d, data)
    }
}

fn sequences(streams: &[Vec<String>], vocab: &Vocab) -> Vec<Vec<usize>> {
    let boundary = vocab.size();
    streams
        .iter()
        .map(|s| {
            let mut seq = vec![boundary];
            seq.extend(s.iter().rev().map(|w| vocab.lookup(w)));
            seq.push(boundary);
            seq
        })
        .collect()
}

fn train_table(
    streams: &[Vec<String>],
    dim: usize,
    cfg: &PretrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<EmbeddingTable> {
    let vocab = Vocab::from_items(streams.iter().flatten(), 1);
    let seqs = sequences(streams, &vocab);
    let mut lm = BackwardLm::new(vocab.size() + 1, dim, rng);
    lm.train(&seqs, cfg.epochs, cfg.batch_size, rng);
    lm.table(&vocab)
}

/// Trains backward LSTM language models on the disfluency-removed word and
/// POS streams of `corpus` and returns their input embedding tables.
pub fn pretrain_backward_lm(corpus: &Corpus, cfg: &PretrainConfig) -> Result<Pretrained> {
    let cleaned: Vec<Vec<&crate::corpus::Token>> = corpus
        .sentences
        .iter()
        .map(|s| s.cleaned())
        .filter(|c| !c.is_empty())
        .collect();
    if cleaned.is_empty() {
        return Err(Error::Model(
            "nothing left to pretrain on after removing disfluencies".into(),
        ));
    }
    if cfg.word_dim == 0 || cfg.pos_dim == 0 {
        return Err(Error::Config(
            "embedding dimensions must be at least 1".into(),
        ));
    }
    let words: Vec<Vec<String>> = cleaned
        .iter()
        .map(|s| s.iter().map(|t| lexicon::fold(&t.surface)).collect())
        .collect();
    let tags: Vec<Vec<String>> = cleaned
        .iter()
        .map(|s| s.iter().map(|t| t.pos.clone()).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let words = train_table(&words, cfg.word_dim, cfg, &mut rng)?;
    let pos = train_table(&tags, cfg.pos_dim, cfg, &mut rng)?;
    Ok(Pretrained {
        words: Some(words),
        pos: Some(pos),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_annotated_line, Split};

    fn corpus(lines: &[&str]) -> Corpus {
        Corpus::new(
            lines
                .iter()
                .map(|l| parse_annotated_line(l).unwrap())
                .collect(),
            Split::Train,
        )
    }

    fn small() -> PretrainConfig {
        PretrainConfig {
            word_dim: 4,
            pos_dim: 3,
            epochs: 3,
            seed: 9,
            batch_size: 2,
        }
    }

    #[test]
    fn fully_disfluent_corpus_is_rejected() {
        let c = corpus(&["[ a + {uh} ]", "[ b c + {um} ]"]);
        assert!(pretrain_backward_lm(&c, &small()).is_err());
    }

    #[test]
    fn sees_only_cleaned_words() {
        let c = corpus(&["[ I just + I ] enjoy working"]);
        let pre = pretrain_backward_lm(&c, &small()).unwrap();
        let words = pre.words.unwrap();
        assert_eq!(&words.words[2..], ["i", "enjoy", "working"]);
        assert!(words.row("just").is_none());
        assert_eq!(words.dim, 4);
        assert_eq!(pre.pos.unwrap().dim, 3);
    }

    #[test]
    fn deterministic_and_text_round_trip() {
        let c = corpus(&["the dog/NN barked/VBD", "a [ cat + dog ] slept"]);
        let a = pretrain_backward_lm(&c, &small()).unwrap();
        assert_eq!(a, pretrain_backward_lm(&c, &small()).unwrap());
        let back = Pretrained::parse(&a.to_text(), "mem").unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn lm_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut lm = BackwardLm::new(5, 3, &mut rng);
        let seq = [4, 2, 3, 1, 4];
        let mut grad = vec![0.0; lm.params.len()];
        lm.backprop(&seq, 1.0, &mut grad);
        let h = 1e-5;
        for i in 0..lm.params.len() {
            let orig = lm.params.values[i];
            lm.params.values[i] = orig + h;
            let up = lm.backprop(&seq, 1.0, &mut vec![0.0; grad.len()]);
            lm.params.values[i] = orig - h;
            let down = lm.backprop(&seq, 1.0, &mut vec![0.0; grad.len()]);
            lm.params.values[i] = orig;
            let fd = (up - down) / (2.0 * h);
            assert!(
                (fd - grad[i]).abs() <= 1e-6 + 1e-4 * fd.abs(),
                "param {i}: {fd} vs {}",
                grad[i]
            );
        }
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = Pretrained::parse("# words 1 2\nx 0.5\n", "emb.txt").unwrap_err();
        assert_eq!(err.to_string(), "emb.txt:2: expected 2 values, found 1");
    }
}
