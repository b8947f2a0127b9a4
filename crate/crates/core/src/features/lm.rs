//! A small bigram language model used as the default source for the three
//! language-model features. Any model implementing [`LanguageModel`] can be
//! plugged in instead.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{lexicon, Corpus, Sentence};

pub const LM_BINS: usize = 10;

const BOS: &str = "<s>";
const EOS: &str = "</s>";

pub trait LanguageModel {
    /// Natural-log probability of `word` following `prev`.
    fn log_prob(&self, prev: &str, word: &str) -> f64;
}

/// Bigram model interpolated with an add-one unigram, trained on
/// disfluency-removed text. Unknown words get the unigram's unseen mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BigramModel {
    unigrams: BTreeMap<String, u64>,
    bigrams: BTreeMap<String, BTreeMap<String, u64>>,
    total: u64,
    alpha: f64,
}

impl BigramModel {
    pub fn train(corpus: &Corpus) -> Self {
        let mut unigrams = BTreeMap::new();
        let mut bigrams: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
        let mut total = 0;
        for s in &corpus.sentences {
            let mut prev = BOS.to_string();
            let words = s.cleaned().into_iter().map(|t| lexicon::fold(&t.surface));
            for w in words.chain(std::iter::once(EOS.to_string())) {
                *unigrams.entry(w.clone()).or_insert(0) += 1;
                *bigrams
                    .entry(prev)
                    .or_default()
                    .entry(w.clone())
                    .or_insert(0) += 1;
                total += 1;
                prev = w;
            }
        }
        Self {
            unigrams,
            bigrams,
            total,
            alpha: 1.0,
        }
    }

    fn unigram(&self, word: &str) -> f64 {
        let c = self.unigrams.get(word).copied().unwrap_or(0);
        (c as f64 + 1.0) / (self.total as f64 + self.unigrams.len() as f64 + 1.0)
    }
}

impl LanguageModel for BigramModel {
    fn log_prob(&self, prev: &str, word: &str) -> f64 {
        let uni = self.unigram(word);
        let (c, ctx) = match self.bigrams.get(prev) {
            Some(next) => (
                next.get(word).copied().unwrap_or(0),
                next.values().sum::<u64>(),
            ),
            None => (0, 0),
        };
        ((c as f64 + self.alpha * uni) / (ctx as f64 + self.alpha)).ln()
    }
}

/// Raw scores per token: the log-probability of the token in its original
/// context, the log-probability of the next word with the token skipped, and
/// the gain in log-probability from deleting the token.
pub fn lm_scores(s: &Sentence, lm: &dyn LanguageModel) -> Vec<[f64; 3]> {
    let words: Vec<String> = s.tokens.iter().map(|t| lexicon::fold(&t.surface)).collect();
    let at = |i: isize| -> &str {
        if i < 0 {
            BOS
        } else if i as usize >= words.len() {
            EOS
        } else {
            &words[i as usize]
        }
    };
    (0..words.len() as isize)
        .map(|t| {
            let orig = lm.log_prob(at(t - 1), at(t));
            let skip = lm.log_prob(at(t - 1), at(t + 1));
            let through = lm.log_prob(at(t), at(t + 1));
            [orig, skip, skip - (orig + through)]
        })
        .collect()
}

/// Equal-frequency bin edges for each of the three scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmBins {
    edges: [Vec<f64>; 3],
}

impl LmBins {
    pub fn fit(corpus: &Corpus, lm: &dyn LanguageModel) -> Self {
        let mut columns: [Vec<f64>; 3] = Default::default();
        for s in &corpus.sentences {
            for row in lm_scores(s, lm) {
                for (col, v) in columns.iter_mut().zip(row) {
                    col.push(v);
                }
            }
        }
        let edges = columns.map(|mut col| {
            col.sort_by(f64::total_cmp);
            if col.is_empty() {
                return Vec::new();
            }
            (1..LM_BINS)
                .map(|i| col[(i * col.len() / LM_BINS).min(col.len() - 1)])
                .collect()
        });
        Self { edges }
    }

    pub fn bin(&self, feature: usize, score: f64) -> u32 {
        self.edges[feature].iter().filter(|&&e| e < score).count() as u32
    }
}

/// Quantized language-model features for every token of `s`.
pub fn compute_lm_features(s: &Sentence, lm: &dyn LanguageModel, bins: &LmBins) -> Vec<[u32; 3]> {
    lm_scores(s, lm)
        .into_iter()
        .map(|row| [0, 1, 2].map(|k| bins.bin(k, row[k])))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_annotated_line, Split};

    struct Uniform;

    impl LanguageModel for Uniform {
        fn log_prob(&self, _: &str, _: &str) -> f64 {
            -(50f64).ln()
        }
    }

    fn corpus(lines: &[&str]) -> Corpus {
        Corpus::new(
            lines
                .iter()
                .map(|l| parse_annotated_line(l).unwrap())
                .collect(),
            Split::Train,
        )
    }

    #[test]
    fn uniform_model_uses_one_bin() {
        let c = corpus(&["a b c d", "e f a b"]);
        let bins = LmBins::fit(&c, &Uniform);
        let feats: Vec<_> = c
            .sentences
            .iter()
            .flat_map(|s| compute_lm_features(s, &Uniform, &bins))
            .collect();
        assert!(feats.iter().all(|f| *f == feats[0]));
    }

    #[test]
    fn unknown_words_fall_back() {
        let c = corpus(&["[ the + the ] dog barked", "a dog barked"]);
        let lm = BigramModel::train(&c);
        let p = lm.log_prob("zebra", "quagga");
        assert!(p.is_finite() && p < lm.log_prob("dog", "barked"));
        let bins = LmBins::fit(&c, &lm);
        let s = parse_annotated_line("quagga zebra").unwrap();
        let f = compute_lm_features(&s, &lm, &bins);
        assert!(f.iter().flatten().all(|&b| (b as usize) < LM_BINS));
    }

    #[test]
    fn trained_on_cleaned_text() {
        let lm = BigramModel::train(&corpus(&["[ I just + I ] enjoy working"]));
        assert!(lm.log_prob("i", "enjoy") > lm.log_prob("i", "just"));
        assert!(!lm.unigrams.contains_key("just"));
    }

    #[test]
    fn bins_are_deterministic() {
        let c = corpus(&["a b c d e f g", "a b a b c", "x y z"]);
        let lm = BigramModel::train(&c);
        assert_eq!(LmBins::fit(&c, &lm), LmBins::fit(&c, &lm));
    }
}
