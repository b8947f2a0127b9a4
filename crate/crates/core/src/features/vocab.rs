use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{lexicon, Corpus};

pub const PAD: usize = 0;
pub const UNK: usize = 1;

/// String-to-index map with reserved `PAD` and `UNK` slots. Entries are
/// numbered in order of first occurrence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabRepr", into = "VocabRepr")]
pub struct Vocab {
    words: Vec<String>,
    index: HashMap<String, usize>,
    min_count: usize,
}

#[derive(Serialize, Deserialize)]
struct VocabRepr {
    min_count: usize,
    words: Vec<String>,
}

impl From<VocabRepr> for Vocab {
    fn from(r: VocabRepr) -> Self {
        let index = r
            .words
            .iter()
            .enumerate()
            .skip(2)
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Self {
            words: r.words,
            index,
            min_count: r.min_count,
        }
    }
}

impl From<Vocab> for VocabRepr {
    fn from(v: Vocab) -> Self {
        Self {
            min_count: v.min_count,
            words: v.words,
        }
    }
}

impl Vocab {
    pub fn from_items<I, S>(items: I, min_count: usize) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut counts: HashMap<String, usize> = HashMap::new();
        let mut order = Vec::new();
        for item in items {
            let item = item.as_ref();
            let c = counts.entry(item.to_string()).or_insert_with(|| {
                order.push(item.to_string());
                0
            });
            *c += 1;
        }
        let mut words = vec!["<pad>".to_string(), "<unk>".to_string()];
        words.extend(order.into_iter().filter(|w| counts[w] >= min_count));
        VocabRepr { min_count, words }.into()
    }

    pub fn lookup(&self, item: &str) -> usize {
        self.index.get(item).copied().unwrap_or(UNK)
    }

    pub fn contains(&self, item: &str) -> bool {
        self.index.contains_key(item)
    }

    pub fn size(&self) -> usize {
        self.words.len()
    }

    pub fn min_count(&self) -> usize {
        self.min_count
    }

    pub fn word(&self, index: usize) -> &str {
        &self.words[index]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}

/// Case-folded word vocabulary over a (training) corpus.
pub fn build_vocab(corpus: &Corpus, min_count: usize) -> Vocab {
    Vocab::from_items(
        corpus
            .sentences
            .iter()
            .flat_map(|s| s.tokens.iter().map(|t| lexicon::fold(&t.surface))),
        min_count,
    )
}

/// POS-tag vocabulary; every observed tag is kept.
pub fn build_pos_vocab(corpus: &Corpus) -> Vocab {
    Vocab::from_items(
        corpus
            .sentences
            .iter()
            .flat_map(|s| s.tokens.iter().map(|t| t.pos.as_str())),
        1,
    )
}
