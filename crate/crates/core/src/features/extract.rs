use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::lm::{compute_lm_features, BigramModel, LmBins, LM_BINS};
use super::vocab::Vocab;
use crate::corpus::{lexicon, Sentence};
use crate::error::{Error, Result};

/// Short names of the twenty per-token features, indexed by `id - 1`.
pub const FEATURE_NAMES: [&str; 20] = [
    "word",
    "pos",
    "filled_pause",
    "discourse_marker",
    "edit_term",
    "incomplete",
    "word_dist_follow",
    "bigram_dist_follow",
    "word_dist_precede",
    "bigram_dist_precede",
    "pos_bigram_follow",
    "pos_bigram_precede",
    "word_pos_follow",
    "pos_word_follow",
    "gapped_bigram",
    "pos_trigram",
    "conj_dist",
    "lm_orig",
    "lm_skip",
    "lm_gain",
];

/// Which features to compute and the windows used by the pattern features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub enabled: BTreeSet<u8>,
    pub window_follow: usize,
    pub window_precede: usize,
    /// Span `N` searched by the gapped-bigram and POS-trigram features.
    pub pattern_window: usize,
    pub gap_max: usize,
    pub conjunctions: Vec<String>,
    pub edit_terms: Vec<Vec<String>>,
}

impl Default for FeatureSchema {
    fn default() -> Self {
        Self {
            enabled: (1..=17).collect(),
            window_follow: 8,
            window_precede: 8,
            pattern_window: 8,
            gap_max: 3,
            conjunctions: lexicon::CONJUNCTIONS
                .iter()
                .map(|w| w.to_string())
                .collect(),
            edit_terms: lexicon::phrase_list(lexicon::EDIT_TERMS),
        }
    }
}

impl FeatureSchema {
    pub fn validate(&self) -> Result<()> {
        if self.window_follow == 0 || self.window_precede == 0 || self.pattern_window == 0 {
            return Err(Error::Config("feature windows must be at least 1".into()));
        }
        if let Some(bad) = self.enabled.iter().find(|&&id| !(1..=20).contains(&id)) {
            return Err(Error::Config(format!("unknown feature id {bad}")));
        }
        if !self.enabled.contains(&1) {
            return Err(Error::Config("feature 1 (word) must be enabled".into()));
        }
        Ok(())
    }

    pub fn uses_lm(&self) -> bool {
        self.enabled.iter().any(|&id| id >= 18)
    }

    /// Largest distance a distance-valued feature can report.
    pub fn distance_cap(&self, id: u8) -> usize {
        match id {
            9 | 10 => self.window_precede,
            _ => self.window_follow,
        }
    }

    /// Locality radius: a token's features depend only on tokens this close.
    pub fn radius(&self) -> usize {
        self.window_follow
            .max(self.window_precede)
            .max(self.pattern_window)
    }
}

/// Per-token categorical feature values, one column per enabled feature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureVector {
    pub ids: Vec<u8>,
    values: Vec<u32>,
}

impl FeatureVector {
    fn zeros(ids: Vec<u8>, len: usize) -> Self {
        let values = vec![0; ids.len() * len];
        Self { ids, values }
    }

    pub fn len(&self) -> usize {
        if self.ids.is_empty() {
            0
        } else {
            self.values.len() / self.ids.len()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row(&self, t: usize) -> &[u32] {
        let f = self.ids.len();
        &self.values[t * f..(t + 1) * f]
    }

    pub fn get(&self, t: usize, id: u8) -> Option<u32> {
        let col = self.ids.iter().position(|&i| i == id)?;
        Some(self.row(t)[col])
    }

    fn set(&mut self, t: usize, col: usize, v: u32) {
        let f = self.ids.len();
        self.values[t * f + col] = v;
    }

    /// A copy with the token order reversed.
    pub fn reversed(&self) -> Self {
        let mut out = self.clone();
        let n = self.len();
        for t in 0..n {
            let f = self.ids.len();
            out.values[t * f..(t + 1) * f].copy_from_slice(self.row(n - 1 - t));
        }
        out
    }
}

struct Words<'a> {
    words: Vec<String>,
    pos: Vec<&'a str>,
}

impl Words<'_> {
    fn pair_at(&self, u: usize) -> (&str, &str) {
        (&self.words[u], &self.words[u + 1])
    }
}

/// Computes features 1–17. Columns for 18–20, if enabled, are left at zero;
/// [`Featurizer::extract`] fills them from its language model.
pub fn extract_features(
    s: &Sentence,
    schema: &FeatureSchema,
    words: &Vocab,
    pos: &Vocab,
) -> FeatureVector {
    let ids: Vec<u8> = schema.enabled.iter().copied().collect();
    let n = s.len();
    let mut fv = FeatureVector::zeros(ids.clone(), n);
    let w = Words {
        words: s.tokens.iter().map(|t| lexicon::fold(&t.surface)).collect(),
        pos: s.tokens.iter().map(|t| t.pos.as_str()).collect(),
    };
    let edit_terms = lexicon::mark_phrases(&w.words, &schema.edit_terms);
    let mut occurrences: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, word) in w.words.iter().enumerate() {
        occurrences.entry(word.as_str()).or_default().push(i);
    }
    let wf = schema.window_follow;
    let wp = schema.window_precede;

    for t in 0..n {
        for (col, &id) in ids.iter().enumerate() {
            let v = match id {
                1 => words.lookup(&w.words[t]) as u32,
                2 => pos.lookup(w.pos[t]) as u32,
                3 => s.tokens[t].is_filled_pause as u32,
                4 => s.tokens[t].is_discourse_marker as u32,
                5 => edit_terms[t] as u32,
                6 => s.tokens[t].is_incomplete as u32,
                7 => {
                    let occ = &occurrences[w.words[t].as_str()];
                    let next = occ.partition_point(|&u| u <= t);
                    occ.get(next).map_or(0, |&u| distance(u - t, wf))
                }
                9 => {
                    let occ = &occurrences[w.words[t].as_str()];
                    let prev = occ.partition_point(|&u| u < t);
                    if prev == 0 {
                        0
                    } else {
                        distance(t - occ[prev - 1], wp)
                    }
                }
                8 if t + 1 < n => {
                    let key = w.pair_at(t);
                    (1..wf)
                        .take_while(|d| t + d + 1 < n)
                        .find(|d| w.pair_at(t + d) == key)
                        .unwrap_or(0) as u32
                }
                10 if t + 1 < n => {
                    let key = w.pair_at(t);
                    (1..=wp.min(t))
                        .find(|d| w.pair_at(t - d) == key)
                        .unwrap_or(0) as u32
                }
                11 if t + 1 < n => {
                    let key = (w.pos[t], w.pos[t + 1]);
                    (t + 1..(t + wf).min(n - 1)).any(|u| (w.pos[u], w.pos[u + 1]) == key) as u32
                }
                12 if t + 1 < n => {
                    let key = (w.pos[t], w.pos[t + 1]);
                    (t.saturating_sub(wp)..t).any(|u| (w.pos[u], w.pos[u + 1]) == key) as u32
                }
                13 if t + 1 < n => {
                    let key = (w.words[t].as_str(), w.pos[t + 1]);
                    (t + 1..(t + wf).min(n - 1)).any(|u| (w.words[u].as_str(), w.pos[u + 1]) == key)
                        as u32
                }
                14 if t + 1 < n => {
                    let key = (w.pos[t], w.words[t + 1].as_str());
                    (t + 1..(t + wf).min(n - 1)).any(|u| (w.pos[u], w.words[u + 1].as_str()) == key)
                        as u32
                }
                15 if t + 1 < n => {
                    gapped_bigram(&w.words, t, schema.pattern_window, schema.gap_max) as u32
                }
                16 if t + 2 < n => {
                    let key = &w.pos[t..t + 3];
                    let last = (t + schema.pattern_window).min(n - 1);
                    (t + 1..last.saturating_sub(1)).any(|u| &w.pos[u..u + 3] == key) as u32
                }
                17 => (1..=wf)
                    .take_while(|d| t + d < n)
                    .find(|d| schema.conjunctions.iter().any(|c| *c == w.words[t + d]))
                    .unwrap_or(0) as u32,
                _ => 0,
            };
            fv.set(t, col, v);
        }
    }
    fv
}

fn distance(d: usize, cap: usize) -> u32 {
    if d <= cap {
        d as u32
    } else {
        0
    }
}

/// Does `(w_t, w_{t+1})` recur as `(w_u, w_v)` with `t < u < v ≤ t+N` and at
/// most `gap_max` words between `u` and `v`?
fn gapped_bigram(words: &[String], t: usize, span: usize, gap_max: usize) -> bool {
    let last = (t + span).min(words.len() - 1);
    (t + 1..last).any(|u| {
        words[u] == words[t]
            && (u + 1..=last.min(u + 1 + gap_max)).any(|v| words[v] == words[t + 1])
    })
}

/// Language model and bin edges backing features 18–20.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmFeatures {
    pub model: BigramModel,
    pub bins: LmBins,
}

/// Everything needed to turn a sentence into model input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Featurizer {
    pub schema: FeatureSchema,
    pub words: Vocab,
    pub pos: Vocab,
    pub lm: Option<LmFeatures>,
}

impl Featurizer {
    pub fn new(
        schema: FeatureSchema,
        words: Vocab,
        pos: Vocab,
        lm: Option<LmFeatures>,
    ) -> Result<Self> {
        schema.validate()?;
        if schema.uses_lm() && lm.is_none() {
            return Err(Error::Config("features 18-20 need a language model".into()));
        }
        Ok(Self {
            schema,
            words,
            pos,
            lm,
        })
    }

    pub fn ids(&self) -> Vec<u8> {
        self.schema.enabled.iter().copied().collect()
    }

    /// Number of distinct values feature `id` can take.
    pub fn cardinality(&self, id: u8) -> usize {
        match id {
            1 => self.words.size(),
            2 => self.pos.size(),
            7..=10 | 17 => self.schema.distance_cap(id) + 1,
            18..=20 => LM_BINS,
            _ => 2,
        }
    }

    /// Offset added to a value to get its embedding row; row 0 is always padding.
    pub fn row_offset(id: u8) -> usize {
        match id {
            1 | 2 => 0,
            _ => 1,
        }
    }

    pub fn table_rows(&self, id: u8) -> usize {
        self.cardinality(id) + Self::row_offset(id)
    }

    pub fn extract(&self, s: &Sentence) -> FeatureVector {
        let mut fv = extract_features(s, &self.schema, &self.words, &self.pos);
        if let Some(lm) = &self.lm {
            let scores = compute_lm_features(s, &lm.model, &lm.bins);
            for (col, &id) in fv.ids.clone().iter().enumerate() {
                if id >= 18 {
                    for (t, row) in scores.iter().enumerate() {
                        fv.set(t, col, row[(id - 18) as usize]);
                    }
                }
            }
        }
        fv
    }

    /// Tab-separated dump: a header of feature ids, then one row per token.
    pub fn dump(&self, s: &Sentence) -> String {
        let fv = self.extract(s);
        let mut out = String::from("#");
        for id in &fv.ids {
            out.push_str(&format!("\t{id}"));
        }
        out.push('\n');
        for t in 0..fv.len() {
            out.push_str(&s.tokens[t].surface);
            for v in fv.row(t) {
                out.push_str(&format!("\t{v}"));
            }
            out.push('\n');
        }
        out
    }
}
