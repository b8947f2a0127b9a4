//! Per-token categorical features for embedding lookup.

mod extract;
mod lm;
mod vocab;

pub use extract::{
    extract_features, FeatureSchema, FeatureVector, Featurizer, LmFeatures, FEATURE_NAMES,
};
pub use lm::{compute_lm_features, BigramModel, LanguageModel, LmBins, LM_BINS};
pub use vocab::{build_pos_vocab, build_vocab, Vocab, PAD, UNK};
