//! Disfluency detection for speech transcripts.
//!
//! The crate covers the whole pipeline: parsing bracket-annotated
//! transcripts, deriving per-token state labels under several label schemes,
//! pattern-match feature extraction, a from-scratch (bidirectional) LSTM
//! tagger trained with Adadelta, legality-constrained decoding (dynamic
//! programming and an exact integer-program solver) and edit/correction
//! scoring.
//!
//! ```
//! use disfl_core::corpus::parse_annotated_line;
//! use disfl_core::{derive_labels, LabelScheme};
//!
//! let s = parse_annotated_line("[ I just + I ] enjoy working").unwrap();
//! let eight = LabelScheme::eight();
//! let labels = derive_labels(&s, &eight).unwrap();
//! assert_eq!(eight.names(&labels), ["BE", "IP", "C", "O", "O"]);
//! ```

pub mod corpus;
pub mod decode;
pub mod error;
pub mod eval;
pub mod features;
pub mod model;

pub use corpus::{
    collapse_labels, derive_labels, Corpus, DisfluencySpan, EditKind, FiveState, LabelScheme,
    Sentence, SpanKind, Split, StateDef, Token,
};
pub use decode::{DecodeMethod, LegalityMatrix, Posteriors};
pub use error::{Error, Result};
pub use eval::{EvalReport, Prf};
pub use features::{FeatureSchema, FeatureVector, Vocab};
pub use model::{Checkpoint, Direction, Model, ModelConfig, TrainConfig};
