//! Annotated sentences, label schemes and corpus files.

mod annotation;
pub mod io;
mod labels;
pub mod lexicon;
mod scheme;
mod sentence;
pub mod synth;

pub use annotation::{parse_annotated_line, render, ParseError};
pub use labels::{collapse_labels, derive_labels, gold_correction_words};
pub use scheme::{FiveState, LabelScheme, SchemeError, StateDef};
pub use sentence::{
    sort_spans, AnnotationError, Corpus, DisfluencySpan, EditKind, Sentence, SpanKind, Split,
    Token, NO_POS,
};
pub use synth::{generate_synthetic, SynthConfig, SynthError};
