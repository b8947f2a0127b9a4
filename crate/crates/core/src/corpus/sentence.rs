use std::collections::HashSet;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::lexicon;

/// POS placeholder used when an annotation omits tags.
pub const NO_POS: &str = "_";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub position: usize,
    pub surface: String,
    pub pos: String,
    pub is_filled_pause: bool,
    pub is_discourse_marker: bool,
    /// Word fragment such as `th-`.
    pub is_incomplete: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpanKind {
    Repetition,
    Correction,
    Restart,
}

impl SpanKind {
    pub fn edit_kind(self) -> EditKind {
        match self {
            SpanKind::Repetition => EditKind::Repetition,
            SpanKind::Correction | SpanKind::Restart => EditKind::Other,
        }
    }
}

/// Coarse disfluency type carried by typed label states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EditKind {
    Repetition,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisfluencySpan {
    pub reparandum: Range<usize>,
    pub interregnum: Range<usize>,
    pub repair: Range<usize>,
    pub kind: SpanKind,
    /// Opened with `[S`. Usually implies `kind == Repetition`, except for an
    /// `[S` segment whose repair is empty.
    pub marked: bool,
    /// This span continues a flattened `[S a + b + c ]` chain: its reparandum
    /// is the repair of the preceding segment.
    pub chained: bool,
}

impl DisfluencySpan {
    /// Builds a span and classifies it: empty repair is a restart, an `S`
    /// marker makes a repetition, anything else is a correction.
    pub fn new(
        reparandum: Range<usize>,
        interregnum: Range<usize>,
        repair: Range<usize>,
        marked: bool,
    ) -> Self {
        let kind = if repair.is_empty() {
            SpanKind::Restart
        } else if marked {
            SpanKind::Repetition
        } else {
            SpanKind::Correction
        };
        Self {
            reparandum,
            interregnum,
            repair,
            kind,
            marked,
            chained: false,
        }
    }

    /// First token index after the whole span.
    pub fn end(&self) -> usize {
        if !self.repair.is_empty() {
            self.repair.end
        } else if !self.interregnum.is_empty() {
            self.interregnum.end
        } else {
            self.reparandum.end
        }
    }

    pub fn validate(&self, len: usize) -> Result<(), AnnotationError> {
        let err = |msg: &str| Err(AnnotationError::InvalidSpan(format!("{self:?}: {msg}")));
        if self.reparandum.is_empty() {
            return err("empty reparandum");
        }
        if self.reparandum.end != self.interregnum.start {
            return err("interregnum must start at the interruption point");
        }
        if self.interregnum.end != self.repair.start {
            return err("repair must follow the interregnum");
        }
        if self.interregnum.start > self.interregnum.end || self.repair.start > self.repair.end {
            return err("inverted range");
        }
        if self.repair.end > len {
            return err("span exceeds sentence");
        }
        if (self.kind == SpanKind::Restart) != self.repair.is_empty() {
            return err("restart iff repair is empty");
        }
        if self.kind == SpanKind::Repetition && !self.marked {
            return err("repetition spans must carry the S marker");
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnnotationError {
    #[error("invalid span {0}")]
    InvalidSpan(String),
    #[error("reparanda {0:?} and {1:?} partially overlap")]
    PartialOverlap(Range<usize>, Range<usize>),
    #[error("empty token surface at position {0}")]
    EmptyToken(usize),
    #[error("scheme `{scheme}` has no state for {role}")]
    Unexpressible { scheme: String, role: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub id: String,
    pub tokens: Vec<Token>,
    pub spans: Vec<DisfluencySpan>,
}

impl Sentence {
    /// Builds a sentence from `(surface, pos)` pairs, computing token flags
    /// from the closed-class lexicons and validating spans.
    pub fn new(
        id: impl Into<String>,
        words: Vec<(String, String)>,
        mut spans: Vec<DisfluencySpan>,
    ) -> Result<Self, AnnotationError> {
        let folded: Vec<String> = words.iter().map(|(w, _)| lexicon::fold(w)).collect();
        let discourse =
            lexicon::mark_phrases(&folded, &lexicon::phrase_list(lexicon::DISCOURSE_MARKERS));
        let mut tokens = Vec::with_capacity(words.len());
        for (position, (surface, pos)) in words.into_iter().enumerate() {
            if surface.is_empty() {
                return Err(AnnotationError::EmptyToken(position));
            }
            tokens.push(Token {
                position,
                is_filled_pause: lexicon::is_filled_pause(&surface),
                is_discourse_marker: discourse[position],
                is_incomplete: surface.ends_with('-'),
                pos: if pos.is_empty() {
                    NO_POS.to_string()
                } else {
                    pos
                },
                surface,
            });
        }
        sort_spans(&mut spans);
        let s = Self {
            id: id.into(),
            tokens,
            spans,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.surface.as_str())
    }

    pub fn validate(&self) -> Result<(), AnnotationError> {
        for span in &self.spans {
            span.validate(self.len())?;
        }
        for (i, a) in self.spans.iter().enumerate() {
            for b in &self.spans[i + 1..] {
                let (a, b) = (&a.reparandum, &b.reparandum);
                let overlap = a.start < b.end && b.start < a.end;
                let nested = (a.start <= b.start && b.end <= a.end)
                    || (b.start <= a.start && a.end <= b.end);
                if overlap && !nested {
                    return Err(AnnotationError::PartialOverlap(a.clone(), b.clone()));
                }
            }
        }
        Ok(())
    }

    /// Token indices inside any reparandum.
    pub fn edit_words(&self) -> HashSet<usize> {
        self.spans
            .iter()
            .flat_map(|s| s.reparandum.clone())
            .collect()
    }

    /// The smallest reparandum containing `index`, if any.
    pub fn innermost_reparandum(&self, index: usize) -> Option<&DisfluencySpan> {
        self.spans
            .iter()
            .filter(|s| s.reparandum.contains(&index))
            .min_by_key(|s| (s.reparandum.len(), s.reparandum.start))
    }

    /// Words left after deleting every reparandum and interregnum.
    pub fn cleaned(&self) -> Vec<&Token> {
        let mut removed = vec![false; self.len()];
        for span in &self.spans {
            for i in span.reparandum.start..span.interregnum.end {
                removed[i] = true;
            }
        }
        self.tokens
            .iter()
            .zip(removed)
            .filter(|(_, r)| !r)
            .map(|(t, _)| t)
            .collect()
    }
}

/// Canonical span order: by reparandum start, outer spans first.
pub fn sort_spans(spans: &mut [DisfluencySpan]) {
    spans.sort_by(|a, b| {
        a.reparandum
            .start
            .cmp(&b.reparandum.start)
            .then(b.end().cmp(&a.end()))
            .then(b.reparandum.end.cmp(&a.reparandum.end))
    });
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Split {
    Train,
    Dev,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
    pub split: Split,
}

impl Corpus {
    pub fn new(sentences: Vec<Sentence>, split: Split) -> Self {
        Self { sentences, split }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Returns the first id that occurs twice, if any.
    pub fn duplicate_id(&self) -> Option<&str> {
        let mut seen = HashSet::new();
        self.sentences
            .iter()
            .map(|s| s.id.as_str())
            .find(|id| !seen.insert(*id))
    }

    /// Keeps sentences with at most `max_words` tokens, preserving order.
    pub fn filter_by_length(&self, max_words: usize) -> Corpus {
        assert!(max_words >= 1, "max_words must be at least 1");
        Corpus {
            sentences: self
                .sentences
                .iter()
                .filter(|s| s.len() <= max_words)
                .cloned()
                .collect(),
            split: self.split,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(ws: &[&str]) -> Vec<(String, String)> {
        ws.iter().map(|w| (w.to_string(), String::new())).collect()
    }

    #[test]
    fn token_flags() {
        let s = Sentence::new("x", words(&["uh", "you", "know", "th-", "the"]), vec![]).unwrap();
        assert!(s.tokens[0].is_filled_pause);
        assert!(s.tokens[1].is_discourse_marker && s.tokens[2].is_discourse_marker);
        assert!(s.tokens[3].is_incomplete);
        assert!(!s.tokens[4].is_incomplete);
        assert_eq!(s.tokens[4].pos, NO_POS);
    }

    #[test]
    fn partial_overlap_is_rejected() {
        let a = DisfluencySpan::new(0..2, 2..2, 2..3, false);
        let b = DisfluencySpan::new(1..3, 3..3, 3..4, false);
        let err = Sentence::new("x", words(&["a", "b", "c", "d"]), vec![a, b]).unwrap_err();
        assert!(matches!(err, AnnotationError::PartialOverlap(..)));
    }

    #[test]
    fn filter_by_length_drops_long_sentences() {
        let long = Sentence::new("long", words(&vec!["w"; 51]), vec![]).unwrap();
        let short = Sentence::new("short", words(&vec!["w"; 50]), vec![]).unwrap();
        let c = Corpus::new(vec![long, short.clone()], Split::Train);
        assert_eq!(c.filter_by_length(50).sentences, vec![short]);
        let empty = Corpus::new(vec![], Split::Train);
        assert!(empty.filter_by_length(50).is_empty());
        assert_eq!(c.filter_by_length(60), c);
    }

    #[test]
    fn cleaned_text_drops_reparandum_and_interregnum() {
        let span = DisfluencySpan::new(0..2, 2..3, 3..4, false);
        let s = Sentence::new("x", words(&["I", "just", "uh", "I", "enjoy"]), vec![span]).unwrap();
        let kept: Vec<_> = s.cleaned().iter().map(|t| t.surface.as_str()).collect();
        assert_eq!(kept, ["I", "enjoy"]);
    }
}
