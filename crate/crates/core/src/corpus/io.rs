//! `.dis` and `.tsv` corpus files.
//!
//! `.tsv` holds one token per line, `index<TAB>surface<TAB>pos<TAB>label`,
//! with a blank line between sentences. A sentence may be preceded by a
//! `# id = ...` comment line.

use std::fmt::Write as _;
use std::path::Path;

use super::annotation::{parse_annotated_line, render};
use super::sentence::{Corpus, Sentence, Split};
use crate::error::{Error, Result};

/// Parses `.dis` text. Blank lines and `#` comments are skipped; sentences
/// without an id field get `<source>:<line>`.
pub fn parse_dis(text: &str, source: &str, split: Split) -> Result<Corpus> {
    let mut sentences = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let mut s = parse_annotated_line(line).map_err(|e| Error::Format {
            path: source.to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        if s.id.is_empty() {
            s.id = format!("{source}:{}", i + 1);
        }
        sentences.push(s);
    }
    let corpus = Corpus::new(sentences, split);
    if let Some(id) = corpus.duplicate_id() {
        return Err(Error::Format {
            path: source.to_string(),
            line: 0,
            message: format!("duplicate sentence id `{id}`"),
        });
    }
    Ok(corpus)
}

pub fn read_dis(path: &Path, split: Split) -> Result<Corpus> {
    let text = std::fs::read_to_string(path)?;
    parse_dis(&text, &path.display().to_string(), split)
}

pub fn render_dis(corpus: &Corpus) -> String {
    let mut out = String::new();
    for s in &corpus.sentences {
        let _ = writeln!(out, "{}\t{}", s.id, render(s));
    }
    out
}

pub fn write_dis(path: &Path, corpus: &Corpus) -> Result<()> {
    std::fs::write(path, render_dis(corpus))?;
    Ok(())
}

/// One sentence of a `.tsv` file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSentence {
    pub id: String,
    pub words: Vec<(String, String)>,
    pub labels: Vec<String>,
}

impl TaggedSentence {
    pub fn from_sentence<S: Into<String>>(
        s: &Sentence,
        labels: impl IntoIterator<Item = S>,
    ) -> Self {
        Self {
            id: s.id.clone(),
            words: s
                .tokens
                .iter()
                .map(|t| (t.surface.clone(), t.pos.clone()))
                .collect(),
            labels: labels.into_iter().map(Into::into).collect(),
        }
    }
}

pub fn render_tsv(sentences: &[TaggedSentence]) -> String {
    let mut out = String::new();
    for s in sentences {
        if !s.id.is_empty() {
            let _ = writeln!(out, "# id = {}", s.id);
        }
        for (i, ((w, p), l)) in s.words.iter().zip(&s.labels).enumerate() {
            let _ = writeln!(out, "{i}\t{w}\t{p}\t{l}");
        }
        out.push('\n');
    }
    out
}

pub fn parse_tsv(text: &str, source: &str) -> Result<Vec<TaggedSentence>> {
    let mut out = Vec::new();
    let mut cur = TaggedSentence {
        id: String::new(),
        words: Vec::new(),
        labels: Vec::new(),
    };
    let fail = |line: usize, message: String| Error::Format {
        path: source.to_string(),
        line,
        message,
    };
    let flush = |cur: &mut TaggedSentence, out: &mut Vec<TaggedSentence>| {
        if !cur.words.is_empty() {
            let mut s = std::mem::replace(
                cur,
                TaggedSentence {
                    id: String::new(),
                    words: Vec::new(),
                    labels: Vec::new(),
                },
            );
            if s.id.is_empty() {
                s.id = format!("{source}#{}", out.len() + 1);
            }
            out.push(s);
        }
    };
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            flush(&mut cur, &mut out);
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(id) = comment.trim().strip_prefix("id =") {
                if !cur.words.is_empty() {
                    return Err(fail(line_no, "id comment inside a sentence".into()));
                }
                cur.id = id.trim().to_string();
            }
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [index, surface, pos, label] = fields.as_slice() else {
            return Err(fail(
                line_no,
                format!("expected 4 tab-separated fields, got {}", fields.len()),
            ));
        };
        let index: usize = index
            .parse()
            .map_err(|_| fail(line_no, format!("bad token index `{index}`")))?;
        if index != cur.words.len() {
            return Err(fail(
                line_no,
                format!("expected token index {}, got {index}", cur.words.len()),
            ));
        }
        if surface.is_empty() {
            return Err(fail(line_no, "empty surface".into()));
        }
        cur.words.push((surface.to_string(), pos.to_string()));
        cur.labels.push(label.to_string());
    }
    flush(&mut cur, &mut out);
    Ok(out)
}

pub fn read_tsv(path: &Path) -> Result<Vec<TaggedSentence>> {
    let text = std::fs::read_to_string(path)?;
    parse_tsv(&text, &path.display().to_string())
}
