//! Word-level scoring: edit detection, correction detection and a
//! repetition-versus-other breakdown.
//!
//! All scores are micro-averaged over every token of every sentence. When a
//! system predicts nothing, precision is reported as 0 and the result is
//! flagged [`Prf::degenerate`].

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::corpus::{gold_correction_words, Corpus, EditKind, LabelScheme, Sentence};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Counts {
    pub fn between(pred: &BTreeSet<usize>, gold: &BTreeSet<usize>) -> Self {
        let tp = pred.intersection(gold).count();
        Self {
            tp,
            fp: pred.len() - tp,
            fn_: gold.len() - tp,
        }
    }

    pub fn add(&mut self, other: Counts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }

    pub fn prf(self) -> Prf {
        Prf::from_counts(self.tp, self.fp, self.fn_)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    /// Nothing was predicted, so precision is undefined and reported as 0.
    pub degenerate: bool,
}

impl Prf {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            precision,
            recall,
            f1,
            tp,
            fp,
            fn_,
            degenerate: tp + fp == 0,
        }
    }
}

/// Tokens whose label is an edit state, i.e. whose five-state image is not `O`.
pub fn edit_word_set(labels: &[usize], scheme: &LabelScheme) -> BTreeSet<usize> {
    labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| scheme.is_edit(l))
        .map(|(i, _)| i)
        .collect()
}

pub fn prf(pred: &BTreeSet<usize>, gold: &BTreeSet<usize>) -> Prf {
    Counts::between(pred, gold).prf()
}

fn gold_edit_set(s: &Sentence) -> BTreeSet<usize> {
    s.edit_words().into_iter().collect()
}

fn check_alignment(pred: &[Vec<usize>], gold: &Corpus) -> Result<()> {
    if pred.len() != gold.len() {
        return Err(Error::Eval(format!(
            "{} predicted sentences but {} gold sentences",
            pred.len(),
            gold.len()
        )));
    }
    for (p, s) in pred.iter().zip(&gold.sentences) {
        if p.len() != s.len() {
            return Err(Error::Eval(format!(
                "sentence {}: {} predicted labels for {} tokens",
                s.id,
                p.len(),
                s.len()
            )));
        }
    }
    Ok(())
}

/// Edit-word P/R/F of `pred` (labels in `scheme`) against the gold spans.
pub fn edit_prf(pred: &[Vec<usize>], gold: &Corpus, scheme: &LabelScheme) -> Result<Prf> {
    check_alignment(pred, gold)?;
    let mut c = Counts::default();
    for (p, s) in pred.iter().zip(&gold.sentences) {
        c.add(Counts::between(
            &edit_word_set(p, scheme),
            &gold_edit_set(s),
        ));
    }
    Ok(c.prf())
}

/// Correction detection: predicted repair states of the non-repetition kind
/// against the repair words of gold correction spans.
pub fn evaluate_corrections(
    pred: &[Vec<usize>],
    gold: &Corpus,
    scheme: &LabelScheme,
) -> Result<Prf> {
    if !scheme.is_typed() || !scheme.has_repair_states() {
        return Err(Error::Eval(format!(
            "correction detection requires typed repair states; scheme `{}` has none",
            scheme.name()
        )));
    }
    check_alignment(pred, gold)?;
    let mut c = Counts::default();
    for (p, s) in pred.iter().zip(&gold.sentences) {
        let predicted: BTreeSet<usize> = p
            .iter()
            .enumerate()
            .filter(|(_, &l)| {
                let st = scheme.state(l);
                st.repair && st.kind == Some(EditKind::Other)
            })
            .map(|(i, _)| i)
            .collect();
        let gold_set: BTreeSet<usize> = gold_correction_words(s).into_iter().collect();
        c.add(Counts::between(&predicted, &gold_set));
    }
    Ok(c.prf())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TypeBreakdown {
    pub repetition: Prf,
    pub other: Prf,
    pub either: Prf,
}

/// Splits edit scoring by the kind of the gold reparandum each word belongs
/// to. A predicted edit word outside every gold reparandum is a false
/// positive for both kinds.
pub fn breakdown_by_type(
    pred: &[Vec<usize>],
    gold: &Corpus,
    scheme: &LabelScheme,
) -> Result<TypeBreakdown> {
    check_alignment(pred, gold)?;
    let (mut rep, mut other, mut either) =
        (Counts::default(), Counts::default(), Counts::default());
    for (p, s) in pred.iter().zip(&gold.sentences) {
        let predicted = edit_word_set(p, scheme);
        let gold_all = gold_edit_set(s);
        let (gold_rep, gold_other): (BTreeSet<usize>, BTreeSet<usize>) =
            gold_all.iter().partition(|&&i| {
                s.innermost_reparandum(i).map(|sp| sp.kind.edit_kind())
                    == Some(EditKind::Repetition)
            });
        let fp = predicted.difference(&gold_all).count();
        for (counts, gold_set) in [(&mut rep, &gold_rep), (&mut other, &gold_other)] {
            let tp = predicted.intersection(gold_set).count();
            counts.add(Counts {
                tp,
                fp,
                fn_: gold_set.len() - tp,
            });
        }
        either.add(Counts::between(&predicted, &gold_all));
    }
    Ok(TypeBreakdown {
        repetition: rep.prf(),
        other: other.prf(),
        either: either.prf(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub edit: Prf,
    pub corrections: Option<Prf>,
    pub breakdown: Option<TypeBreakdown>,
}

impl EvalReport {
    pub fn repetition_f(&self) -> Option<f64> {
        self.breakdown.map(|b| b.repetition.f1)
    }

    pub fn other_f(&self) -> Option<f64> {
        self.breakdown.map(|b| b.other.f1)
    }

    pub fn either_f(&self) -> Option<f64> {
        self.breakdown.map(|b| b.either.f1)
    }

    fn rows(&self) -> Vec<(&'static str, Prf)> {
        let mut rows = vec![("edit", self.edit)];
        if let Some(c) = self.corrections {
            rows.push(("corrections", c));
        }
        if let Some(b) = self.breakdown {
            rows.push(("repetition", b.repetition));
            rows.push(("other", b.other));
            rows.push(("either", b.either));
        }
        rows
    }

    /// Aligned, human-readable table.
    pub fn table(&self) -> String {
        let mut out = format!(
            "{:<12} {:>9} {:>9} {:>9} {:>7} {:>7} {:>7}\n",
            "metric", "precision", "recall", "f1", "tp", "fp", "fn"
        );
        for (name, p) in self.rows() {
            let flag = if p.degenerate { " *" } else { "" };
            let _ = writeln!(
                out,
                "{:<12} {:>9.4} {:>9.4} {:>9.4} {:>7} {:>7} {:>7}{flag}",
                name, p.precision, p.recall, p.f1, p.tp, p.fp, p.fn_
            );
        }
        if self.rows().iter().any(|(_, p)| p.degenerate) {
            out.push_str("* no predictions; precision reported as 0\n");
        }
        out
    }

    /// Machine-readable `name.field=value` lines.
    pub fn key_values(&self) -> String {
        let mut out = String::new();
        for (name, p) in self.rows() {
            let _ = writeln!(out, "{name}.p={:.6}", p.precision);
            let _ = writeln!(out, "{name}.r={:.6}", p.recall);
            let _ = writeln!(out, "{name}.f={:.6}", p.f1);
            let _ = writeln!(out, "{name}.tp={}", p.tp);
            let _ = writeln!(out, "{name}.fp={}", p.fp);
            let _ = writeln!(out, "{name}.fn={}", p.fn_);
            let _ = writeln!(out, "{name}.degenerate={}", p.degenerate);
        }
        out
    }
}

/// Full report: edit scores, the type breakdown, and correction scores when
/// the scheme has typed repair states.
pub fn evaluate(pred: &[Vec<usize>], gold: &Corpus, scheme: &LabelScheme) -> Result<EvalReport> {
    let edit = edit_prf(pred, gold, scheme)?;
    let corrections = if scheme.is_typed() && scheme.has_repair_states() {
        Some(evaluate_corrections(pred, gold, scheme)?)
    } else {
        None
    };
    Ok(EvalReport {
        edit,
        corrections,
        breakdown: Some(breakdown_by_type(pred, gold, scheme)?),
    })
}
