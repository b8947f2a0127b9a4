//! Closed word classes used for token flags and features.

pub const FILLED_PAUSES: &[&str] = &["uh", "um", "uhm", "er", "ah", "eh", "hm", "mm", "huh"];

pub const DISCOURSE_MARKERS: &[&[&str]] = &[
    &["you", "know"],
    &["you", "see"],
    &["well"],
    &["like"],
    &["so"],
    &["actually"],
    &["anyway"],
    &["okay"],
    &["oh"],
];

/// Explicit editing phrases ("I mean", "sorry", ...).
pub const EDIT_TERMS: &[&[&str]] = &[&["i", "mean"], &["excuse", "me"], &["sorry"], &["rather"]];

pub const CONJUNCTIONS: &[&str] = &["and", "but", "or", "so", "because", "then", "well"];

pub fn fold(word: &str) -> String {
    word.to_lowercase()
}

pub fn is_filled_pause(word: &str) -> bool {
    let w = fold(word);
    FILLED_PAUSES.contains(&w.as_str())
}

/// Marks every token covered by an occurrence of one of `phrases`.
/// `words` must already be case-folded.
pub fn mark_phrases<S: AsRef<str>, P: AsRef<str>>(words: &[S], phrases: &[Vec<P>]) -> Vec<bool> {
    let mut marks = vec![false; words.len()];
    for phrase in phrases {
        let n = phrase.len();
        if n == 0 || n > words.len() {
            continue;
        }
        for start in 0..=words.len() - n {
            if phrase
                .iter()
                .zip(&words[start..start + n])
                .all(|(p, w)| p.as_ref() == w.as_ref())
            {
                marks[start..start + n].iter_mut().for_each(|m| *m = true);
            }
        }
    }
    marks
}

pub fn phrase_list(phrases: &[&[&str]]) -> Vec<Vec<String>> {
    phrases
        .iter()
        .map(|p| p.iter().map(|w| w.to_string()).collect())
        .collect()
}
