//! Synthetic disfluent corpora with exact gold spans.
//!
//! Fluent sentences come from part-of-speech templates. Disfluencies are
//! injected independently per sentence: each kind appears with its
//! configured probability. Repetitions copy a one- or two-word stretch,
//! corrections copy it with one word swapped for another of the same POS,
//! and restarts insert an abandoned phrase with no repair.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::sentence::{Corpus, DisfluencySpan, Sentence, Split};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("synthetic corpus config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_sentences: usize,
    pub vocab_size: usize,
    pub repetition_rate: f64,
    pub correction_rate: f64,
    pub restart_rate: f64,
    pub interregnum_rate: f64,
    pub max_len: usize,
    pub split: Split,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_sentences: 100,
            vocab_size: 200,
            repetition_rate: 0.3,
            correction_rate: 0.2,
            restart_rate: 0.15,
            interregnum_rate: 0.3,
            max_len: 20,
            split: Split::Train,
        }
    }
}

const CLOSED: &[(&str, &[&str])] = &[
    ("PRP", &["i", "we", "you", "they", "he", "she"]),
    ("DT", &["the", "a", "this", "that"]),
    ("IN", &["in", "on", "about", "with", "for"]),
    ("MD", &["would", "could", "will"]),
    ("RB", &["just", "really", "also"]),
    ("TO", &["to"]),
    ("CC", &["and", "but", "so"]),
];

const OPEN: &[&str] = &["NN", "VB", "VBD", "JJ"];

const TEMPLATES: &[&[&str]] = &[
    &["PRP", "VBD", "DT", "NN"],
    &["PRP", "VBD", "DT", "JJ", "NN", "IN", "DT", "NN"],
    &["DT", "NN", "VBD", "IN", "DT", "NN"],
    &["PRP", "MD", "VB", "DT", "NN"],
    &["PRP", "RB", "VBD", "DT", "NN"],
    &["DT", "JJ", "NN", "VBD"],
    &["PRP", "VBD", "TO", "VB", "DT", "NN"],
    &["PRP", "VBD", "IN", "DT", "JJ", "NN"],
];

const INTERREGNA: &[&[(&str, &str)]] = &[
    &[("uh", "UH")],
    &[("um", "UH")],
    &[("you", "PRP"), ("know", "VBP")],
];

/// Words the templates always use, independent of the open vocabulary.
pub fn template_word_count() -> usize {
    CLOSED.iter().map(|(_, ws)| ws.len()).sum()
}

/// Smallest accepted `vocab_size`: template words plus two per open class.
pub fn min_vocab_size() -> usize {
    template_word_count() + 2 * OPEN.len()
}

type Word = (String, String);

struct Lexicon {
    /// Per POS tag: words with Zipf-like sampling weights.
    classes: Vec<(String, Vec<String>, Vec<f64>)>,
}

impl Lexicon {
    fn build(vocab_size: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut classes: Vec<(String, Vec<String>, Vec<f64>)> = CLOSED
            .iter()
            .map(|(pos, ws)| {
                (
                    pos.to_string(),
                    ws.iter().map(|w| w.to_string()).collect(),
                    vec![1.0; ws.len()],
                )
            })
            .collect();
        let open_total = vocab_size - template_word_count();
        let mut pool = pseudo_words(open_total, rng);
        for (k, pos) in OPEN.iter().enumerate() {
            let share = open_total / OPEN.len() + usize::from(k < open_total % OPEN.len());
            let words: Vec<String> = pool.drain(..share).collect();
            let weights = (0..words.len()).map(|r| 1.0 / (r as f64 + 1.0)).collect();
            classes.push((pos.to_string(), words, weights));
        }
        Self { classes }
    }

    fn class(&self, pos: &str) -> &(String, Vec<String>, Vec<f64>) {
        self.classes
            .iter()
            .find(|c| c.0 == pos)
            .expect("template POS has a class")
    }

    fn sample(&self, pos: &str, rng: &mut ChaCha8Rng) -> Word {
        let (_, words, weights) = self.class(pos);
        let total: f64 = weights.iter().sum();
        let mut x = rng.gen::<f64>() * total;
        for (w, weight) in words.iter().zip(weights) {
            x -= weight;
            if x <= 0.0 {
                return (w.clone(), pos.to_string());
            }
        }
        (words.last().unwrap().clone(), pos.to_string())
    }

    fn alternative(&self, word: &Word, rng: &mut ChaCha8Rng) -> Option<Word> {
        for _ in 0..16 {
            let alt = self.sample(&word.1, rng);
            if alt.0 != word.0 {
                return Some(alt);
            }
        }
        let (_, words, _) = self.class(&word.1);
        words
            .iter()
            .find(|w| **w != word.0)
            .map(|w| (w.clone(), word.1.clone()))
    }
}

fn pseudo_words(n: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    const C: &[char] = &[
        'b', 'd', 'f', 'g', 'k', 'l', 'm', 'n', 'p', 'r', 's', 't', 'v', 'z',
    ];
    const V: &[char] = &['a', 'e', 'i', 'o', 'u'];
    let mut syllables: Vec<String> = C
        .iter()
        .flat_map(|c| V.iter().map(move |v| format!("{c}{v}")))
        .collect();
    syllables.shuffle(rng);
    let mut out = Vec::with_capacity(n);
    let mut len = 2;
    'outer: loop {
        let mut idx = vec![0usize; len];
        loop {
            let w: String = idx.iter().map(|&i| syllables[i].as_str()).collect();
            out.push(w);
            if out.len() == n {
                break 'outer;
            }
            let mut k = len;
            loop {
                if k == 0 {
                    len += 1;
                    continue 'outer;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < syllables.len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
    out.shuffle(rng);
    out
}

fn fragment(word: &str) -> String {
    let prefix: String = word.chars().take(2).collect();
    format!("{prefix}-")
}

#[derive(Clone, Copy, PartialEq)]
enum Inject {
    Repetition,
    Correction,
    Restart,
}

pub fn generate_synthetic(config: &SynthConfig, seed: u64) -> Result<Corpus, SynthError> {
    let bad = |m: String| Err(SynthError::Config(m));
    for (name, r) in [
        ("repetition_rate", config.repetition_rate),
        ("correction_rate", config.correction_rate),
        ("restart_rate", config.restart_rate),
        ("interregnum_rate", config.interregnum_rate),
    ] {
        if !(0.0..=1.0).contains(&r) {
            return bad(format!("{name} = {r} is outside [0, 1]"));
        }
    }
    if config.max_len < 3 {
        return bad(format!("max_len = {} must be at least 3", config.max_len));
    }
    if config.vocab_size < min_vocab_size() {
        return bad(format!(
            "vocab_size = {} is below the {} words the templates need",
            config.vocab_size,
            min_vocab_size()
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lexicon = Lexicon::build(config.vocab_size, &mut rng);
    let prefix = match config.split {
        Split::Train => "train",
        Split::Dev => "dev",
        Split::Test => "test",
    };
    let sentences = (0..config.n_sentences)
        .map(|i| {
            let fluent = fluent_sentence(&lexicon, config.max_len, &mut rng);
            inject(
                format!("{prefix}-{i:05}"),
                fluent,
                &lexicon,
                config,
                &mut rng,
            )
        })
        .collect();
    Ok(Corpus::new(sentences, config.split))
}

fn fluent_sentence(lexicon: &Lexicon, max_len: usize, rng: &mut ChaCha8Rng) -> Vec<Word> {
    let mut words: Vec<Word> = TEMPLATES
        .choose(rng)
        .unwrap()
        .iter()
        .map(|p| lexicon.sample(p, rng))
        .collect();
    if rng.gen_bool(0.3) {
        let second = TEMPLATES.choose(rng).unwrap();
        if words.len() + 1 + second.len() <= max_len {
            words.push(lexicon.sample("CC", rng));
            words.extend(second.iter().map(|p| lexicon.sample(p, rng)));
        }
    }
    words.truncate(max_len);
    words
}

struct Plan {
    kind: Inject,
    at: usize,
    len: usize,
}

fn inject(
    id: String,
    fluent: Vec<Word>,
    lexicon: &Lexicon,
    config: &SynthConfig,
    rng: &mut ChaCha8Rng,
) -> Sentence {
    let n = fluent.len();
    let mut claimed = vec![false; n];
    let mut plans: Vec<Plan> = Vec::new();
    for (kind, rate) in [
        (Inject::Repetition, config.repetition_rate),
        (Inject::Correction, config.correction_rate),
        (Inject::Restart, config.restart_rate),
    ] {
        if !rng.gen_bool(rate) {
            continue;
        }
        for _ in 0..16 {
            let at = if kind == Inject::Restart && rng.gen_bool(0.7) {
                0
            } else {
                rng.gen_range(0..n)
            };
            let len = if kind != Inject::Restart && at + 2 <= n && rng.gen_bool(0.3) {
                2
            } else {
                1
            };
            if claimed[at..at + len].iter().all(|c| !c) {
                claimed[at..at + len].iter_mut().for_each(|c| *c = true);
                plans.push(Plan { kind, at, len });
                break;
            }
        }
    }
    plans.sort_by_key(|p| p.at);

    let mut words: Vec<Word> = Vec::new();
    let mut spans = Vec::new();
    let mut i = 0;
    let mut plan_iter = plans.into_iter().peekable();
    while i < n {
        let Some(plan) = plan_iter.next_if(|p| p.at == i) else {
            words.push(fluent[i].clone());
            i += 1;
            continue;
        };
        let original = &fluent[i..i + plan.len];
        match plan.kind {
            Inject::Repetition if plan.len == 1 && rng.gen_bool(0.1) => {
                // flattened chain: w + w- + w
                let w = &original[0];
                let start = words.len();
                words.push(w.clone());
                let frag = (fragment(&w.0), w.1.clone());
                words.push(frag);
                words.push(w.clone());
                spans.push(DisfluencySpan::new(
                    start..start + 1,
                    start + 1..start + 1,
                    start + 1..start + 2,
                    true,
                ));
                let mut second = DisfluencySpan::new(
                    start + 1..start + 2,
                    start + 2..start + 2,
                    start + 2..start + 3,
                    true,
                );
                second.chained = true;
                spans.push(second);
            }
            Inject::Repetition | Inject::Correction => {
                let mut reparandum = original.to_vec();
                if plan.kind == Inject::Correction {
                    let mut order: Vec<usize> = (0..reparandum.len()).collect();
                    order.shuffle(rng);
                    for j in order {
                        if let Some(alt) = lexicon.alternative(&reparandum[j], rng) {
                            reparandum[j] = alt;
                            break;
                        }
                    }
                }
                let start = words.len();
                words.extend(reparandum);
                let ip = words.len();
                push_interregnum(&mut words, config, rng);
                let repair_start = words.len();
                words.extend(original.iter().cloned());
                spans.push(DisfluencySpan::new(
                    start..ip,
                    ip..repair_start,
                    repair_start..words.len(),
                    plan.kind == Inject::Repetition,
                ));
            }
            Inject::Restart => {
                let template = TEMPLATES.choose(rng).unwrap();
                let len = rng.gen_range(1..=3.min(template.len()));
                let start = words.len();
                for pos in &template[..len] {
                    words.push(lexicon.sample(pos, rng));
                }
                if rng.gen_bool(0.25) {
                    let last = words.last_mut().unwrap();
                    last.0 = fragment(&last.0);
                }
                let ip = words.len();
                push_interregnum(&mut words, config, rng);
                spans.push(DisfluencySpan::new(
                    start..ip,
                    ip..words.len(),
                    words.len()..words.len(),
                    false,
                ));
                words.push(fluent[i].clone());
                i += 1;
                continue;
            }
        }
        i += plan.len;
    }
    Sentence::new(id, words, spans).expect("generated spans are well-formed")
}

fn push_interregnum(words: &mut Vec<Word>, config: &SynthConfig, rng: &mut ChaCha8Rng) {
    if rng.gen_bool(config.interregnum_rate) {
        let filler = INTERREGNA.choose(rng).unwrap();
        words.extend(filler.iter().map(|(w, p)| (w.to_string(), p.to_string())));
    }
}
