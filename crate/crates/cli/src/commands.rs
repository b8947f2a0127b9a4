use std::fs::{self, File};
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use disfl_core::corpus::io::{parse_tsv, read_dis, render_tsv, write_dis, TaggedSentence};
use disfl_core::corpus::synth::{generate_synthetic, SynthConfig};
use disfl_core::corpus::{Corpus, LabelScheme, Sentence, Split};
use disfl_core::decode::{is_legal, DecodeMethod};
use disfl_core::eval::{self, edit_word_set, Counts};
use disfl_core::features::{
    build_pos_vocab, build_vocab, BigramModel, FeatureSchema, Featurizer, LmBins, LmFeatures,
};
use disfl_core::model::{
    self, Direction, Model, ModelConfig, PretrainConfig, Pretrained, TrainConfig,
};

use crate::config::{parse_feature_ids, usage, RunConfig};

macro_rules! keys {
    ($($k:literal => $v:literal),*) => {{
        const K: &[(&str, &str)] = &[$(($k, $v)),*];
        K
    }};
}

pub const TRAIN_KEYS: &[(&str, &str)] = keys![
    "train" => "", "dev" => "", "out" => "", "log" => "",
    "scheme" => "eight", "direction" => "bidirectional",
    "word_dim" => "150", "pos_dim" => "5", "feat_dim" => "5", "hidden_dim" => "150",
    "seed" => "0", "batch_size" => "50", "rho" => "0.95", "epsilon" => "1e-6",
    "max_epochs" => "50", "patience" => "5", "max_train_len" => "50", "clip_norm" => "5",
    "init_embeddings" => "",
    "features" => "1-17", "window_follow" => "8", "window_precede" => "8",
    "pattern_window" => "8", "gap_max" => "3", "min_count" => "1"
];

pub const TAG_KEYS: &[(&str, &str)] = keys![
    "checkpoint" => "", "input" => "", "out" => "", "decode" => "dp", "scheme" => "", "threads" => "0"
];

pub const EVAL_KEYS: &[(&str, &str)] = keys!["pred" => "", "gold" => "", "scheme" => "auto"];

pub const SYNTH_KEYS: &[(&str, &str)] = keys![
    "out_dir" => "", "seed" => "0", "train_size" => "2000", "dev_size" => "500", "test_size" => "500",
    "vocab_size" => "200", "repetition_rate" => "0.3", "correction_rate" => "0.2",
    "restart_rate" => "0.15", "interregnum_rate" => "0.3", "max_len" => "20"
];

pub const FEATURE_KEYS: &[(&str, &str)] = keys![
    "input" => "", "out" => "",
    "features" => "1-17", "window_follow" => "8", "window_precede" => "8",
    "pattern_window" => "8", "gap_max" => "3", "min_count" => "1"
];

pub const PRETRAIN_KEYS: &[(&str, &str)] = keys![
    "corpus" => "", "out" => "", "word_dim" => "150", "pos_dim" => "5", "epochs" => "5",
    "seed" => "0", "batch_size" => "20"
];

fn feature_schema(cfg: &RunConfig) -> Result<FeatureSchema> {
    let schema = FeatureSchema {
        enabled: parse_feature_ids(cfg.require("features")?)?
            .into_iter()
            .collect(),
        window_follow: cfg.parse("window_follow")?,
        window_precede: cfg.parse("window_precede")?,
        pattern_window: cfg.parse("pattern_window")?,
        gap_max: cfg.parse("gap_max")?,
        ..FeatureSchema::default()
    };
    schema.validate().map_err(|e| usage(e.to_string()))?;
    Ok(schema)
}

fn featurizer(cfg: &RunConfig, train: &Corpus) -> Result<Featurizer> {
    let schema = feature_schema(cfg)?;
    let lm = schema.uses_lm().then(|| {
        let model = BigramModel::train(train);
        let bins = LmBins::fit(train, &model);
        LmFeatures { model, bins }
    });
    let words = build_vocab(train, cfg.parse("min_count")?);
    Ok(Featurizer::new(schema, words, build_pos_vocab(train), lm)?)
}

fn scheme_from(spec: &str) -> Result<LabelScheme> {
    if let Some(s) = LabelScheme::builtin(spec) {
        return Ok(s);
    }
    let path = Path::new(spec);
    if !path.is_file() {
        return Err(usage(format!(
            "unknown scheme `{spec}` (expected five, eight, extended or a scheme file)"
        )));
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    LabelScheme::from_text(&text).with_context(|| format!("scheme file {}", path.display()))
}

fn read_sentences(path: &Path, split: Split) -> Result<Corpus> {
    let is_tsv = path.extension().is_some_and(|e| e == "tsv");
    if is_tsv {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let tagged = parse_tsv(&text, &path.display().to_string())?;
        let sentences = tagged
            .into_iter()
            .map(|t| Sentence::new(t.id, t.words, vec![]))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Corpus::new(sentences, split))
    } else {
        Ok(read_dis(path, split)?)
    }
}

fn check_writable(path: &Path) -> Result<()> {
    File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn train(cfg: &RunConfig) -> Result<()> {
    let train_path = cfg.input("train")?;
    let dev_path = cfg.input("dev")?;
    let out = cfg.output("out")?;
    let scheme = scheme_from(cfg.require("scheme")?)?;
    let model_cfg = ModelConfig {
        direction: cfg.parse::<Direction>("direction")?,
        scheme: scheme.name().to_string(),
        word_dim: cfg.parse("word_dim")?,
        pos_dim: cfg.parse("pos_dim")?,
        default_feat_dim: cfg.parse("feat_dim")?,
        hidden_dim: cfg.parse("hidden_dim")?,
        seed: cfg.parse("seed")?,
        ..ModelConfig::default()
    };
    model_cfg.validate().map_err(|e| usage(e.to_string()))?;
    let tc = TrainConfig {
        batch_size: cfg.parse("batch_size")?,
        rho: cfg.parse("rho")?,
        epsilon: cfg.parse("epsilon")?,
        max_epochs: cfg.parse("max_epochs")?,
        patience: cfg.parse("patience")?,
        max_train_len: cfg.parse("max_train_len")?,
        clip_norm: cfg.parse("clip_norm")?,
        seed: cfg.parse("seed")?,
    };
    tc.validate().map_err(|e| usage(e.to_string()))?;
    let pretrained = match cfg.get("init_embeddings") {
        Some(_) => Some(Pretrained::read(&cfg.input("init_embeddings")?)?),
        None => None,
    };

    check_writable(&out)?;
    let mut log = match cfg.get("log") {
        Some(p) => {
            let mut f = File::create(p).with_context(|| format!("cannot write {p}"))?;
            for line in cfg.echo().lines() {
                writeln!(f, "# {line}")?;
            }
            Some(f)
        }
        None => None,
    };

    let train_c = read_sentences(&train_path, Split::Train)?;
    let dev_c = read_sentences(&dev_path, Split::Dev)?;
    let kept = train_c.filter_by_length(tc.max_train_len).len();
    eprintln!(
        "train: {} sentences ({} within {} words), dev: {} sentences",
        train_c.len(),
        kept,
        tc.max_train_len,
        dev_c.len()
    );
    let featurizer = featurizer(cfg, &train_c)?;
    if let Some(p) = &pretrained {
        let rows = |t: &Option<model::EmbeddingTable>| t.as_ref().map_or(0, |t| t.len());
        let msg = format!(
            "initializing embeddings from {} ({} word rows, {} POS rows)",
            cfg.require("init_embeddings")?,
            rows(&p.words),
            rows(&p.pos)
        );
        eprintln!("{msg}");
        if let Some(f) = log.as_mut() {
            writeln!(f, "# {msg}")?;
        }
    }
    let model = Model::new(model_cfg, featurizer, scheme, pretrained.as_ref())?;
    eprintln!("epoch\ttrain_loss\tdev_f");
    let mut write_err = None;
    let ckpt = model::train(model, &train_c, &dev_c, &tc, |r| {
        eprintln!("{r}");
        if let Some(f) = log.as_mut() {
            if let Err(e) = writeln!(f, "{r}") {
                write_err.get_or_insert(e);
            }
        }
    })?;
    if let Some(e) = write_err {
        return Err(e).context("writing training log");
    }
    model::save(&ckpt, &out).with_context(|| format!("saving checkpoint {}", out.display()))?;
    if let Some(best) = ckpt.best_epoch {
        eprintln!(
            "best epoch {best}: dev edit F {:.4}; checkpoint written to {}",
            ckpt.history[best - 1].dev_f,
            out.display()
        );
    }
    Ok(())
}

pub fn tag(cfg: &RunConfig) -> Result<()> {
    let ckpt_path = cfg.input("checkpoint")?;
    let input = cfg.input("input")?;
    let method: DecodeMethod = cfg.parse("decode")?;
    let threads: usize = cfg.parse("threads")?;
    let ckpt =
        model::load(&ckpt_path).with_context(|| format!("loading {}", ckpt_path.display()))?;
    let model = &ckpt.model;
    if let Some(requested) = cfg.get("scheme") {
        let requested = scheme_from(requested)?;
        if requested.name() != model.scheme.name() {
            bail!(
                "scheme mismatch: checkpoint predicts `{}` but `{}` was requested",
                model.scheme.name(),
                requested.name()
            );
        }
    }
    let corpus = read_sentences(&input, Split::Test)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()?;
    let labels: Vec<Vec<usize>> = pool.install(|| {
        corpus
            .sentences
            .par_iter()
            .map(|s| model.tag(s, method))
            .collect()
    });
    let illegal = labels
        .iter()
        .filter(|l| !is_legal(l, model.scheme.legality()))
        .count();
    if illegal > 0 {
        eprintln!(
            "warning: {illegal} of {} sentences have illegal label sequences",
            labels.len()
        );
    }
    let tagged: Vec<TaggedSentence> = corpus
        .sentences
        .iter()
        .zip(&labels)
        .map(|(s, l)| TaggedSentence::from_sentence(s, model.scheme.names(l)))
        .collect();
    let text = render_tsv(&tagged);
    match cfg.get("out") {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {path}"))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn infer_scheme(pred: &[TaggedSentence]) -> Result<LabelScheme> {
    for scheme in [
        LabelScheme::five(),
        LabelScheme::eight(),
        LabelScheme::extended(),
    ] {
        if pred.iter().all(|s| scheme.parse_labels(&s.labels).is_ok()) {
            return Ok(scheme);
        }
    }
    bail!("predicted labels fit none of the built-in schemes; pass scheme=<file>")
}

fn parse_labels(scheme: &LabelScheme, sentences: &[TaggedSentence]) -> Result<Vec<Vec<usize>>> {
    sentences
        .iter()
        .map(|s| {
            scheme
                .parse_labels(&s.labels)
                .with_context(|| format!("sentence {}", s.id))
        })
        .collect()
}

fn align(pred: &[TaggedSentence], gold: &[(String, Vec<String>)]) -> Result<()> {
    for (i, (p, (gid, gwords))) in pred.iter().zip(gold).enumerate() {
        let pwords: Vec<&str> = p.words.iter().map(|(w, _)| w.as_str()).collect();
        if p.id != *gid || pwords != *gwords {
            bail!(
                "prediction and gold diverge at sentence {gid} (#{}, predicted id {}, {} vs {} tokens)",
                i + 1,
                p.id,
                pwords.len(),
                gwords.len()
            );
        }
    }
    if pred.len() != gold.len() {
        let at = gold
            .get(pred.len())
            .map_or_else(|| pred[gold.len()].id.clone(), |g| g.0.clone());
        bail!(
            "prediction has {} sentences but gold has {}; first unmatched sentence {at}",
            pred.len(),
            gold.len()
        );
    }
    Ok(())
}

pub fn eval(cfg: &RunConfig) -> Result<()> {
    let pred_path = cfg.input("pred")?;
    let gold_path = cfg.input("gold")?;
    let text = fs::read_to_string(&pred_path)?;
    let pred = parse_tsv(&text, &pred_path.display().to_string())?;
    let scheme = match cfg.require("scheme")? {
        "auto" => infer_scheme(&pred)?,
        spec => scheme_from(spec)?,
    };
    let pred_labels = parse_labels(&scheme, &pred)?;

    if gold_path.extension().is_some_and(|e| e == "tsv") {
        let text = fs::read_to_string(&gold_path)?;
        let gold = parse_tsv(&text, &gold_path.display().to_string())?;
        let keyed: Vec<(String, Vec<String>)> = gold
            .iter()
            .map(|g| {
                (
                    g.id.clone(),
                    g.words.iter().map(|(w, _)| w.clone()).collect(),
                )
            })
            .collect();
        align(&pred, &keyed)?;
        let gold_scheme = match cfg.require("scheme")? {
            "auto" => infer_scheme(&gold)?,
            _ => scheme.clone(),
        };
        let gold_labels = parse_labels(&gold_scheme, &gold)?;
        let mut c = Counts::default();
        for (p, g) in pred_labels.iter().zip(&gold_labels) {
            c.add(Counts::between(
                &edit_word_set(p, &scheme),
                &edit_word_set(g, &gold_scheme),
            ));
        }
        let report = eval::EvalReport {
            edit: c.prf(),
            corrections: None,
            breakdown: None,
        };
        print!("{}\n{}", report.table(), report.key_values());
        return Ok(());
    }

    let gold = read_dis(&gold_path, Split::Test)?;
    let keyed: Vec<(String, Vec<String>)> = gold
        .sentences
        .iter()
        .map(|s| {
            (
                s.id.clone(),
                s.tokens.iter().map(|t| t.surface.clone()).collect(),
            )
        })
        .collect();
    align(&pred, &keyed)?;
    let report = eval::evaluate(&pred_labels, &gold, &scheme)?;
    print!("{}\n{}", report.table(), report.key_values());
    Ok(())
}

pub fn synth(cfg: &RunConfig) -> Result<()> {
    let dir = cfg.output("out_dir")?;
    let seed: u64 = cfg.parse("seed")?;
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    for (i, (split, key, file)) in [
        (Split::Train, "train_size", "train.dis"),
        (Split::Dev, "dev_size", "dev.dis"),
        (Split::Test, "test_size", "test.dis"),
    ]
    .into_iter()
    .enumerate()
    {
        let config = SynthConfig {
            n_sentences: cfg.parse(key)?,
            vocab_size: cfg.parse("vocab_size")?,
            repetition_rate: cfg.parse("repetition_rate")?,
            correction_rate: cfg.parse("correction_rate")?,
            restart_rate: cfg.parse("restart_rate")?,
            interregnum_rate: cfg.parse("interregnum_rate")?,
            max_len: cfg.parse("max_len")?,
            split,
        };
        let corpus = generate_synthetic(&config, seed.wrapping_add(i as u64))
            .map_err(|e| usage(e.to_string()))?;
        let path = dir.join(file);
        write_dis(&path, &corpus).with_context(|| format!("cannot write {}", path.display()))?;
        eprintln!("wrote {} sentences to {}", corpus.len(), path.display());
    }
    Ok(())
}

pub fn features(cfg: &RunConfig) -> Result<()> {
    let input = cfg.input("input")?;
    let corpus = read_sentences(&input, Split::Train)?;
    let featurizer = featurizer(cfg, &corpus)?;
    let mut out = String::new();
    for s in &corpus.sentences {
        out.push_str(&format!("# id = {}\n", s.id));
        out.push_str(&featurizer.dump(s));
        out.push('\n');
    }
    match cfg.get("out") {
        Some(path) => fs::write(path, out).with_context(|| format!("cannot write {path}"))?,
        None => std::io::stdout().write_all(out.as_bytes())?,
    }
    Ok(())
}

pub fn pretrain_lm(cfg: &RunConfig) -> Result<()> {
    let corpus_path = cfg.input("corpus")?;
    let out = cfg.output("out")?;
    let pc = PretrainConfig {
        word_dim: cfg.parse("word_dim")?,
        pos_dim: cfg.parse("pos_dim")?,
        epochs: cfg.parse("epochs")?,
        seed: cfg.parse("seed")?,
        batch_size: cfg.parse("batch_size")?,
    };
    check_writable(&out)?;
    let corpus = read_dis(&corpus_path, Split::Train)?;
    let tables = model::pretrain_backward_lm(&corpus, &pc)?;
    tables.write(&out)?;
    eprintln!("wrote embeddings to {}", out.display());
    Ok(())
}
