use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use disfl_core::corpus::io::{read_dis, render_tsv, TaggedSentence};
use disfl_core::{derive_labels, LabelScheme, Split};
use tempfile::TempDir;

fn disfl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_disfl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth(dir: &Path, seed: &str, sizes: (usize, usize, usize)) {
    let o = disfl(&[
        "synth",
        "--out-dir",
        p(dir),
        "--seed",
        seed,
        "--set",
        &format!("train_size={}", sizes.0),
        "--set",
        &format!("dev_size={}", sizes.1),
        "--set",
        &format!("test_size={}", sizes.2),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
}

fn train(dir: &Path, out: &Path, extra: &[&str]) -> Output {
    let (train, dev) = (dir.join("train.dis"), dir.join("dev.dis"));
    let mut args = vec![
        "train",
        "--train",
        p(&train),
        "--dev",
        p(&dev),
        "--out",
        p(out),
    ];
    args.extend([
        "--set",
        "hidden_dim=8",
        "--set",
        "word_dim=8",
        "--set",
        "max_epochs=3",
    ]);
    args.extend_from_slice(extra);
    disfl(&args)
}

fn trained(tmp: &TempDir) -> PathBuf {
    synth(tmp.path(), "3", (60, 20, 20));
    let ckpt = tmp.path().join("model.ckpt");
    let o = train(tmp.path(), &ckpt, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    ckpt
}

fn gold_tsv(dis: &Path, scheme: &LabelScheme, out: &Path) {
    let corpus = read_dis(dis, Split::Test).unwrap();
    let tagged: Vec<TaggedSentence> = corpus
        .sentences
        .iter()
        .map(|s| TaggedSentence::from_sentence(s, scheme.names(&derive_labels(s, scheme).unwrap())))
        .collect();
    fs::write(out, render_tsv(&tagged)).unwrap();
}

#[test]
fn synth_is_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    synth(a.path(), "7", (30, 10, 10));
    synth(b.path(), "7", (30, 10, 10));
    for f in ["train.dis", "dev.dis", "test.dis"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap()
        );
    }
}

#[test]
fn missing_dev_file_is_a_usage_error_naming_the_path() {
    let tmp = TempDir::new().unwrap();
    synth(tmp.path(), "1", (10, 5, 5));
    fs::remove_file(tmp.path().join("dev.dis")).unwrap();
    let o = train(tmp.path(), &tmp.path().join("m.ckpt"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains(p(&tmp.path().join("dev.dis"))),
        "{}",
        stderr(&o)
    );
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let o = disfl(&["synth", "--out-dir", p(tmp.path()), "--set", "colour=blue"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown config key `colour`"));
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "seed = 1\nflavour = x\n").unwrap();
    let o = disfl(&["synth", "--out-dir", p(tmp.path()), "--config", p(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.cfg:2"), "{}", stderr(&o));
    assert_eq!(disfl(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn config_file_is_overridden_by_flags_and_echoed() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(
        &cfg,
        "# sizes\ntrain_size = 4\ndev_size = 2\ntest_size = 2\nseed = 1\n",
    )
    .unwrap();
    let o = disfl(&[
        "synth",
        "--config",
        p(&cfg),
        "--out-dir",
        p(tmp.path()),
        "--set",
        "train_size=5",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let log = stderr(&o);
    assert!(log.contains("config: train_size = 5"));
    assert!(log.contains("config: seed = 1"));
    assert_eq!(
        fs::read_to_string(tmp.path().join("train.dis"))
            .unwrap()
            .lines()
            .count(),
        5
    );
}

#[test]
fn parse_errors_report_file_and_line() {
    let tmp = TempDir::new().unwrap();
    synth(tmp.path(), "1", (5, 5, 5));
    let bad = tmp.path().join("train.dis");
    let mut text = fs::read_to_string(&bad).unwrap();
    text.push_str("broken\t[ a + b\n");
    fs::write(&bad, text).unwrap();
    let o = train(tmp.path(), &tmp.path().join("m.ckpt"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("train.dis:6:"), "{}", stderr(&o));
}

#[test]
fn training_is_reproducible_and_logged() {
    let tmp = TempDir::new().unwrap();
    synth(tmp.path(), "2", (40, 10, 10));
    let (a, b) = (tmp.path().join("a.ckpt"), tmp.path().join("b.ckpt"));
    let log = tmp.path().join("train.log");
    assert!(train(tmp.path(), &a, &["--log", p(&log)]).status.success());
    assert!(train(tmp.path(), &b, &[]).status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let log = fs::read_to_string(log).unwrap();
    assert!(log.contains("# hidden_dim = 8"));
    let epochs: Vec<&str> = log.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(epochs.len(), 3);
    assert!(epochs.iter().all(|l| l.split('\t').count() == 3));
}

#[test]
fn tag_decoders_and_eval() {
    let tmp = TempDir::new().unwrap();
    let ckpt = trained(&tmp);
    let test = tmp.path().join("test.dis");
    let mut outs = Vec::new();
    for method in ["dp", "ilp", "argmax"] {
        let out = tmp.path().join(format!("{method}.tsv"));
        let o = disfl(&[
            "tag",
            "--checkpoint",
            p(&ckpt),
            "--input",
            p(&test),
            "--decode",
            method,
            "--out",
            p(&out),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        outs.push(fs::read_to_string(out).unwrap());
    }
    assert_eq!(outs[0], outs[1]);

    let o = disfl(&[
        "eval",
        "--pred",
        p(&tmp.path().join("dp.tsv")),
        "--gold",
        p(&test),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("edit.f="));
    assert!(!stdout(&o).contains("corrections"));

    let o = disfl(&[
        "tag",
        "--checkpoint",
        p(&ckpt),
        "--input",
        p(&test),
        "--scheme",
        "five",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("scheme mismatch"));
}

#[test]
fn long_sentences_are_tagged() {
    let tmp = TempDir::new().unwrap();
    let ckpt = trained(&tmp);
    let words: Vec<String> = (0..80).map(|i| format!("w{}", i % 9)).collect();
    let input = tmp.path().join("long.dis");
    fs::write(&input, format!("long\t{}\n", words.join(" "))).unwrap();
    let o = disfl(&["tag", "--checkpoint", p(&ckpt), "--input", p(&input)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        stdout(&o)
            .lines()
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .count(),
        80
    );
}

#[test]
fn eval_gold_against_gold_and_misalignment() {
    let tmp = TempDir::new().unwrap();
    synth(tmp.path(), "4", (5, 5, 30));
    let test = tmp.path().join("test.dis");
    let pred = tmp.path().join("gold.tsv");
    gold_tsv(&test, &LabelScheme::extended(), &pred);
    let o = disfl(&["eval", "--pred", p(&pred), "--gold", p(&test)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    for key in [
        "edit.f=1.000000",
        "repetition.f=1.000000",
        "other.f=1.000000",
        "either.f=1.000000",
    ] {
        assert!(out.contains(key), "{out}");
    }
    assert!(out.contains("corrections"));

    let o = disfl(&["eval", "--pred", p(&pred), "--gold", p(&pred)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("edit.f=1.000000"));

    let text = fs::read_to_string(&test).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines.swap(1, 2);
    let diverging = lines[1].split('\t').next().unwrap();
    let shuffled = tmp.path().join("shuffled.dis");
    fs::write(&shuffled, lines.join("\n")).unwrap();
    let o = disfl(&["eval", "--pred", p(&pred), "--gold", p(&shuffled)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains(&format!("sentence {diverging}")),
        "{}",
        stderr(&o)
    );
}

#[test]
fn feature_dump_of_fluent_pair_is_all_sentinels() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("pair.dis");
    fs::write(&input, "pair\thello world\n").unwrap();
    let o = disfl(&["features", "--input", p(&input)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let rows: Vec<Vec<&str>> = out
        .lines()
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split('\t').collect())
        .collect();
    assert_eq!(rows.len(), 2);
    for row in &rows {
        assert_eq!(row.len(), 18);
        assert!(row[7..].iter().all(|v| *v == "0"), "{row:?}");
    }
    assert_eq!(out, stdout(&disfl(&["features", "--input", p(&input)])));
}

#[test]
fn pretrained_embeddings_feed_training() {
    let tmp = TempDir::new().unwrap();
    synth(tmp.path(), "5", (30, 10, 10));
    let emb = tmp.path().join("emb.txt");
    let o = disfl(&[
        "pretrain-lm",
        "--corpus",
        p(&tmp.path().join("train.dis")),
        "--out",
        p(&emb),
        "--set",
        "word_dim=8",
        "--set",
        "pos_dim=5",
        "--set",
        "epochs=1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(fs::read_to_string(&emb).unwrap().starts_with("# words "));
    let o = train(
        tmp.path(),
        &tmp.path().join("m.ckpt"),
        &["--init-embeddings", p(&emb)],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains(&format!("initializing embeddings from {}", p(&emb))));

    let o = train(
        tmp.path(),
        &tmp.path().join("m.ckpt"),
        &["--init-embeddings", p(&emb), "--set", "word_dim=9"],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("dimension"));
}
