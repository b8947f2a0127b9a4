//! `disfl`: train, apply and score disfluency taggers.
//!
//! Exit status: 0 on success, 1 on a runtime failure, 2 on a usage or
//! configuration error (including a missing input file).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{RunConfig, UsageError};

#[derive(Parser)]
#[command(
    name = "disfl",
    version,
    about = "Disfluency detection with (B)LSTM taggers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Config file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a config key (repeatable); applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Train a tagger on annotated `.dis` files and write a checkpoint.
    Train {
        #[arg(long)]
        train: Option<String>,
        #[arg(long)]
        dev: Option<String>,
        #[arg(long)]
        out: Option<String>,
        #[arg(long)]
        log: Option<String>,
        #[arg(long)]
        scheme: Option<String>,
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        init_embeddings: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Label sentences with a trained checkpoint, writing `.tsv`.
    Tag {
        #[arg(long)]
        checkpoint: Option<String>,
        #[arg(long)]
        input: Option<String>,
        #[arg(long)]
        out: Option<String>,
        /// argmax, dp or ilp.
        #[arg(long)]
        decode: Option<String>,
        #[arg(long)]
        scheme: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Score predicted `.tsv` labels against a gold file.
    Eval {
        #[arg(long)]
        pred: Option<String>,
        #[arg(long)]
        gold: Option<String>,
        #[arg(long)]
        scheme: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Generate synthetic train/dev/test `.dis` files.
    Synth {
        #[arg(long)]
        out_dir: Option<String>,
        #[arg(long)]
        seed: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Dump per-token feature values as TSV.
    Features {
        #[arg(long)]
        input: Option<String>,
        #[arg(long)]
        out: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Pretrain word and POS embeddings with a backward LSTM language model.
    PretrainLm {
        #[arg(long)]
        corpus: Option<String>,
        #[arg(long)]
        out: Option<String>,
        #[arg(long)]
        seed: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

fn resolve(
    name: &'static str,
    keys: &[(&'static str, &str)],
    common: &Common,
    flags: &[(&str, &Option<String>)],
) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::new(name, keys);
    if let Some(path) = &common.config {
        cfg.load_file(path)?;
    }
    for pair in &common.set {
        cfg.set_pair(pair)?;
    }
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    eprint!(
        "{}",
        cfg.echo()
            .lines()
            .map(|l| format!("config: {l}\n"))
            .collect::<String>()
    );
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Train {
            train,
            dev,
            out,
            log,
            scheme,
            seed,
            init_embeddings,
            common,
        } => {
            let cfg = resolve(
                "train",
                commands::TRAIN_KEYS,
                &common,
                &[
                    ("train", &train),
                    ("dev", &dev),
                    ("out", &out),
                    ("log", &log),
                    ("scheme", &scheme),
                    ("seed", &seed),
                    ("init_embeddings", &init_embeddings),
                ],
            )?;
            commands::train(&cfg)
        }
        Command::Tag {
            checkpoint,
            input,
            out,
            decode,
            scheme,
            common,
        } => {
            let cfg = resolve(
                "tag",
                commands::TAG_KEYS,
                &common,
                &[
                    ("checkpoint", &checkpoint),
                    ("input", &input),
                    ("out", &out),
                    ("decode", &decode),
                    ("scheme", &scheme),
                ],
            )?;
            commands::tag(&cfg)
        }
        Command::Eval {
            pred,
            gold,
            scheme,
            common,
        } => {
            let cfg = resolve(
                "eval",
                commands::EVAL_KEYS,
                &common,
                &[("pred", &pred), ("gold", &gold), ("scheme", &scheme)],
            )?;
            commands::eval(&cfg)
        }
        Command::Synth {
            out_dir,
            seed,
            common,
        } => {
            let cfg = resolve(
                "synth",
                commands::SYNTH_KEYS,
                &common,
                &[("out_dir", &out_dir), ("seed", &seed)],
            )?;
            commands::synth(&cfg)
        }
        Command::Features { input, out, common } => {
            let cfg = resolve(
                "features",
                commands::FEATURE_KEYS,
                &common,
                &[("input", &input), ("out", &out)],
            )?;
            commands::features(&cfg)
        }
        Command::PretrainLm {
            corpus,
            out,
            seed,
            common,
        } => {
            let cfg = resolve(
                "pretrain-lm",
                commands::PRETRAIN_KEYS,
                &common,
                &[("corpus", &corpus), ("out", &out), ("seed", &seed)],
            )?;
            commands::pretrain_lm(&cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
