//! Shared fixtures for the benchmarks.

use disfl_core::corpus::synth::{generate_synthetic, SynthConfig};
use disfl_core::features::{build_pos_vocab, build_vocab, FeatureSchema, Featurizer};
use disfl_core::model::{Direction, Model, ModelConfig};
use disfl_core::{Corpus, LabelScheme, Posteriors};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `len × states` posteriors with rows drawn uniformly and normalised.
pub fn random_posteriors(len: usize, states: usize, seed: u64) -> Posteriors {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(len * states);
    for _ in 0..len {
        let row: Vec<f64> = (0..states).map(|_| rng.gen_range(0.01..1.0)).collect();
        let sum: f64 = row.iter().sum();
        data.extend(row.into_iter().map(|v| v / sum));
    }
    Posteriors::new(len, states, data)
}

pub fn corpus(n: usize, seed: u64) -> Corpus {
    generate_synthetic(
        &SynthConfig {
            n_sentences: n,
            ..SynthConfig::default()
        },
        seed,
    )
    .expect("valid synthetic config")
}

pub fn model(corpus: &Corpus, hidden: usize) -> Model {
    let featurizer = Featurizer::new(
        FeatureSchema::default(),
        build_vocab(corpus, 1),
        build_pos_vocab(corpus),
        None,
    )
    .expect("default schema is valid");
    let config = ModelConfig {
        direction: Direction::Bidirectional,
        word_dim: 32,
        hidden_dim: hidden,
        ..ModelConfig::default()
    };
    Model::new(config, featurizer, LabelScheme::eight(), None).expect("valid model config")
}
