use criterion::{criterion_group, criterion_main, Criterion};
use disfl_bench::{corpus, model};
use disfl_core::derive_labels;
use std::hint::black_box;

fn tagger(c: &mut Criterion) {
    let data = corpus(50, 1);
    let m = model(&data, 64);
    let examples: Vec<_> = data
        .sentences
        .iter()
        .map(|s| {
            (
                m.featurizer.extract(s),
                derive_labels(s, &m.scheme).unwrap(),
            )
        })
        .collect();
    let batch: Vec<_> = examples.iter().map(|(f, l)| (f, l.as_slice())).collect();
    let sentence = &data.sentences[0];

    c.bench_function("features/extract", |b| {
        b.iter(|| m.featurizer.extract(black_box(sentence)))
    });
    c.bench_function("model/forward", |b| {
        b.iter(|| m.forward(black_box(&examples[0].0)))
    });
    c.bench_function("model/loss_and_gradients/50", |b| {
        b.iter(|| m.loss_and_gradients(black_box(&batch)))
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = tagger
}
criterion_main!(benches);
