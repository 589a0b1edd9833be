use std::collections::BTreeSet;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use sleepsig::classical::{knn_predict, train_classical, ModelFamily};
use sleepsig::data::assemble_tensor;
use sleepsig::nn::{forward, init_params, loss_and_gradients};
use sleepsig::synth::{generate, SynthSpec};
use sleepsig::{HeadConfig, Label, Selection, TaskId, Tensor};

fn head(c: &mut Criterion) {
    let config = HeadConfig::default();
    let params = init_params::<f32>(config, 1).unwrap();
    let input = Tensor::from_fn(&config.input_shape(), |i| ((i % 97) as f32 - 48.0) / 48.0);
    c.bench_function("forward_48ch", |b| {
        b.iter(|| forward(&params, black_box(&input)).unwrap())
    });

    let batch: Vec<&Tensor<f32>> = vec![&input; 32];
    let labels: Vec<usize> = (0..32).map(|i| i % 2).collect();
    c.bench_function("loss_and_gradients_batch32", |b| {
        b.iter(|| loss_and_gradients(&params, black_box(&batch), &labels).unwrap())
    });
}

fn assemble(c: &mut Criterion) {
    let dataset = generate(&SynthSpec {
        n_sessions: 4,
        seed: 3,
        ..SynthSpec::default()
    })
    .unwrap();
    let session = &dataset.sessions()[0];
    let layout = dataset.layout();
    c.bench_function("assemble_all_f8", |b| {
        b.iter(|| assemble_tensor(black_box(session), layout, &Selection::All).unwrap())
    });
    let only = Selection::Only(BTreeSet::from([TaskId::MemoryRecall]));
    c.bench_function("assemble_memory_recall_f8", |b| {
        b.iter(|| assemble_tensor(black_box(session), layout, &only).unwrap())
    });
}

fn knn(c: &mut Criterion) {
    let x: Vec<Vec<f64>> = (0..1500)
        .map(|i| (0..62).map(|j| ((i * 31 + j * 7) % 101) as f64 / 101.0).collect())
        .collect();
    let y: Vec<Label> = (0..1500)
        .map(|i| if i % 3 == 0 { Label::Sleepy } else { Label::NonSleepy })
        .collect();
    let model = train_classical(ModelFamily::Knn { k: 5 }, &x, &y).unwrap();
    let query = vec![0.5; 62];
    c.bench_function("knn_k5_1500x62", |b| {
        b.iter(|| knn_predict(&model, black_box(&query)).unwrap())
    });
}

criterion_group!(benches, head, assemble, knn);
criterion_main!(benches);
