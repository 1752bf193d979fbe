use criterion::{criterion_group, criterion_main, Criterion};
use currentkit::flatgan::{build_circle_dataset, FlatGan, TrainConfig};

fn epoch(c: &mut Criterion) {
    let data = build_circle_dataset(5, 1.0, 0).unwrap();
    let mut group = c.benchmark_group("train_epoch");
    for k in [0, 1] {
        let mut gan = FlatGan::new(TrainConfig {
            k,
            ..TrainConfig::default()
        })
        .unwrap();
        group.bench_function(format!("k{k}"), |b| b.iter(|| gan.run_epoch(&data).unwrap().e_disc));
    }
    group.finish();
}

criterion_group!(benches, epoch);
criterion_main!(benches);
