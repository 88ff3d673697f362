use criterion::{criterion_group, criterion_main, Criterion};

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = smirnov_bench::benchmarks
}
criterion_main!(benches);
