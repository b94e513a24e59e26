use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use farmscape::landscape::Geometry;
use farmscape::model::{simulate, FarmConfig, ModelParams};
use farmscape::ExecMode;

fn replicate_batch(c: &mut Criterion) {
    let params = ModelParams {
        geometry: Geometry {
            rows: 100,
            cols: 100,
            cell_area: 0.01,
        },
        ..Default::default()
    };
    let farm = FarmConfig::new(10.0);
    let mut group = c.benchmark_group("simulate_8_replicates");
    group.sample_size(10);
    for mode in [ExecMode::Sequential, ExecMode::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &mode, |b, &mode| {
            b.iter(|| simulate(&farm, &params, 1, 8, mode).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, replicate_batch);
criterion_main!(benches);
