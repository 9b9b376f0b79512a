use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use edgecolor_bench::{driver_inputs, small_corpus};
use edgecolor_core::oracle;
use edgecolor_core::{color_multigraph, DriverConfig};

fn driver(c: &mut Criterion) {
    let mut group = c.benchmark_group("color_multigraph");
    group.sample_size(10);
    let cfg = DriverConfig::default();
    for (name, g) in driver_inputs() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &g, |b, g| {
            b.iter(|| color_multigraph(g, &cfg).unwrap())
        });
    }
    group.finish();
}

fn corpus_sweep(c: &mut Criterion) {
    let graphs = small_corpus();
    let cfg = DriverConfig::default();
    c.bench_function("corpus_driver", |b| {
        b.iter(|| {
            for g in &graphs {
                color_multigraph(g, &cfg).unwrap();
            }
        })
    });
    c.bench_function("corpus_oracle", |b| {
        b.iter(|| {
            for g in &graphs {
                oracle::report(g).unwrap();
            }
        })
    });
}

criterion_group!(benches, driver, corpus_sweep);
criterion_main!(benches);
