use criterion::{criterion_group, criterion_main, Criterion};
use sequil_bench::{game, logit_sessions};
use sequil_core::models::ModelKind;
use sequil_core::stats::{fit_scalar_model, FitOptions};

fn fits(c: &mut Criterion) {
    let g = game("g2");
    let data = logit_sessions(&g, 0.05, 1);
    let opts = FitOptions::default();
    let mut group = c.benchmark_group("fit");
    group.sample_size(10);
    for model in [ModelKind::Logit, ModelKind::LevelK, ModelKind::EpsProper, ModelKind::S] {
        group.bench_function(model.name(), |b| b.iter(|| fit_scalar_model(&[&g], &data, model, &opts).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, fits);
criterion_main!(benches);
