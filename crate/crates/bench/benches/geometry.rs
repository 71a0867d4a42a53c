use criterion::{criterion_group, criterion_main, Criterion};
use sequil_bench::game;
use sequil_core::geometry::{AnalysisMode, SetAnalyzer};

fn choice_sets(c: &mut Criterion) {
    let g3 = game("g3");
    let chain = game("chain_store");
    let mut group = c.benchmark_group("choice_sets");
    group.sample_size(10);
    for m in [60, 200] {
        group.bench_function(format!("g3_m{m}"), |b| {
            let a = SetAnalyzer::new(&g3, AnalysisMode::Symmetric, m).unwrap();
            b.iter(|| a.choice_sets(0.5).unwrap())
        });
    }
    group.bench_function("chain_store_product_m200", |b| {
        let a = SetAnalyzer::new(&chain, AnalysisMode::Product, 200).unwrap();
        b.iter(|| a.choice_sets(1.0 / 3.0).unwrap())
    });
    group.bench_function("g3_analyzer_setup_m200", |b| {
        b.iter(|| SetAnalyzer::new(&g3, AnalysisMode::Symmetric, 200).unwrap())
    });
    group.finish();
}

criterion_group!(benches, choice_sets);
criterion_main!(benches);
