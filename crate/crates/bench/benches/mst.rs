use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mstphase::ingest::Window;
use mstphase::{
    gen_factor_market, kruskal_mst, log_returns, pearson_matrix, prim_mst, to_distance,
    DistanceMatrix, FactorMarketSpec,
};

fn distances(n: usize) -> DistanceMatrix {
    let spec = FactorMarketSpec::with_uniform_betas(n, 300, (0.5, 1.5), 0.02, 0.01, 17);
    let panel = gen_factor_market(&spec).unwrap();
    let tickers = panel.tickers().to_vec();
    let returns = log_returns(&panel, &tickers, Window::new(0, 300), true).unwrap();
    to_distance(&pearson_matrix(&returns).unwrap())
}

fn bench_mst(c: &mut Criterion) {
    let mut group = c.benchmark_group("mst");
    for n in [50, 200, 500] {
        let d = distances(n);
        group.bench_with_input(BenchmarkId::new("prim", n), &d, |b, d| b.iter(|| prim_mst(d)));
        group.bench_with_input(BenchmarkId::new("kruskal", n), &d, |b, d| b.iter(|| kruskal_mst(d)));
    }
    group.finish();
}

criterion_group!(benches, bench_mst);
criterion_main!(benches);
