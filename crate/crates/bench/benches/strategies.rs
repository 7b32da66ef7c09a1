use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use expsearch::ratio::rat;
use expsearch::{block_strategy, bounds, bridge_strategy, decompose, fixtures, oracle_value, tree_game, OracleConfig};

fn decomposition(c: &mut Criterion) {
    let mut g = c.benchmark_group("decompose");
    for name in ["qbar", "fig4", "star:100"] {
        let net = fixtures::by_name(name).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(name), &net, |b, net| b.iter(|| decompose(black_box(net))));
    }
    g.finish();
}

fn strategies(c: &mut Criterion) {
    let net = fixtures::fig4();
    let dec = decompose(&net);
    c.bench_function("beta/fig4", |b| b.iter(|| block_strategy::build_beta(black_box(&net), &dec).unwrap()));
    c.bench_function("gamma/fig4", |b| b.iter(|| bridge_strategy::build_gamma(black_box(&net), &dec).unwrap()));
    c.bench_function("bounds/fig4", |b| b.iter(|| bounds::report(black_box(&net), &dec).unwrap()));

    let star = fixtures::star(20).unwrap();
    c.bench_function("tree_solve/star20", |b| b.iter(|| tree_game::solve_tree(black_box(&star)).unwrap()));
}

fn oracle(c: &mut Criterion) {
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    let qbar = fixtures::qbar();
    g.bench_function("qbar/whole_arcs", |b| b.iter(|| oracle_value(black_box(&qbar), &OracleConfig::default()).unwrap()));
    let cfg = OracleConfig { h: Some(rat(1, 2)), ..OracleConfig::default() };
    g.bench_function("qbar/h_half", |b| b.iter(|| oracle_value(black_box(&qbar), &cfg).unwrap()));
    g.finish();
}

criterion_group!(benches, decomposition, strategies, oracle);
criterion_main!(benches);
