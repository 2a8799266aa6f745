use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gmetrics::counts::Counter;
use gmetrics::motif::Motif;
use gmetrics::sampler;

fn bench_cycle_counts(c: &mut Criterion) {
    let mut group = c.benchmark_group("hom_cycles");
    group.sample_size(10);
    for &n in &[500usize, 1000, 2000] {
        let p = (n as f64).powf(-0.3);
        let rec = sampler::sample_gnp(n, p, 7).unwrap();
        for k in [4usize, 6] {
            let motif = Motif::cycle(k).unwrap();
            group.bench_with_input(
                BenchmarkId::new(format!("C{k}"), n),
                &rec.graph,
                |b, g| {
                    b.iter(|| Counter::new(g).hom(&motif).unwrap());
                },
            );
        }
    }
    group.finish();
}

fn bench_emb_c6(c: &mut Criterion) {
    let mut group = c.benchmark_group("emb_c6");
    group.sample_size(10);
    for &n in &[500usize, 1000] {
        let p = (n as f64).powf(-0.3);
        let rec = sampler::sample_gnp(n, p, 9).unwrap();
        let motif = Motif::cycle(6).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &rec.graph, |b, g| {
            b.iter(|| Counter::new(g).emb(&motif).unwrap());
        });
    }
    group.finish();
}

fn bench_tree_dp(c: &mut Criterion) {
    let mut group = c.benchmark_group("tree_dp");
    group.sample_size(20);
    let n = 2000;
    let p = (n as f64).powf(-0.3);
    let rec = sampler::sample_gnp(n, p, 11).unwrap();
    let tree = Motif::tree_from_parents(&[0, 0, 1, 1, 2, 4]).unwrap();
    group.bench_function("seven_vertex_tree", |b| {
        b.iter(|| Counter::new(&rec.graph).hom(&tree).unwrap());
    });
    group.finish();
}

criterion_group!(benches, bench_cycle_counts, bench_emb_c6, bench_tree_dp);
criterion_main!(benches);
