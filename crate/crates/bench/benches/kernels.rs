use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rcsim_core::circuit::{gen_random_circuit, Topology};
use rcsim_core::engine::{run_parallel, select_broken_edges, BrokenEdgeConfig, ExecOptions};
use rcsim_core::metrics::{top_k_select, CandidateSet};
use rcsim_core::network::{circuit_to_network, OutputSpec};
use rcsim_core::path::{find_contraction_path, find_contraction_path_with_broken, SearchEffort};
use rcsim_core::statevector::simulate_exact;
use rcsim_core::Precision;

const BUDGET: u64 = 80 << 20;

fn grid12(seed: u64) -> rcsim_core::Circuit {
    gen_random_circuit(12, 14, Topology::Grid { rows: 3, cols: 4 }, seed).unwrap()
}

fn statevector(c: &mut Criterion) {
    let mut group = c.benchmark_group("statevector");
    for n in [12usize, 16] {
        let circuit = gen_random_circuit(n, 14, Topology::Grid { rows: n / 4, cols: 4 }, 1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &circuit, |b, circuit| {
            b.iter(|| simulate_exact(black_box(circuit)).unwrap())
        });
    }
    group.finish();
}

fn path_search(c: &mut Criterion) {
    let network = circuit_to_network(&grid12(2), &OutputSpec::all_open(12)).unwrap();
    c.bench_function("path_search/grid12", |b| {
        b.iter(|| find_contraction_path(black_box(&network), BUDGET, SearchEffort::default()).unwrap())
    });
}

fn contraction(c: &mut Criterion) {
    let network = circuit_to_network(&grid12(3), &OutputSpec::all_open(12)).unwrap();
    let labels = select_broken_edges(&network, 4).unwrap();
    let plan = find_contraction_path_with_broken(&network, &labels, BUDGET, SearchEffort::default()).unwrap();
    let cfg = BrokenEdgeConfig::gray_code(labels, 4, 3).unwrap();
    let mut group = c.benchmark_group("contraction");
    for precision in [Precision::F64, Precision::F32] {
        let opts = ExecOptions { workers: 1, precision };
        group.bench_with_input(BenchmarkId::new("grid12_K4_m4", format!("{precision:?}")), &opts, |b, opts| {
            b.iter(|| run_parallel(&network, &plan, Some(&cfg), opts).unwrap())
        });
    }
    group.finish();
}

fn top_k(c: &mut Criterion) {
    let mut set = CandidateSet::build(24, (0..8).collect(), 1 << 12, 5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for group in &mut set.groups {
        group.probabilities = (0..256).map(|_| rng.random::<f64>()).collect();
    }
    let mut group = c.benchmark_group("top_k");
    for k in [1usize << 8, 1 << 16] {
        group.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, &k| b.iter(|| top_k_select(&set, k).unwrap()));
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = statevector, path_search, contraction, top_k
}
criterion_main!(benches);
