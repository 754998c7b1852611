//! Sampling statistics checked on exactly simulated circuits.

use rand::Rng;
use rcsim_core::circuit::{gen_random_circuit, Topology};
use rcsim_core::engine::{contract_state, select_broken_edges, BrokenEdgeConfig, EngineSettings};
use rcsim_core::metrics::{
    amplitude_correlation, porter_thomas_check, predicted_topk_xeb, top_k_select, xeb, CandidateSet, Provenance,
    SampleSet,
};
use rcsim_core::network::{circuit_to_network, OutputSpec};
use rcsim_core::rng::{stream_rng, Stream};
use rcsim_core::statevector::{simulate_exact, StateVector};

fn deep(n: usize, rows: usize, cols: usize, seed: u64) -> StateVector {
    let circuit = gen_random_circuit(n, 2 * n, Topology::Grid { rows, cols }, seed).unwrap();
    simulate_exact(&circuit).unwrap()
}

fn exhaustive_scored(state: &StateVector) -> CandidateSet {
    let n = state.n_qubits();
    let mut set = CandidateSet::build(n, (0..n).collect(), 1, 0).unwrap();
    set.groups[0].probabilities = state.probabilities();
    set
}

#[test]
fn uniform_samples_score_zero() {
    let state = deep(12, 3, 4, 1);
    let mut rng = stream_rng(1, Stream::Synthetic);
    let bitstrings = (0..100_000).map(|_| rng.random_range(0..1u64 << 12)).collect();
    let samples = SampleSet { n: 12, bitstrings, provenance: Provenance::Direct, k: None };
    let value = xeb(&samples, &state).unwrap();
    assert!(value.abs() <= 0.05, "XEB {value}");
}

#[test]
fn ideal_samples_score_one() {
    let state = deep(12, 3, 4, 2);
    let cdf: Vec<f64> = state
        .probabilities()
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    let mut rng = stream_rng(2, Stream::Synthetic);
    let bitstrings = (0..100_000)
        .map(|_| {
            let u = rng.random::<f64>() * cdf[cdf.len() - 1];
            cdf.partition_point(|&c| c <= u).min(cdf.len() - 1) as u64
        })
        .collect();
    let samples = SampleSet { n: 12, bitstrings, provenance: Provenance::Direct, k: None };
    let value = xeb(&samples, &state).unwrap();
    assert!((value - 1.0).abs() <= 0.05, "XEB {value}");
}

#[test]
fn full_distribution_xeb_is_second_moment() {
    let state = deep(10, 2, 5, 3);
    let q = state.probabilities();
    let weighted: f64 = q.iter().map(|p| 1024.0 * p * p).sum::<f64>() - 1.0;
    assert!(weighted >= 0.0);
    assert!((weighted - 1.0).abs() < 0.3, "second moment {weighted}");
}

#[test]
fn exact_top_k_amplifies_by_log_ratio() {
    let state = deep(16, 4, 4, 4);
    let set = exhaustive_scored(&state);
    let top = top_k_select(&set, 1 << 6).unwrap();
    let value = xeb(&top, &state).unwrap();
    assert!((value - (1024f64).ln()).abs() <= 0.7, "XEB {value}");
    assert!((predicted_topk_xeb(1.0, 1 << 16, 1 << 6) - 6.931).abs() < 1e-3);
}

#[test]
fn porter_thomas_requires_depth() {
    let fit = porter_thomas_check(&deep(12, 3, 4, 5).probabilities(), 12).unwrap();
    assert!(fit.p_value > 0.01, "{fit:?}");
    assert!((fit.mean_scaled - 1.0).abs() < 1e-9);
    let shallow = gen_random_circuit(12, 1, Topology::Grid { rows: 3, cols: 4 }, 5).unwrap();
    let fit = porter_thomas_check(&simulate_exact(&shallow).unwrap().probabilities(), 12).unwrap();
    assert!(fit.p_value < 0.01, "{fit:?}");
}

#[test]
fn correlation_drops_with_more_broken_edges() {
    let settings = EngineSettings::default();
    let (mut r1, mut r8) = (0.0, 0.0);
    let seeds = 10;
    for seed in 0..seeds {
        let circuit = gen_random_circuit(12, 14, Topology::Grid { rows: 3, cols: 4 }, 40 + seed).unwrap();
        let exact = simulate_exact(&circuit).unwrap();
        let network = circuit_to_network(&circuit, &OutputSpec::all_open(12)).unwrap();
        let labels = select_broken_edges(&network, 8).unwrap();
        let r = |k: usize| {
            let cfg = BrokenEdgeConfig::gray_code(labels[..k].to_vec(), 1, seed).unwrap();
            let approx = contract_state(&circuit, Some(&cfg), &settings).unwrap();
            amplitude_correlation(&approx, exact.amplitudes()).unwrap()
        };
        r1 += r(1);
        r8 += r(8);
    }
    let (r1, r8) = (r1 / seeds as f64, r8 / seeds as f64);
    assert!(r1 > 0.0 && r8 > 0.0 && r8 < r1, "r(K=1) = {r1}, r(K=8) = {r8}");
}
