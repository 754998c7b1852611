//! Plan execution: exact or broken-edge contraction, split into independent
//! subtasks (one per broken-edge configuration and slice assignment) and
//! reduced in a fixed order.

mod kernel;
mod parallel;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use kernel::{contract_pair, DenseTensor};
pub use parallel::{run_parallel, ParallelOutcome};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::metrics::CandidateSet;
use crate::network::{circuit_to_network, EdgeRole, Label, OutputSpec, TensorNetwork};
use crate::path::{self, find_contraction_path_with_broken, ContractionPlan, SearchEffort};
use crate::rng::{stream_rng, Stream};
use crate::Bitstring;

/// Broken edges and the subset of their assignments that is summed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BrokenEdgeConfig {
    pub broken_labels: Vec<Label>,
    /// Bit `j` of each entry is the value of `broken_labels[j]`.
    pub configurations: Vec<u64>,
}

impl BrokenEdgeConfig {
    pub fn new(broken_labels: Vec<Label>, configurations: Vec<u64>) -> Result<Self> {
        let k = broken_labels.len();
        if k > 62 {
            return Err(Error::Input(format!("{k} broken edges is too many")));
        }
        let distinct: BTreeSet<_> = broken_labels.iter().collect();
        if distinct.len() != k {
            return Err(Error::Input("broken edge listed twice".into()));
        }
        let space = 1u64 << k;
        if configurations.is_empty() || configurations.len() as u64 > space {
            return Err(Error::Input(format!(
                "need between 1 and {space} configurations, got {}",
                configurations.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for &c in &configurations {
            if c >= space {
                return Err(Error::Input(format!("configuration {c:#b} has bits beyond {k} edges")));
            }
            if !seen.insert(c) {
                return Err(Error::Input(format!("duplicate configuration {c:#b}")));
            }
        }
        Ok(Self { broken_labels, configurations })
    }

    /// Every assignment, in ascending order: the complete path sum.
    pub fn complete(broken_labels: Vec<Label>) -> Result<Self> {
        let space = 1u64 << broken_labels.len();
        Self::new(broken_labels, (0..space).collect())
    }

    /// `m` consecutive Gray-code assignments from a seeded random start.
    pub fn gray_code(broken_labels: Vec<Label>, m: u64, seed: u64) -> Result<Self> {
        let k = broken_labels.len();
        let space = 1u64 << k.min(62);
        if m == 0 || m > space {
            return Err(Error::Input(format!("m = {m} outside 1..={space}")));
        }
        let start = stream_rng(seed, Stream::BrokenConfigs).random_range(0..space);
        let configurations = (0..m)
            .map(|i| {
                let g = (start + i) % space;
                g ^ (g >> 1)
            })
            .collect();
        Self::new(broken_labels, configurations)
    }

    pub fn k(&self) -> usize {
        self.broken_labels.len()
    }

    pub fn m(&self) -> usize {
        self.configurations.len()
    }

    /// m · 2^-K.
    pub fn predicted_fidelity(&self) -> f64 {
        self.m() as f64 * (-(self.k() as f64)).exp2()
    }

    pub fn config_bits(&self, index: usize) -> String {
        let c = self.configurations[index];
        (0..self.k()).map(|j| if c >> j & 1 == 1 { '1' } else { '0' }).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    F64,
    /// Benchmarks only; oracle comparisons always run in double precision.
    F32,
}

impl std::str::FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f64" => Ok(Precision::F64),
            "f32" => Ok(Precision::F32),
            other => Err(Error::Config(format!("unknown precision {other:?} (expected f64 or f32)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecOptions {
    pub workers: usize,
    pub precision: Precision,
}

impl Default for ExecOptions {
    fn default() -> Self {
        Self { workers: 1, precision: Precision::F64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubtaskTiming {
    pub subtask_id: usize,
    pub config_bits: String,
    pub wall_ms: f64,
    pub flops: f64,
}

/// Counters gathered while executing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExecStats {
    pub complex_macs: u64,
    /// Largest intermediate produced, at 16 bytes per element.
    pub peak_intermediate_bytes: u64,
    pub subtasks: usize,
}

impl ExecStats {
    pub fn flops(&self) -> f64 {
        self.complex_macs as f64 * path::FLOPS_PER_CMAC
    }

    fn merge(&mut self, other: &ExecStats) {
        self.complex_macs += other.complex_macs;
        self.peak_intermediate_bytes = self.peak_intermediate_bytes.max(other.peak_intermediate_bytes);
        self.subtasks += other.subtasks;
    }
}

/// Checks that `plan` was built for `network` and `config` matches its broken set,
/// then resolves the configuration list to run.
fn resolve_config(
    network: &TensorNetwork,
    plan: &ContractionPlan,
    config: Option<&BrokenEdgeConfig>,
) -> Result<BrokenEdgeConfig> {
    if plan.n_leaves != network.tensors.len() || plan.open_indices != network.open_indices {
        return Err(Error::Input("plan was built for a different network".into()));
    }
    let labels = network.labels();
    match config {
        None => BrokenEdgeConfig::complete(plan.broken.clone()),
        Some(cfg) => {
            if let Some(l) = cfg.broken_labels.iter().find(|l| !labels.contains(l)) {
                return Err(Error::Input(format!("broken edge {l} is not in the network")));
            }
            let want: BTreeSet<_> = plan.broken.iter().collect();
            let got: BTreeSet<_> = cfg.broken_labels.iter().collect();
            if want != got {
                return Err(Error::Input("configuration does not match the plan's broken edges".into()));
            }
            Ok(cfg.clone())
        }
    }
}

/// Contracts sequentially with one worker. `None` sums every configuration
/// of the plan's broken edges, which is the exact result.
pub fn contract(
    network: &TensorNetwork,
    plan: &ContractionPlan,
    config: Option<&BrokenEdgeConfig>,
) -> Result<Vec<Complex64>> {
    Ok(run_parallel(network, plan, config, &ExecOptions::default())?.amplitudes)
}

/// Squared normalised overlap |<e|a>|² / (<e|e><a|a>).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fidelity {
    pub value: f64,
    /// Set when the approximation has zero norm; `value` is then 0.
    pub zero_norm: bool,
}

pub fn state_fidelity(approx: &[Complex64], exact: &[Complex64]) -> Result<Fidelity> {
    if approx.len() != exact.len() {
        return Err(Error::Input(format!("{} vs {} amplitudes", approx.len(), exact.len())));
    }
    let norm_e: f64 = exact.iter().map(|z| z.norm_sqr()).sum();
    if norm_e == 0.0 {
        return Err(Error::Input("exact amplitudes have zero norm".into()));
    }
    let norm_a: f64 = approx.iter().map(|z| z.norm_sqr()).sum();
    if norm_a == 0.0 {
        log::warn!("approximate amplitudes have zero norm; fidelity defined as 0");
        return Ok(Fidelity { value: 0.0, zero_norm: true });
    }
    let overlap: Complex64 = exact.iter().zip(approx).map(|(e, a)| e.conj() * a).sum();
    Ok(Fidelity { value: (overlap.norm_sqr() / (norm_e * norm_a)).min(1.0), zero_norm: false })
}

/// Chooses `k` edges to break.
///
/// Candidates are wire segments in the middle third of the circuit, at most
/// one per qubit; each round takes the one whose removal gives the cheapest
/// greedy contraction, ties by label. Falls back to all bonds when the
/// middle band is too small.
pub fn select_broken_edges(network: &TensorNetwork, k: usize) -> Result<Vec<Label>> {
    if k == 0 {
        return Ok(Vec::new());
    }
    let bonds: Vec<Label> =
        network.bond_labels().into_iter().filter(|l| !network.fixed_indices.contains_key(l)).collect();
    let info = |l: &Label| network.edge_info.get(l);
    let layers = network.n_layers;
    let in_band = |l: &Label| match info(l) {
        Some(e) if layers > 0 => {
            let t = e.after_layer.unwrap_or(0);
            e.role == EdgeRole::Internal && 3 * t >= layers && 3 * t < 2 * layers
        }
        _ => true,
    };
    let mut pool: Vec<Label> = bonds.iter().copied().filter(in_band).collect();
    let distinct_qubits = |ls: &[Label]| ls.iter().filter_map(info).map(|e| e.qubit).collect::<BTreeSet<_>>().len();
    let qubit_limited = !network.edge_info.is_empty();
    if (qubit_limited && distinct_qubits(&pool) < k) || pool.len() < k {
        pool = bonds.clone();
    }
    if pool.len() < k {
        return Err(Error::Config(format!("cannot break {k} edges: only {} bonds", pool.len())));
    }
    let one_per_qubit = qubit_limited && distinct_qubits(&pool) >= k;

    let mut chosen: Vec<Label> = Vec::with_capacity(k);
    let mut removed: BTreeSet<Label> = network.fixed_indices.keys().copied().collect();
    let mut used_qubits = BTreeSet::new();
    for _ in 0..k {
        let mut best: Option<(f64, Label)> = None;
        for &l in &pool {
            if removed.contains(&l) {
                continue;
            }
            if one_per_qubit && info(&l).is_some_and(|e| used_qubits.contains(&e.qubit)) {
                continue;
            }
            removed.insert(l);
            let cost = path::greedy_flops(network, &removed);
            removed.remove(&l);
            if best.is_none_or(|(c, _)| cost < c) {
                best = Some((cost, l));
            }
        }
        let (_, l) = best.ok_or_else(|| Error::Config(format!("ran out of edges to break at {}", chosen.len())))?;
        removed.insert(l);
        if let Some(e) = info(&l) {
            used_qubits.insert(e.qubit);
        }
        chosen.push(l);
    }
    Ok(chosen)
}

/// Reorders a result laid out over `output_qubits` (first most significant)
/// into a dense vector indexed by packed bitstring.
pub fn to_bitstring_order(result: &[Complex64], output_qubits: &[usize], n: usize) -> Vec<Complex64> {
    let r = output_qubits.len();
    assert_eq!(result.len(), 1 << r);
    let mut dense = vec![Complex64::new(0.0, 0.0); 1 << n];
    for (t, &v) in result.iter().enumerate() {
        let bits = output_qubits.iter().enumerate().fold(0usize, |acc, (p, &q)| acc | ((t >> (r - 1 - p)) & 1) << q);
        dense[bits] = v;
    }
    dense
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineSettings {
    pub memory_budget_bytes: u64,
    pub effort: SearchEffort,
    pub exec: ExecOptions,
    /// Above this many qubits groups are contracted one by one instead of batched.
    pub batch_max_qubits: usize,
}

impl Default for EngineSettings {
    fn default() -> Self {
        Self {
            memory_budget_bytes: 80 << 20,
            effort: SearchEffort::default(),
            exec: ExecOptions::default(),
            batch_max_qubits: 22,
        }
    }
}

/// Amplitudes of one candidate group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmplitudeBatch {
    pub group_id: usize,
    /// Shared bits on the non-open qubits (open positions zero).
    pub fixed_substring: Bitstring,
    /// `amplitudes[i]` belongs to the open assignment with bit `j` of `i`
    /// on `open_qubits[j]`.
    pub amplitudes: Vec<Complex64>,
}

impl AmplitudeBatch {
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BatchMode {
    /// One contraction with every output open.
    AllOpen,
    /// One contraction per distinct fixed substring.
    PerGroup,
}

#[derive(Debug, Clone)]
pub struct CandidateAmplitudes {
    pub batches: Vec<AmplitudeBatch>,
    pub plan: ContractionPlan,
    pub timings: Vec<SubtaskTiming>,
    pub stats: ExecStats,
    pub mode: BatchMode,
}

/// Scatters open assignment `i` onto `open_qubits`.
pub fn scatter_open(i: usize, open_qubits: &[usize]) -> Bitstring {
    open_qubits.iter().enumerate().fold(0, |acc, (j, &q)| acc | ((i >> j) as u64 & 1) << q)
}

/// Approximate (or, with `config = None`, exact) amplitudes of every candidate.
pub fn contract_candidates(
    circuit: &Circuit,
    candidates: &CandidateSet,
    config: Option<&BrokenEdgeConfig>,
    settings: &EngineSettings,
) -> Result<CandidateAmplitudes> {
    let n = circuit.n_qubits;
    if candidates.n != n {
        return Err(Error::Input(format!("candidates are {}-bit, circuit has {n} qubits", candidates.n)));
    }
    let broken: Vec<Label> = config.map(|c| c.broken_labels.clone()).unwrap_or_default();
    let open = &candidates.open_qubits;
    let batched = n <= settings.batch_max_qubits && (16u64 << n) <= settings.memory_budget_bytes;
    if batched {
        let network = circuit_to_network(circuit, &OutputSpec::all_open(n))?;
        let plan = find_contraction_path_with_broken(&network, &broken, settings.memory_budget_bytes, settings.effort)?;
        let outcome = run_parallel(&network, &plan, config, &settings.exec)?;
        let dense = to_bitstring_order(&outcome.amplitudes, &network.output_qubits, n);
        let batches = candidates
            .groups
            .iter()
            .enumerate()
            .map(|(g, group)| AmplitudeBatch {
                group_id: g,
                fixed_substring: group.fixed,
                amplitudes: (0..1usize << open.len())
                    .map(|i| dense[(group.fixed | scatter_open(i, open)) as usize])
                    .collect(),
            })
            .collect();
        return Ok(CandidateAmplitudes {
            batches,
            plan,
            timings: outcome.timings,
            stats: outcome.stats,
            mode: BatchMode::AllOpen,
        });
    }

    let mut cache: BTreeMap<Bitstring, Vec<Complex64>> = BTreeMap::new();
    let mut plan: Option<ContractionPlan> = None;
    let mut timings = Vec::new();
    let mut stats = ExecStats::default();
    for group in &candidates.groups {
        if cache.contains_key(&group.fixed) {
            continue;
        }
        let network = circuit_to_network(circuit, &OutputSpec::fixed(open.clone(), group.fixed))?;
        if plan.is_none() {
            plan = Some(find_contraction_path_with_broken(
                &network,
                &broken,
                settings.memory_budget_bytes,
                settings.effort,
            )?);
        }
        let outcome = run_parallel(&network, plan.as_ref().unwrap(), config, &settings.exec)?;
        let l = open.len();
        // Result positions follow `open` with the first most significant.
        let amps = (0..1usize << l)
            .map(|i| {
                let t = (0..l).fold(0usize, |acc, j| acc | ((i >> j) & 1) << (l - 1 - j));
                outcome.amplitudes[t]
            })
            .collect();
        let offset = timings.len();
        timings.extend(outcome.timings.into_iter().map(|mut t| {
            t.subtask_id += offset;
            t
        }));
        stats.merge(&outcome.stats);
        cache.insert(group.fixed, amps);
    }
    let batches = candidates
        .groups
        .iter()
        .enumerate()
        .map(|(g, group)| AmplitudeBatch {
            group_id: g,
            fixed_substring: group.fixed,
            amplitudes: cache[&group.fixed].clone(),
        })
        .collect();
    let plan = plan.ok_or_else(|| Error::Input("candidate set has no groups".into()))?;
    Ok(CandidateAmplitudes { batches, plan, timings, stats, mode: BatchMode::PerGroup })
}

/// Full approximate output state, indexed by packed bitstring.
pub fn contract_state(
    circuit: &Circuit,
    config: Option<&BrokenEdgeConfig>,
    settings: &EngineSettings,
) -> Result<Vec<Complex64>> {
    let network = circuit_to_network(circuit, &OutputSpec::all_open(circuit.n_qubits))?;
    let broken: Vec<Label> = config.map(|c| c.broken_labels.clone()).unwrap_or_default();
    let plan = find_contraction_path_with_broken(&network, &broken, settings.memory_budget_bytes, settings.effort)?;
    let outcome = run_parallel(&network, &plan, config, &settings.exec)?;
    Ok(to_bitstring_order(&outcome.amplitudes, &network.output_qubits, circuit.n_qubits))
}

/// CSV with columns subtask_id, config_bits, wall_ms, flops.
pub fn write_timing_csv<W: Write>(mut w: W, timings: &[SubtaskTiming]) -> Result<()> {
    writeln!(w, "subtask_id,config_bits,wall_ms,flops")?;
    for t in timings {
        writeln!(w, "{},{},{:.6},{}", t.subtask_id, t.config_bits, t.wall_ms, t.flops)?;
    }
    Ok(())
}
