//! End-to-end experiment: circuit, candidates, approximate amplitudes,
//! post-processing and oracle-backed metrics.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rcsim_core::circuit::{gen_random_circuit, Circuit};
use rcsim_core::engine::{
    contract_candidates, contract_state, select_broken_edges, state_fidelity, write_timing_csv, BatchMode,
    SubtaskTiming,
};
use rcsim_core::metrics::{
    amplitude_correlation, amplitude_correlation_imag, direct_sample, porter_thomas_check, predicted_topk_xeb,
    top_k_select, xeb, ReportInputs, MIN_PT_POINTS,
};
use rcsim_core::network::{circuit_to_network, OutputSpec};
use rcsim_core::path::{estimate_complexity, find_contraction_path_with_broken, ComplexityReport};
use rcsim_core::statevector::simulate_exact_with_cap;
use rcsim_core::{BrokenEdgeConfig, CandidateSet, ContractionPlan, Error, MetricsReport, Precision, Result, SampleSet};
use serde::Serialize;

use crate::config::ExperimentConfig;

/// In-memory results of one experiment.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub circuit: Circuit,
    pub plan: ContractionPlan,
    pub broken: Option<BrokenEdgeConfig>,
    pub mode: BatchMode,
    pub top_k: SampleSet,
    pub direct: SampleSet,
    pub report: MetricsReport,
    pub timings: Vec<SubtaskTiming>,
}

fn reject_f32(cfg: &ExperimentConfig, what: &str) -> Result<()> {
    if cfg.execution.precision == Precision::F32 {
        return Err(Error::Config(format!(
            "{what} requires f64 precision; f32 is accepted only by benchmarks and the scaling command"
        )));
    }
    Ok(())
}

pub fn build_circuit(cfg: &ExperimentConfig) -> Result<Circuit> {
    gen_random_circuit(cfg.circuit.n_qubits, cfg.circuit.layers, cfg.topology()?, cfg.circuit_seed())
}

/// The first K edges of the selection, with m Gray-code configurations.
pub fn broken_config(cfg: &ExperimentConfig, circuit: &Circuit) -> Result<Option<BrokenEdgeConfig>> {
    let k = cfg.approximation.broken_edges;
    if k == 0 {
        return Ok(None);
    }
    let network = circuit_to_network(circuit, &OutputSpec::all_open(circuit.n_qubits))?;
    let labels = select_broken_edges(&network, k)?;
    BrokenEdgeConfig::gray_code(labels, cfg.approximation.m, cfg.seed).map(Some)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    cfg.validate()?;
    reject_f32(cfg, "run")?;
    let n = cfg.circuit.n_qubits;
    let cap = cfg.execution.oracle_max_qubits;
    if n > cap {
        return Err(Error::Capacity {
            what: format!("{n}-qubit run (metrics need the exact simulator; use `plan` for cost estimates)"),
            cap,
        });
    }
    let circuit = build_circuit(cfg)?;
    let candidates = CandidateSet::build(n, cfg.open_qubits(), cfg.candidates.groups, cfg.seed)?;
    let broken = broken_config(cfg, &circuit)?;
    let amps = contract_candidates(&circuit, &candidates, broken.as_ref(), &cfg.settings())?;
    let scored = candidates.with_amplitudes(&amps.batches)?;
    let k = cfg.postprocess.k;
    let top_k = top_k_select(&scored, k)?;
    let direct = direct_sample(&scored, cfg.seed)?;

    let oracle = simulate_exact_with_cap(&circuit, cap)?;
    let approx: Vec<Complex64> = amps.batches.iter().flat_map(|b| b.amplitudes.iter().copied()).collect();
    let exact: Vec<Complex64> = (0..scored.m())
        .flat_map(|g| (0..1usize << scored.l()).map(move |i| (g, i)))
        .map(|(g, i)| oracle.amplitude(scored.bitstring(g, i)))
        .collect();
    let fidelity = state_fidelity(&approx, &exact)?.value;
    let pt = if (1usize << n) >= MIN_PT_POINTS { Some(porter_thomas_check(&oracle.probabilities(), n)?) } else { None };
    let xeb_top = xeb(&top_k, &oracle)?;
    let size = scored.size();
    let report = MetricsReport {
        xeb: xeb_top,
        direct_xeb: xeb(&direct, &oracle)?,
        fidelity,
        predicted_fidelity: broken.as_ref().map_or(1.0, BrokenEdgeConfig::predicted_fidelity),
        predicted_xeb: predicted_topk_xeb(fidelity, size, k),
        pearson_r: amplitude_correlation(&approx, &exact).ok(),
        pearson_r_imag: amplitude_correlation_imag(&approx, &exact).ok(),
        pt_ks_statistic: pt.map(|p| p.ks_statistic),
        pt_ks_p_value: pt.map(|p| p.p_value),
        pt_mean_scaled: pt.map(|p| p.mean_scaled),
        xeb_over_fidelity: (fidelity > 0.0).then(|| xeb_top / fidelity),
        inputs: ReportInputs {
            n,
            l: scored.l(),
            m_groups: scored.m(),
            k_broken: cfg.approximation.broken_edges,
            m: cfg.approximation.m as usize,
            k,
            candidate_size: size,
            seed: cfg.seed,
        },
    };
    Ok(RunArtifacts { circuit, plan: amps.plan, broken, mode: amps.mode, top_k, direct, report, timings: amps.timings })
}

fn write_with_newline(path: &Path, text: &str) -> Result<()> {
    fs::write(path, format!("{text}\n"))?;
    Ok(())
}

/// Runs the experiment and writes circuit.json, plan.json, samples.txt,
/// metrics.json and timings.csv into the output directory.
pub fn cmd_run(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    let run = run_experiment(cfg)?;
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir)?;
    write_with_newline(&dir.join("circuit.json"), &run.circuit.to_json()?)?;
    write_with_newline(&dir.join("plan.json"), &run.plan.to_json()?)?;
    let r = &run.report.inputs;
    let header = vec![
        format!("seed: {}", r.seed),
        format!("l: {}, M: {}, candidate_size: {}", r.l, r.m_groups, r.candidate_size),
        format!("K: {}, m: {}", r.k_broken, r.m),
    ];
    let mut samples = Vec::new();
    run.top_k.write_text(&mut samples, &header)?;
    fs::write(dir.join("samples.txt"), samples)?;
    write_with_newline(&dir.join("metrics.json"), &serde_json::to_string_pretty(&run.report)?)?;
    let mut timings = Vec::new();
    write_timing_csv(&mut timings, &run.timings)?;
    fs::write(dir.join("timings.csv"), timings)?;
    Ok(run)
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanReport {
    pub n_qubits: usize,
    pub exceeds_exact_cap: bool,
    pub batch_mode: BatchMode,
    /// Contractions needed: one per distinct group in per-group mode.
    pub contractions: usize,
    pub subtasks_per_contraction: u64,
    pub complexity: ComplexityReport,
    pub plan: serde_json::Value,
}

/// Plans the configured workload without executing it.
pub fn cmd_plan(cfg: &ExperimentConfig) -> Result<PlanReport> {
    cfg.validate()?;
    let circuit = build_circuit(cfg)?;
    let n = circuit.n_qubits;
    let settings = cfg.settings();
    let batched = n <= settings.batch_max_qubits && (16u64 << n) <= settings.memory_budget_bytes;
    let (output, contractions, mode) = if batched {
        (OutputSpec::all_open(n), 1, BatchMode::AllOpen)
    } else {
        let candidates = CandidateSet::build(n, cfg.open_qubits(), cfg.candidates.groups, cfg.seed)?;
        let distinct: std::collections::BTreeSet<_> = candidates.groups.iter().map(|g| g.fixed).collect();
        (OutputSpec::fixed(cfg.open_qubits(), candidates.groups[0].fixed), distinct.len(), BatchMode::PerGroup)
    };
    let network = circuit_to_network(&circuit, &output)?;
    let broken = broken_config(cfg, &circuit)?;
    let labels = broken.as_ref().map(|b| b.broken_labels.clone()).unwrap_or_default();
    let plan = find_contraction_path_with_broken(&network, &labels, settings.memory_budget_bytes, settings.effort)?;
    let m = broken.as_ref().map_or(1, |b| b.m() as u64);
    let complexity = estimate_complexity(&plan.subtask_cost(), m * contractions as u64);
    if !cfg.output.dir.as_os_str().is_empty() {
        fs::create_dir_all(&cfg.output.dir)?;
        write_with_newline(&cfg.output.dir.join("plan.json"), &plan.to_json()?)?;
    }
    Ok(PlanReport {
        n_qubits: n,
        exceeds_exact_cap: circuit.exceeds_exact_cap(cfg.execution.oracle_max_qubits),
        batch_mode: mode,
        contractions,
        subtasks_per_contraction: m * plan.totals.n_slices,
        complexity,
        plan: serde_json::from_str(&plan.to_json()?)?,
    })
}

pub const ORACLE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub n_qubits: usize,
    pub amplitudes_checked: usize,
    pub max_relative_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Exact contraction of the configured circuit against the dense simulator.
pub fn cmd_oracle_check(cfg: &ExperimentConfig) -> Result<OracleReport> {
    cfg.validate()?;
    reject_f32(cfg, "oracle-check")?;
    let circuit = build_circuit(cfg)?;
    let oracle = simulate_exact_with_cap(&circuit, cfg.execution.oracle_max_qubits)?;
    let state = contract_state(&circuit, None, &cfg.settings())?;
    let max_relative_error =
        state.iter().zip(oracle.amplitudes()).map(|(a, e)| (a - e).norm() / e.norm()).fold(0.0, f64::max);
    Ok(OracleReport {
        n_qubits: circuit.n_qubits,
        amplitudes_checked: state.len(),
        max_relative_error,
        tolerance: ORACLE_TOLERANCE,
        passed: max_relative_error <= ORACLE_TOLERANCE,
    })
}
