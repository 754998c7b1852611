//! Desk-scale datasets for the fidelity, amplification, scaling and
//! Porter-Thomas figures, emitted as CSV for external plotting.

use std::fmt::Write as _;
use std::str::FromStr;

use rcsim_core::circuit::{gen_random_circuit, Topology};
use rcsim_core::engine::{contract_state, select_broken_edges, state_fidelity, EngineSettings};
use rcsim_core::metrics::{top_k_select, xeb, CandidateSet};
use rcsim_core::network::{circuit_to_network, OutputSpec};
use rcsim_core::statevector::simulate_exact;
use rcsim_core::{BrokenEdgeConfig, Error, Result};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::pipeline::run_experiment;
use crate::scaling::{fit_scaling, measure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Figure {
    FidelityVsK,
    AmplificationVsK,
    Scaling,
    PtHistogram,
}

impl Figure {
    pub const ALL: [Figure; 4] = [Figure::FidelityVsK, Figure::AmplificationVsK, Figure::Scaling, Figure::PtHistogram];

    pub fn name(self) -> &'static str {
        match self {
            Figure::FidelityVsK => "fidelity_vs_K",
            Figure::AmplificationVsK => "amplification_vs_k",
            Figure::Scaling => "scaling",
            Figure::PtHistogram => "pt_histogram",
        }
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL.into_iter().find(|f| f.name().eq_ignore_ascii_case(s)).ok_or_else(|| {
            Error::Config(format!(
                "unknown figure {s:?}; expected one of fidelity_vs_K, amplification_vs_k, scaling, pt_histogram"
            ))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub series: String,
    pub x: f64,
    pub y: f64,
    pub y_predicted: f64,
    pub y_err: f64,
}

/// One figure's curves; the header names the unit of every column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    pub figure: Figure,
    pub x_column: &'static str,
    pub y_column: &'static str,
    pub points: Vec<CurvePoint>,
}

impl Dataset {
    pub fn to_csv(&self) -> String {
        let y = self.y_column;
        let mut out = format!("series,{},{y},{y}_predicted,{y}_err\n", self.x_column);
        for p in &self.points {
            writeln!(out, "{},{},{:.10e},{:.10e},{:.10e}", p.series, p.x, p.y, p.y_predicted, p.y_err).unwrap();
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct ReproduceParams {
    pub seeds: usize,
    pub base_seed: u64,
    pub worker_counts: Vec<usize>,
    /// Workload configuration for the scaling figure.
    pub scaling_config: ExperimentConfig,
}

impl Default for ReproduceParams {
    fn default() -> Self {
        let mut scaling_config = ExperimentConfig::default();
        scaling_config.approximation.broken_edges = 6;
        scaling_config.approximation.m = 64;
        Self { seeds: 20, base_seed: 1000, worker_counts: vec![1, 2, 4, 8], scaling_config }
    }
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn grid_circuit(n: usize, layers: usize, seed: u64) -> Result<rcsim_core::Circuit> {
    let topology = match n {
        12 => Topology::Grid { rows: 3, cols: 4 },
        14 => Topology::Grid { rows: 2, cols: 7 },
        16 => Topology::Grid { rows: 4, cols: 4 },
        _ => Topology::Line,
    };
    gen_random_circuit(n, layers, topology, seed)
}

/// Full-state fidelity of partial path sums, indexed `[pair][seed]`.
///
/// Each circuit gets one selection of edges; a `(k, m)` pair breaks the
/// first `k` of them and sums `m` Gray-code configurations.
pub fn broken_edge_fidelities(n: usize, layers: usize, pairs: &[(usize, u64)], seeds: &[u64]) -> Result<Vec<Vec<f64>>> {
    let settings = EngineSettings::default();
    let k_max = pairs.iter().map(|p| p.0).max().unwrap_or(0);
    let mut out = vec![Vec::with_capacity(seeds.len()); pairs.len()];
    for &seed in seeds {
        let circuit = grid_circuit(n, layers, seed)?;
        let exact = simulate_exact(&circuit)?;
        let network = circuit_to_network(&circuit, &OutputSpec::all_open(n))?;
        let labels = select_broken_edges(&network, k_max)?;
        for (row, &(k, m)) in out.iter_mut().zip(pairs) {
            let cfg = BrokenEdgeConfig::gray_code(labels[..k].to_vec(), m, seed)?;
            let approx = contract_state(&circuit, Some(&cfg), &settings)?;
            row.push(state_fidelity(&approx, exact.amplitudes())?.value);
        }
    }
    Ok(out)
}

/// Predicted 2^-K, measured fidelity and direct-sampling XEB for K = 1..=6
/// on 12-qubit, 14-layer grid circuits.
pub fn fidelity_vs_k(params: &ReproduceParams) -> Result<Dataset> {
    let mut points = Vec::new();
    for k in 1..=6usize {
        let predicted = (-(k as f64)).exp2();
        let mut fidelity = Vec::new();
        let mut direct = Vec::new();
        for s in 0..params.seeds as u64 {
            let mut cfg = ExperimentConfig { seed: params.base_seed + s, ..Default::default() };
            cfg.approximation.broken_edges = k;
            cfg.approximation.m = 1;
            let run = run_experiment(&cfg)?;
            fidelity.push(run.report.fidelity);
            direct.push(run.report.direct_xeb);
        }
        let (f, f_err) = mean_and_stderr(&fidelity);
        let (x, x_err) = mean_and_stderr(&direct);
        let kx = k as f64;
        points.push(CurvePoint { series: "predicted".into(), x: kx, y: predicted, y_predicted: predicted, y_err: 0.0 });
        points.push(CurvePoint { series: "fidelity".into(), x: kx, y: f, y_predicted: predicted, y_err: f_err });
        points.push(CurvePoint { series: "xeb_direct".into(), x: kx, y: x, y_predicted: f, y_err: x_err });
    }
    Ok(Dataset { figure: Figure::FidelityVsK, x_column: "K_broken_edges", y_column: "value_dimensionless", points })
}

/// Top-k XEB over the exhaustive 16-qubit candidate set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmplificationData {
    pub n: usize,
    pub ks: Vec<usize>,
    /// Broken-edge counts; 0 is exact.
    pub depths: Vec<usize>,
    /// Mean measured fidelity per depth.
    pub fidelity: Vec<f64>,
    /// Mean top-k XEB, indexed `[depth][k]`.
    pub xeb: Vec<Vec<f64>>,
    pub xeb_err: Vec<Vec<f64>>,
}

impl AmplificationData {
    pub fn dataset(&self) -> Dataset {
        let size = (self.n as f64).exp2();
        let mut points = Vec::new();
        for (d, &depth) in self.depths.iter().enumerate() {
            for (j, &k) in self.ks.iter().enumerate() {
                points.push(CurvePoint {
                    series: format!("D={depth}"),
                    x: k as f64,
                    y: self.xeb[d][j],
                    y_predicted: self.fidelity[d] * (size / k as f64).ln(),
                    y_err: self.xeb_err[d][j],
                });
            }
        }
        Dataset { figure: Figure::AmplificationVsK, x_column: "k_samples", y_column: "xeb_dimensionless", points }
    }
}

pub fn amplification_data(seeds: &[u64], max_depth: usize) -> Result<AmplificationData> {
    let n = 16;
    let ks: Vec<usize> = (0..16).map(|j| 1usize << j).collect();
    let depths: Vec<usize> = (0..=max_depth).collect();
    let settings = EngineSettings::default();
    let mut fidelity = vec![Vec::new(); depths.len()];
    let mut xebs = vec![vec![Vec::new(); ks.len()]; depths.len()];
    for &seed in seeds {
        let circuit = grid_circuit(n, 16, seed)?;
        let exact = simulate_exact(&circuit)?;
        let network = circuit_to_network(&circuit, &OutputSpec::all_open(n))?;
        let labels = select_broken_edges(&network, max_depth)?;
        for &d in &depths {
            let probs = if d == 0 {
                fidelity[d].push(1.0);
                exact.probabilities()
            } else {
                let cfg = BrokenEdgeConfig::gray_code(labels[..d].to_vec(), 1, seed)?;
                let approx = contract_state(&circuit, Some(&cfg), &settings)?;
                fidelity[d].push(state_fidelity(&approx, exact.amplitudes())?.value);
                approx.iter().map(|a| a.norm_sqr()).collect()
            };
            let mut set = CandidateSet::build(n, (0..n).collect(), 1, seed)?;
            set.groups[0].probabilities = probs;
            for (j, &k) in ks.iter().enumerate() {
                xebs[d][j].push(xeb(&top_k_select(&set, k)?, &exact)?);
            }
        }
    }
    let stats: Vec<Vec<(f64, f64)>> =
        xebs.iter().map(|per_k| per_k.iter().map(|v| mean_and_stderr(v)).collect()).collect();
    Ok(AmplificationData {
        n,
        ks,
        depths,
        fidelity: fidelity.iter().map(|f| mean_and_stderr(f).0).collect(),
        xeb: stats.iter().map(|r| r.iter().map(|s| s.0).collect()).collect(),
        xeb_err: stats.iter().map(|r| r.iter().map(|s| s.1).collect()).collect(),
    })
}

pub fn scaling_dataset(params: &ReproduceParams) -> Result<Dataset> {
    let points = measure(&params.scaling_config, &params.worker_counts)?;
    let fit = fit_scaling(&points).ok();
    Ok(Dataset {
        figure: Figure::Scaling,
        x_column: "workers_count",
        y_column: "wall_time_s",
        points: points
            .iter()
            .map(|p| CurvePoint {
                series: "measured".into(),
                x: p.workers as f64,
                y: p.wall_seconds,
                y_predicted: fit.map_or(f64::NAN, |f| f.predict(p.workers as f64)),
                y_err: 0.0,
            })
            .collect(),
    })
}

/// Histogram of N·q for a deep 12-qubit circuit against e^{-x}.
pub fn pt_histogram(seed: u64) -> Result<Dataset> {
    let n = 12;
    let circuit = grid_circuit(n, 24, seed)?;
    let probs = simulate_exact(&circuit)?.probabilities();
    let total = probs.len() as f64;
    let width = 0.25;
    let bins = 32;
    let mut counts = vec![0usize; bins];
    for p in &probs {
        let b = (p * total / width) as usize;
        if b < bins {
            counts[b] += 1;
        }
    }
    let points = counts
        .iter()
        .enumerate()
        .map(|(b, &c)| {
            let (lo, hi) = (b as f64 * width, (b + 1) as f64 * width);
            CurvePoint {
                series: "oracle".into(),
                x: 0.5 * (lo + hi),
                y: c as f64 / (total * width),
                y_predicted: ((-lo).exp() - (-hi).exp()) / width,
                y_err: (c as f64).sqrt() / (total * width),
            }
        })
        .collect();
    Ok(Dataset { figure: Figure::PtHistogram, x_column: "Nq_dimensionless", y_column: "density_per_unit_Nq", points })
}

pub fn reproduce(figure: Figure, params: &ReproduceParams) -> Result<Dataset> {
    let seeds: Vec<u64> = (0..params.seeds as u64).map(|s| params.base_seed + s).collect();
    match figure {
        Figure::FidelityVsK => fidelity_vs_k(params),
        Figure::AmplificationVsK => Ok(amplification_data(&seeds, 5)?.dataset()),
        Figure::Scaling => scaling_dataset(params),
        Figure::PtHistogram => pt_histogram(params.base_seed),
    }
}
