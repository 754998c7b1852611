//! Strong-scaling regression of wall time against worker count.

use std::collections::BTreeSet;
use std::time::Instant;

use rcsim_core::engine::contract_candidates;
use rcsim_core::numeric::linear_fit;
use rcsim_core::{CandidateSet, Error, Result};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::pipeline::{broken_config, build_circuit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub workers: usize,
    pub wall_seconds: f64,
}

/// time = a / w + b, fitted by least squares on x = 1/w.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFit {
    pub a: f64,
    pub b: f64,
    pub r_squared: f64,
}

impl ScalingFit {
    pub fn predict(&self, workers: f64) -> f64 {
        self.a / workers + self.b
    }
}

pub fn fit_scaling(points: &[ScalingPoint]) -> Result<ScalingFit> {
    let distinct: BTreeSet<usize> = points.iter().map(|p| p.workers).collect();
    if distinct.len() < 2 {
        return Err(Error::Config(format!(
            "scaling regression needs at least 2 distinct worker counts, got {}",
            distinct.len()
        )));
    }
    if distinct.contains(&0) {
        return Err(Error::Config("worker counts must be at least 1".into()));
    }
    let x: Vec<f64> = points.iter().map(|p| 1.0 / p.workers as f64).collect();
    let y: Vec<f64> = points.iter().map(|p| p.wall_seconds).collect();
    let fit = linear_fit(&x, &y).ok_or_else(|| Error::Statistics("degenerate scaling data".into()))?;
    Ok(ScalingFit { a: fit.slope, b: fit.intercept, r_squared: fit.r_squared })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub points: Vec<ScalingPoint>,
    pub fit: ScalingFit,
    pub extrapolate_workers: Option<f64>,
    pub extrapolated_seconds: Option<f64>,
    /// Logical CPUs visible to the process.
    pub available_parallelism: usize,
}

/// Times the configured contraction workload once per worker count.
pub fn measure(cfg: &ExperimentConfig, worker_counts: &[usize]) -> Result<Vec<ScalingPoint>> {
    cfg.validate()?;
    if worker_counts.is_empty() || worker_counts.contains(&0) {
        return Err(Error::Config("worker counts must be a nonempty list of positive integers".into()));
    }
    let circuit = build_circuit(cfg)?;
    let candidates = CandidateSet::build(cfg.circuit.n_qubits, cfg.open_qubits(), cfg.candidates.groups, cfg.seed)?;
    let broken = broken_config(cfg, &circuit)?;
    let mut points = Vec::with_capacity(worker_counts.len());
    for &workers in worker_counts {
        let mut settings = cfg.settings();
        settings.exec.workers = workers;
        let start = Instant::now();
        contract_candidates(&circuit, &candidates, broken.as_ref(), &settings)?;
        points.push(ScalingPoint { workers, wall_seconds: start.elapsed().as_secs_f64() });
    }
    Ok(points)
}

pub fn cmd_scaling(cfg: &ExperimentConfig, worker_counts: &[usize], extrapolate: Option<f64>) -> Result<ScalingReport> {
    let distinct: BTreeSet<usize> = worker_counts.iter().copied().collect();
    if distinct.len() < 2 {
        return Err(Error::Config(format!(
            "scaling regression needs at least 2 distinct worker counts, got {}",
            distinct.len()
        )));
    }
    let points = measure(cfg, worker_counts)?;
    let fit = fit_scaling(&points)?;
    Ok(ScalingReport {
        points,
        fit,
        extrapolate_workers: extrapolate,
        extrapolated_seconds: extrapolate.map(|w| fit.predict(w)),
        available_parallelism: std::thread::available_parallelism().map_or(1, |n| n.get()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_inverse_law_is_recovered() {
        let points: Vec<ScalingPoint> =
            [1, 2, 4, 8, 16].iter().map(|&w| ScalingPoint { workers: w, wall_seconds: 37.5 / w as f64 }).collect();
        let fit = fit_scaling(&points).unwrap();
        assert!((fit.a - 37.5).abs() < 1e-9);
        assert!(fit.b.abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn documentation_case_extrapolates() {
        let points = [
            ScalingPoint { workers: 1024, wall_seconds: 1477.18 },
            ScalingPoint { workers: 10_000, wall_seconds: 153.12 },
        ];
        let fit = fit_scaling(&points).unwrap();
        assert!((fit.predict(1024.0) - 1477.18).abs() < 1e-6);
        assert!((fit.predict(10_000.0) - 153.12).abs() < 1e-6);
        assert!((fit.a - 1_510_514.08).abs() < 0.01);
        assert!((fit.b - 2.07).abs() < 0.01);
    }

    #[test]
    fn single_count_is_rejected() {
        let points = [ScalingPoint { workers: 4, wall_seconds: 1.0 }, ScalingPoint { workers: 4, wall_seconds: 1.1 }];
        assert!(matches!(fit_scaling(&points), Err(Error::Config(_))));
        assert!(matches!(cmd_scaling(&ExperimentConfig::default(), &[2, 2], None), Err(Error::Config(_))));
    }
}
